#include "converse/nn.hpp"

#include <algorithm>
#include <cmath>

#include "converse/error.hpp"
#include "converse/simd/kernels.hpp"

namespace converse {

Parameter& ParameterSet::add(const std::string& name, Tensor value, bool trainable) {
  if (params_.count(name)) throw Error("duplicate parameter name: " + name);
  Parameter p;
  p.name = name;
  p.grad = Tensor::zeros_like(value);
  p.value = std::move(value);
  p.value.set_requires_grad(true);
  p.trainable = trainable;
  return params_.emplace(name, std::move(p)).first->second;
}

Parameter& ParameterSet::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter: " + name);
  return it->second;
}

const Parameter& ParameterSet::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("unknown parameter: " + name);
  return it->second;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) n += p.value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [_, p] : params_) {
    if (p.grad.size() != p.value.size()) p.grad = Tensor::zeros_like(p.value);
    p.grad.fill(0.0);
  }
}

double ParameterSet::grad_norm() const {
  double sq = 0.0;
  for (const auto& [_, p] : params_) {
    if (!p.trainable) continue;
    sq += simd::dot(p.grad.values(), p.grad.values());
  }
  return std::sqrt(sq);
}

double ParameterSet::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm > max_norm && norm > 0.0) {
    const double factor = max_norm / norm;
    for (auto& [_, p] : params_) {
      for (double& v : p.grad.values()) v *= factor;
    }
  }
  return norm;
}

bool ParameterSet::all_finite() const {
  return std::all_of(params_.begin(), params_.end(),
                     [](const auto& kv) { return kv.second.value.all_finite(); });
}

Tensor uniform_tensor(std::vector<std::size_t> shape, double limit, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  return uniform_tensor({fan_in, fan_out}, limit, rng);
}

// ---- GRU -------------------------------------------------------------------

void add_gru_parameters(ParameterSet& params, const std::string& prefix, std::size_t input_size,
                        std::size_t hidden_size, std::mt19937_64& rng) {
  for (const char* gate : {"z", "r", "h"}) {
    params.add(prefix + ".W_" + gate, glorot_uniform(input_size, hidden_size, rng));
  }
  for (const char* gate : {"z", "r", "h"}) {
    params.add(prefix + ".U_" + gate, glorot_uniform(hidden_size, hidden_size, rng));
  }
  for (const char* gate : {"z", "r", "h"}) {
    params.add(prefix + ".b_" + gate, Tensor({hidden_size}));
  }
}

GruWeights bind_gru(Graph& g, ParameterSet& params, const std::string& prefix) {
  GruWeights w;
  w.w_z = g.parameter(params.at(prefix + ".W_z"));
  w.w_r = g.parameter(params.at(prefix + ".W_r"));
  w.w_h = g.parameter(params.at(prefix + ".W_h"));
  w.u_z = g.parameter(params.at(prefix + ".U_z"));
  w.u_r = g.parameter(params.at(prefix + ".U_r"));
  w.u_h = g.parameter(params.at(prefix + ".U_h"));
  w.b_z = g.parameter(params.at(prefix + ".b_z"));
  w.b_r = g.parameter(params.at(prefix + ".b_r"));
  w.b_h = g.parameter(params.at(prefix + ".b_h"));
  w.input_size = g.value(w.w_z).rows();
  w.hidden_size = g.value(w.w_z).cols();
  return w;
}

namespace {

// Recurrent half of the cell given the precomputed input projections.
Var gru_step(Var xz, Var xr, Var xh, Var h, const GruWeights& w) {
  using namespace ops;
  Var z = sigmoid(add(xz, matmul(h, w.u_z)));
  Var r = sigmoid(add(xr, matmul(h, w.u_r)));
  Var candidate = tanh(add(xh, matmul(mul(r, h), w.u_h)));
  return add(mul(one_minus(z), h), mul(z, candidate));
}

void check_hidden(const Tensor& h, const GruWeights& w) {
  if (h.size() != w.hidden_size) throw ShapeMismatch("gru: hidden state size mismatch");
}

}  // namespace

Var gru_cell(Var x, Var h_prev, const GruWeights& w) {
  Graph& g = *x.graph();
  if (g.value(x).size() != w.input_size) throw ShapeMismatch("gru_cell: input size mismatch");
  check_hidden(g.value(h_prev), w);
  using namespace ops;
  Var h = h_prev.value().rank() == 2 ? h_prev : row(h_prev, 0);
  Var xr_row = x.value().rank() == 2 ? x : row(x, 0);
  return gru_step(affine(xr_row, w.w_z, w.b_z), affine(xr_row, w.w_r, w.b_r),
                  affine(xr_row, w.w_h, w.b_h), h, w);
}

std::vector<Var> gru_sequence(Var inputs, Direction dir, const GruWeights& w) {
  Graph& g = *inputs.graph();
  const std::size_t steps = g.value(inputs).rows();
  if (steps == 0) throw EmptySequence("gru_sequence: empty input");
  if (g.value(inputs).cols() != w.input_size) throw ShapeMismatch("gru_sequence: input size mismatch");
  using namespace ops;
  Var pz = affine(inputs, w.w_z, w.b_z);
  Var pr = affine(inputs, w.w_r, w.b_r);
  Var ph = affine(inputs, w.w_h, w.b_h);
  std::vector<Var> out(steps);
  Var h = g.constant(Tensor({1, w.hidden_size}));
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t t = dir == Direction::forward ? s : steps - 1 - s;
    h = gru_step(row(pz, t), row(pr, t), row(ph, t), h, w);
    out[t] = h;
  }
  return out;
}

std::vector<Var> gru_sequence(const std::vector<Var>& inputs, Direction dir, const GruWeights& w) {
  if (inputs.empty()) throw EmptySequence("gru_sequence: empty input");
  return gru_sequence(ops::stack_rows(inputs), dir, w);
}

Var bigru_encode(Var inputs, const GruWeights& fw, const GruWeights& bw) {
  auto forward = gru_sequence(inputs, Direction::forward, fw);
  auto backward = gru_sequence(inputs, Direction::backward, bw);
  return ops::concat_cols(forward.back(), backward.front());
}

// ---- Adam ------------------------------------------------------------------

void adam_step(ParameterSet& params, OptimizerState& state) {
  for (const auto& [name, p] : params) {
    if (!p.trainable) continue;
    if (p.grad.size() != p.value.size()) throw ShapeMismatch("adam_step: gradient shape mismatch for " + name);
    if (!p.grad.all_finite()) throw NonFiniteGradient("adam_step: non-finite gradient in " + name);
  }
  state.step += 1;
  const AdamConfig& c = state.config;
  const double t = static_cast<double>(state.step);
  const simd::AdamCoeffs coeffs{c.learning_rate, c.beta1, c.beta2, c.epsilon,
                                1.0 - std::pow(c.beta1, t), 1.0 - std::pow(c.beta2, t)};
  const auto& k = simd::kernels();
  for (auto& [name, p] : params) {
    if (!p.trainable) continue;
    auto [mit, m_new] = state.first_moment.try_emplace(name, Tensor::zeros_like(p.value));
    auto [vit, v_new] = state.second_moment.try_emplace(name, Tensor::zeros_like(p.value));
    if (!mit->second.same_shape(p.value) || !vit->second.same_shape(p.value)) {
      throw ShapeMismatch("adam_step: moment shape mismatch for " + name);
    }
    k.adam_update(p.value.values().data(), mit->second.values().data(),
                  vit->second.values().data(), p.grad.values().data(), p.value.size(), coeffs);
  }
}

// ---- Gradient checking -----------------------------------------------------

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

GradientCheckReport gradient_check(const LossBuilder& loss, ParameterSet& params, double epsilon,
                                   double tolerance, const std::vector<std::string>& only) {
  GradientCheckReport report;
  report.tolerance = tolerance;
  try {
    params.zero_grad();
    {
      Graph g;
      Var l = loss(g, params);
      g.backward(l);
    }
    auto evaluate = [&]() {
      Graph g(false);
      return loss(g, params).value()[0];
    };
    for (auto& [name, p] : params) {
      if (!p.trainable) continue;
      if (!only.empty() && std::find(only.begin(), only.end(), name) == only.end()) continue;
      GradientCheckEntry entry;
      entry.name = name;
      for (std::size_t i = 0; i < p.value.size(); ++i) {
        const double original = p.value[i];
        // Fourth-order central stencil: truncation error O(eps^4), so a
        // larger eps keeps round-off out of the comparison.
        double f[4];
        const double offsets[4] = {2.0, 1.0, -1.0, -2.0};
        for (int s = 0; s < 4; ++s) {
          p.value[i] = original + offsets[s] * epsilon;
          f[s] = evaluate();
        }
        p.value[i] = original;
        const double numeric = (-f[0] + 8.0 * f[1] - 8.0 * f[2] + f[3]) / (12.0 * epsilon);
        const double err = relative_error(p.grad[i], numeric);
        if (err > entry.max_relative_error || i == 0) {
          entry.max_relative_error = err;
          entry.worst_index = i;
          entry.analytic = p.grad[i];
          entry.numeric = numeric;
        }
      }
      report.max_relative_error = std::max(report.max_relative_error, entry.max_relative_error);
      report.entries.push_back(entry);
    }
  } catch (const std::exception& e) {
    report.failure = e.what();
  }
  return report;
}

}  // namespace converse
