#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "converse/autodiff.hpp"
#include "converse/ops.hpp"

namespace converse {

// Named parameters. Ordered by name so iteration (and therefore optimizer
// updates and checkpoint layout) is deterministic.
class ParameterSet {
 public:
  Parameter& add(const std::string& name, Tensor value, bool trainable = true);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  std::size_t size() const noexcept { return params_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();
  double grad_norm() const;
  // Rescales all gradients so their global L2 norm is at most max_norm.
  // Returns the norm before clipping.
  double clip_grad_norm(double max_norm);
  bool all_finite() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::map<std::string, Parameter> params_;
};

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);
Tensor uniform_tensor(std::vector<std::size_t> shape, double limit, std::mt19937_64& rng);

// ---- GRU -------------------------------------------------------------------

// z = σ(x W_z + h U_z + b_z)
// r = σ(x W_r + h U_r + b_r)
// h̃ = tanh(x W_h + (r ⊙ h) U_h + b_h)
// h' = (1 - z) ⊙ h + z ⊙ h̃
struct GruWeights {
  Var w_z, w_r, w_h;
  Var u_z, u_r, u_h;
  Var b_z, b_r, b_h;
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
};

void add_gru_parameters(ParameterSet& params, const std::string& prefix, std::size_t input_size,
                        std::size_t hidden_size, std::mt19937_64& rng);
GruWeights bind_gru(Graph& g, ParameterSet& params, const std::string& prefix);

enum class Direction { forward, backward };

Var gru_cell(Var x, Var h_prev, const GruWeights& w);

// Runs the GRU over the rows of `inputs` ([T, m]). Output i is the hidden
// state after consuming row i; for Direction::backward the rows are consumed
// from T-1 down to 0, so output 0 is the final backward state.
std::vector<Var> gru_sequence(Var inputs, Direction dir, const GruWeights& w);
std::vector<Var> gru_sequence(const std::vector<Var>& inputs, Direction dir, const GruWeights& w);

// Forward-final state concatenated with backward-final state: [1, 2k].
Var bigru_encode(Var inputs, const GruWeights& fw, const GruWeights& bw);

// ---- Adam ------------------------------------------------------------------

struct AdamConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::map<std::string, Tensor> first_moment;
  std::map<std::string, Tensor> second_moment;
};

// One bias-corrected Adam update of every trainable parameter from its .grad.
// Throws NonFiniteGradient (before touching anything) if a gradient holds
// NaN or Inf.
void adam_step(ParameterSet& params, OptimizerState& state);

// ---- Gradient checking -----------------------------------------------------

struct GradientCheckEntry {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradientCheckReport {
  std::vector<GradientCheckEntry> entries;
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  std::string failure;  // set when the loss function threw

  bool passed() const { return failure.empty() && max_relative_error <= tolerance; }
};

// Builds a scalar loss inside the supplied graph, binding whatever
// parameters it needs from the set passed to gradient_check.
using LossBuilder = std::function<Var(Graph&, ParameterSet&)>;

// |a - n| / max(|a|, |n|, 1e-6); the floor keeps gradients that are zero
// up to round-off from dominating.
double relative_error(double analytic, double numeric);

// Compares analytic gradients with fourth-order central differences for
// every trainable parameter (or only those listed in `only`). Never throws.
GradientCheckReport gradient_check(const LossBuilder& loss, ParameterSet& params,
                                   double epsilon = 1e-3, double tolerance = 1e-4,
                                   const std::vector<std::string>& only = {});

}  // namespace converse
