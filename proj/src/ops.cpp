#include "converse/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "converse/error.hpp"
#include "converse/simd/kernels.hpp"

namespace converse::ops {

namespace {

std::string shape_str(const Tensor& t) {
  std::string s = "[";
  for (std::size_t i = 0; i < t.rank(); ++i) {
    if (i) s += ",";
    s += std::to_string(t.shape()[i]);
  }
  return s + "]";
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeMismatch(std::string(op) + ": " + shape_str(a) + " vs " + shape_str(b));
  }
}

// out[i,:] += sum_k a[i,k] * b[k,:]
void gemm_acc(const Tensor& a, const Tensor& b, Tensor& out) {
  const std::size_t n = a.rows(), p = a.cols();
  for (std::size_t i = 0; i < n; ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < p; ++k) {
      const double aik = a(i, k);
      if (aik != 0.0) simd::axpy(aik, b.row(k), out_row);
    }
  }
}

// Shared backward of out = a·b.
void gemm_backward(Graph& g, Var a, Var b, const Tensor& dout) {
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  const std::size_t n = av.rows(), p = av.cols();
  if (g.needs_grad(a)) {
    Tensor& da = g.grad_buffer(a);
    for (std::size_t i = 0; i < n; ++i) {
      auto drow = dout.row(i);
      for (std::size_t k = 0; k < p; ++k) da(i, k) += simd::dot(drow, bv.row(k));
    }
  }
  if (g.needs_grad(b)) {
    Tensor& db = g.grad_buffer(b);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < p; ++k) {
        const double aik = av(i, k);
        if (aik != 0.0) simd::axpy(aik, dout.row(i), db.row(k));
      }
    }
  }
}

// Elementwise op whose derivative is a function of its output.
template <typename F, typename D>
Var unary_from_output(Var a, F f, D dydx_from_y) {
  Graph& g = *a.graph();
  Tensor out = g.value(a);
  for (double& v : out.values()) v = f(v);
  const Var self(&g, static_cast<std::uint32_t>(g.node_count()));
  return g.record(std::move(out), {a}, [a, self, dydx_from_y](Graph& g, const Tensor& dout) {
    const Tensor& y = g.value(self);
    Tensor& da = g.grad_buffer(a);
    for (std::size_t i = 0; i < y.size(); ++i) da[i] += dout[i] * dydx_from_y(y[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = *a.graph();
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  if (av.cols() != bv.rows()) {
    throw ShapeMismatch("matmul: " + shape_str(av) + " x " + shape_str(bv));
  }
  Tensor out({av.rows(), bv.cols()});
  gemm_acc(av, bv, out);
  return g.record(std::move(out), {a, b},
                  [a, b](Graph& g, const Tensor& dout) { gemm_backward(g, a, b, dout); });
}

Var affine(Var x, Var w, Var b) {
  Graph& g = *x.graph();
  const Tensor& xv = g.value(x);
  const Tensor& wv = g.value(w);
  const Tensor& bv = g.value(b);
  if (xv.cols() != wv.rows() || bv.size() != wv.cols()) {
    throw ShapeMismatch("affine: " + shape_str(xv) + " x " + shape_str(wv) + " + " +
                        shape_str(bv));
  }
  Tensor out({xv.rows(), wv.cols()});
  for (std::size_t i = 0; i < out.rows(); ++i) {
    std::copy(bv.values().begin(), bv.values().end(), out.row(i).begin());
  }
  gemm_acc(xv, wv, out);
  return g.record(std::move(out), {x, w, b}, [x, w, b](Graph& g, const Tensor& dout) {
    gemm_backward(g, x, w, dout);
    if (g.needs_grad(b)) {
      Tensor& db = g.grad_buffer(b);
      for (std::size_t i = 0; i < dout.rows(); ++i) simd::axpy(1.0, dout.row(i), db.values());
    }
  });
}

Var add(Var a, Var b) {
  Graph& g = *a.graph();
  require_same_shape(g.value(a), g.value(b), "add");
  Tensor out = g.value(a);
  simd::axpy(1.0, g.value(b).values(), out.values());
  return g.record(std::move(out), {a, b}, [a, b](Graph& g, const Tensor& dout) {
    if (g.needs_grad(a)) simd::axpy(1.0, dout.values(), g.grad_buffer(a).values());
    if (g.needs_grad(b)) simd::axpy(1.0, dout.values(), g.grad_buffer(b).values());
  });
}

Var add_row(Var a, Var r) {
  Graph& g = *a.graph();
  const Tensor& rv = g.value(r);
  if (rv.size() != g.value(a).cols()) throw ShapeMismatch("add_row: width mismatch");
  Tensor out = g.value(a);
  for (std::size_t i = 0; i < out.rows(); ++i) simd::axpy(1.0, rv.values(), out.row(i));
  return g.record(std::move(out), {a, r}, [a, r](Graph& g, const Tensor& dout) {
    if (g.needs_grad(a)) simd::axpy(1.0, dout.values(), g.grad_buffer(a).values());
    if (g.needs_grad(r)) {
      Tensor& dr = g.grad_buffer(r);
      for (std::size_t i = 0; i < dout.rows(); ++i) simd::axpy(1.0, dout.row(i), dr.values());
    }
  });
}

Var sub(Var a, Var b) {
  Graph& g = *a.graph();
  require_same_shape(g.value(a), g.value(b), "sub");
  Tensor out = g.value(a);
  simd::axpy(-1.0, g.value(b).values(), out.values());
  return g.record(std::move(out), {a, b}, [a, b](Graph& g, const Tensor& dout) {
    if (g.needs_grad(a)) simd::axpy(1.0, dout.values(), g.grad_buffer(a).values());
    if (g.needs_grad(b)) simd::axpy(-1.0, dout.values(), g.grad_buffer(b).values());
  });
}

Var mul(Var a, Var b) {
  Graph& g = *a.graph();
  require_same_shape(g.value(a), g.value(b), "mul");
  Tensor out = Tensor::zeros_like(g.value(a));
  simd::mul_acc(g.value(a).values(), g.value(b).values(), out.values());
  return g.record(std::move(out), {a, b}, [a, b](Graph& g, const Tensor& dout) {
    if (g.needs_grad(a)) simd::mul_acc(dout.values(), g.value(b).values(), g.grad_buffer(a).values());
    if (g.needs_grad(b)) simd::mul_acc(dout.values(), g.value(a).values(), g.grad_buffer(b).values());
  });
}

Var scale(Var a, double factor) {
  Graph& g = *a.graph();
  Tensor out = g.value(a);
  for (double& v : out.values()) v *= factor;
  return g.record(std::move(out), {a}, [a, factor](Graph& g, const Tensor& dout) {
    simd::axpy(factor, dout.values(), g.grad_buffer(a).values());
  });
}

Var one_minus(Var a) {
  Graph& g = *a.graph();
  Tensor out = g.value(a);
  for (double& v : out.values()) v = 1.0 - v;
  return g.record(std::move(out), {a}, [a](Graph& g, const Tensor& dout) {
    simd::axpy(-1.0, dout.values(), g.grad_buffer(a).values());
  });
}

Var tanh(Var a) {
  return unary_from_output(
      a, [](double x) { return std::tanh(x); }, [](double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a) {
  return unary_from_output(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double y) { return y * (1.0 - y); });
}

Var relu(Var a) {
  return unary_from_output(
      a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double y) { return y > 0.0 ? 1.0 : 0.0; });
}

Var softmax_rows(Var a) {
  Graph& g = *a.graph();
  Tensor out = g.value(a);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double total = 0.0;
    for (double& v : r) {
      v = std::exp(v - mx);
      total += v;
    }
    for (double& v : r) v /= total;
  }
  const Var self(&g, static_cast<std::uint32_t>(g.node_count()));
  return g.record(std::move(out), {a}, [a, self](Graph& g, const Tensor& dout) {
    const Tensor& yv = g.value(self);
    Tensor& da = g.grad_buffer(a);
    for (std::size_t i = 0; i < yv.rows(); ++i) {
      auto yr = yv.row(i);
      auto dr = dout.row(i);
      const double inner = simd::dot(yr, dr);
      auto out_row = da.row(i);
      for (std::size_t j = 0; j < yr.size(); ++j) out_row[j] += yr[j] * (dr[j] - inner);
    }
  });
}

Var row(Var a, std::size_t r) {
  Graph& g = *a.graph();
  const Tensor& av = g.value(a);
  if (r >= av.rows()) throw ShapeMismatch("row: index out of range");
  auto src = av.row(r);
  Tensor out({1, av.cols()}, std::vector<double>(src.begin(), src.end()));
  return g.record(std::move(out), {a}, [a, r](Graph& g, const Tensor& dout) {
    simd::axpy(1.0, dout.values(), g.grad_buffer(a).row(r));
  });
}

Var gather_rows(Var table, std::span<const std::size_t> indices) {
  Graph& g = *table.graph();
  const Tensor& tv = g.value(table);
  if (indices.empty()) throw ShapeMismatch("gather_rows: no indices");
  Tensor out({indices.size(), tv.cols()});
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= tv.rows()) throw ShapeMismatch("gather_rows: index out of range");
    auto src = tv.row(indices[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return g.record(std::move(out), {table},
                  [table, idx = std::move(idx)](Graph& g, const Tensor& dout) {
                    Tensor& dt = g.grad_buffer(table);
                    for (std::size_t i = 0; i < idx.size(); ++i) {
                      simd::axpy(1.0, dout.row(i), dt.row(idx[i]));
                    }
                  });
}

Var concat_cols(Var a, Var b) {
  Graph& g = *a.graph();
  const Tensor& av = g.value(a);
  const Tensor& bv = g.value(b);
  if (av.rows() != bv.rows()) throw ShapeMismatch("concat_cols: row count mismatch");
  const std::size_t ca = av.cols(), cb = bv.cols();
  Tensor out({av.rows(), ca + cb});
  for (std::size_t i = 0; i < av.rows(); ++i) {
    auto dst = out.row(i);
    std::copy(av.row(i).begin(), av.row(i).end(), dst.begin());
    std::copy(bv.row(i).begin(), bv.row(i).end(), dst.begin() + static_cast<std::ptrdiff_t>(ca));
  }
  return g.record(std::move(out), {a, b}, [a, b, ca, cb](Graph& g, const Tensor& dout) {
    for (std::size_t i = 0; i < dout.rows(); ++i) {
      auto dr = dout.row(i);
      if (g.needs_grad(a)) simd::axpy(1.0, dr.subspan(0, ca), g.grad_buffer(a).row(i));
      if (g.needs_grad(b)) simd::axpy(1.0, dr.subspan(ca, cb), g.grad_buffer(b).row(i));
    }
  });
}

Var stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) throw EmptySequence("stack_rows: empty sequence");
  Graph& g = *rows.front().graph();
  const std::size_t k = g.value(rows.front()).size();
  Tensor out({rows.size(), k});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Tensor& rv = g.value(rows[i]);
    if (rv.size() != k) throw ShapeMismatch("stack_rows: width mismatch");
    std::copy(rv.values().begin(), rv.values().end(), out.row(i).begin());
  }
  return g.record(std::move(out), rows, [rows](Graph& g, const Tensor& dout) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (g.needs_grad(rows[i])) simd::axpy(1.0, dout.row(i), g.grad_buffer(rows[i]).values());
    }
  });
}

Var sum(Var a) {
  Graph& g = *a.graph();
  double total = 0.0;
  for (double v : g.value(a).values()) total += v;
  return g.record(Tensor::scalar(total), {a}, [a](Graph& g, const Tensor& dout) {
    Tensor& da = g.grad_buffer(a);
    for (double& v : da.values()) v += dout[0];
  });
}

Var sum_scalars(const std::vector<Var>& scalars) {
  if (scalars.empty()) throw EmptySequence("sum_scalars: empty list");
  Graph& g = *scalars.front().graph();
  double total = 0.0;
  for (const Var& s : scalars) {
    if (g.value(s).size() != 1) throw ShapeMismatch("sum_scalars: non-scalar operand");
    total += g.value(s)[0];
  }
  return g.record(Tensor::scalar(total), scalars, [scalars](Graph& g, const Tensor& dout) {
    for (const Var& s : scalars) {
      if (g.needs_grad(s)) g.grad_buffer(s)[0] += dout[0];
    }
  });
}

Var dropout(Var a, double rate, bool train, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw DomainError("dropout: rate must be in [0, 1)");
  if (!train || rate == 0.0) return a;
  Graph& g = *a.graph();
  const double keep_scale = 1.0 / (1.0 - rate);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Tensor mask = Tensor::zeros_like(g.value(a));
  for (double& m : mask.values()) m = unit(rng) < rate ? 0.0 : keep_scale;
  Tensor out = Tensor::zeros_like(g.value(a));
  simd::mul_acc(g.value(a).values(), mask.values(), out.values());
  return g.record(std::move(out), {a}, [a, mask = std::move(mask)](Graph& g, const Tensor& dout) {
    simd::mul_acc(dout.values(), mask.values(), g.grad_buffer(a).values());
  });
}

PoolResult max_pool_rows(Var a) {
  Graph& g = *a.graph();
  const Tensor& av = g.value(a);
  const std::size_t k = av.cols();
  Tensor out({1, k});
  std::vector<std::size_t> arg(k, 0);
  for (std::size_t j = 0; j < k; ++j) {
    double best = av(0, j);
    for (std::size_t i = 1; i < av.rows(); ++i) {
      if (av(i, j) > best) {
        best = av(i, j);
        arg[j] = i;
      }
    }
    out(0, j) = best;
  }
  Var pooled = g.record(std::move(out), {a}, [a, arg](Graph& g, const Tensor& dout) {
    Tensor& da = g.grad_buffer(a);
    for (std::size_t j = 0; j < arg.size(); ++j) da(arg[j], j) += dout[j];
  });
  return {pooled, std::move(arg)};
}

PoolResult max_pool_over_time(const std::vector<Var>& sequence) {
  if (sequence.empty()) throw EmptySequence("max_pool_over_time: empty sequence");
  return max_pool_rows(stack_rows(sequence));
}

Var unfold_windows(Var a, std::size_t width, std::size_t min_rows) {
  Graph& g = *a.graph();
  const Tensor& av = g.value(a);
  if (width == 0) throw ShapeMismatch("unfold_windows: zero width");
  const std::size_t in_rows = av.rows(), k = av.cols();
  const std::size_t padded = std::max({in_rows, min_rows, width});
  const std::size_t positions = padded - width + 1;
  Tensor out({positions, width * k});
  for (std::size_t t = 0; t < positions; ++t) {
    auto dst = out.row(t);
    for (std::size_t w = 0; w < width && t + w < in_rows; ++w) {
      auto src = av.row(t + w);
      std::copy(src.begin(), src.end(), dst.begin() + static_cast<std::ptrdiff_t>(w * k));
    }
  }
  return g.record(std::move(out), {a}, [a, width, in_rows, k](Graph& g, const Tensor& dout) {
    Tensor& da = g.grad_buffer(a);
    for (std::size_t t = 0; t < dout.rows(); ++t) {
      auto dr = dout.row(t);
      for (std::size_t w = 0; w < width && t + w < in_rows; ++w) {
        simd::axpy(1.0, dr.subspan(w * k, k), da.row(t + w));
      }
    }
  });
}

Var cross_entropy(Var probs, const Tensor& one_hot) {
  Graph& g = *probs.graph();
  const Tensor& pv = g.value(probs);
  if (pv.size() != one_hot.size()) throw ShapeMismatch("cross_entropy: size mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < pv.size(); ++i) {
    if (one_hot[i] == 0.0) continue;
    if (pv[i] <= 0.0) throw DomainError("cross_entropy: nonpositive probability");
    loss -= one_hot[i] * std::log(pv[i]);
  }
  return g.record(Tensor::scalar(loss), {probs}, [probs, one_hot](Graph& g, const Tensor& dout) {
    const Tensor& pv = g.value(probs);
    Tensor& dp = g.grad_buffer(probs);
    for (std::size_t i = 0; i < pv.size(); ++i) {
      if (one_hot[i] != 0.0) dp[i] -= dout[0] * one_hot[i] / pv[i];
    }
  });
}

Var cross_entropy_rows(Var probs, std::span<const std::optional<std::size_t>> labels) {
  Graph& g = *probs.graph();
  const Tensor& pv = g.value(probs);
  if (labels.size() != pv.rows()) throw ShapeMismatch("cross_entropy_rows: label count mismatch");
  double loss = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) continue;
    if (*labels[i] >= pv.cols()) throw ShapeMismatch("cross_entropy_rows: label out of range");
    const double p = pv(i, *labels[i]);
    if (p <= 0.0) throw DomainError("cross_entropy_rows: nonpositive probability");  // NaN propagates
    loss -= std::log(p);
  }
  std::vector<std::optional<std::size_t>> lab(labels.begin(), labels.end());
  return g.record(Tensor::scalar(loss), {probs},
                  [probs, lab = std::move(lab)](Graph& g, const Tensor& dout) {
                    const Tensor& pv = g.value(probs);
                    Tensor& dp = g.grad_buffer(probs);
                    for (std::size_t i = 0; i < lab.size(); ++i) {
                      if (lab[i]) dp(i, *lab[i]) -= dout[0] / pv(i, *lab[i]);
                    }
                  });
}

}  // namespace converse::ops
