#pragma once

// Differentiable operations over Graph variables. Matrices are row-major
// [rows, cols]; vectors are single rows.

#include <cstddef>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "converse/autodiff.hpp"

namespace converse::ops {

Var matmul(Var a, Var b);
// x·W + b, with b broadcast over rows.
Var affine(Var x, Var w, Var b);
Var add(Var a, Var b);
Var add_row(Var a, Var row);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var one_minus(Var a);

Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);
// Softmax along the last axis, independently per row.
Var softmax_rows(Var a);

Var row(Var a, std::size_t r);
Var gather_rows(Var table, std::span<const std::size_t> indices);
Var concat_cols(Var a, Var b);
Var stack_rows(const std::vector<Var>& rows);
Var sum(Var a);
Var sum_scalars(const std::vector<Var>& scalars);

// Inverted dropout. In eval mode (train=false) or at rate 0 the input handle
// is returned unchanged.
Var dropout(Var a, double rate, bool train, std::mt19937_64& rng);

struct PoolResult {
  Var pooled;                       // [1, k]
  std::vector<std::size_t> argmax;  // winning row per column, earliest on ties
};
// Column-wise maximum over the rows of a [T, k] matrix.
PoolResult max_pool_rows(Var a);
PoolResult max_pool_over_time(const std::vector<Var>& sequence);

// Sliding windows of `width` consecutive rows flattened into one row each.
// The input is zero-padded at the bottom to at least `min_rows` rows first.
Var unfold_windows(Var a, std::size_t width, std::size_t min_rows);

// -sum(one_hot * log(probs)). Throws DomainError when a labelled entry has
// nonpositive probability.
Var cross_entropy(Var probs, const Tensor& one_hot);
// Sum of per-row cross entropies over rows that carry a label.
Var cross_entropy_rows(Var probs, std::span<const std::optional<std::size_t>> labels);

}  // namespace converse::ops
