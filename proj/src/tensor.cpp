#include "converse/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "converse/error.hpp"

namespace converse {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

namespace {

void check_shape(const std::vector<std::size_t>& shape) {
  if (shape.empty() || shape.size() > 2) {
    throw ShapeMismatch("tensor rank must be 1 or 2");
  }
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeMismatch("tensor dimensions must be positive");
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  values_.assign(shape_product(shape_), fill);
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  check_shape(shape_);
  if (values_.size() != shape_product(shape_)) {
    throw ShapeMismatch("value count does not match shape");
  }
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
  return Tensor({rows, cols}, std::vector<double>(values));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::scalar(double value) { return Tensor({1}, std::vector<double>{value}); }

Tensor Tensor::zeros_like(const Tensor& other) {
  Tensor t;
  t.shape_ = other.shape_;
  t.values_.assign(other.values_.size(), 0.0);
  return t;
}

std::size_t Tensor::rows() const noexcept {
  return shape_.size() == 2 ? shape_[0] : (shape_.empty() ? 0 : 1);
}

std::size_t Tensor::cols() const noexcept { return shape_.empty() ? 0 : shape_.back(); }

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace converse
