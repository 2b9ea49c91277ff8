#pragma once

// Dense inner-loop kernels behind the tensor ops.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active table is picked once at startup from CPUID and can be
// overridden with CONVERSE_SIMD=scalar|avx2 or force_backend(). Elementwise
// kernels (axpy, mul_acc, adam_update) are bit-identical across backends;
// dot() reassociates the sum and agrees to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace converse::simd {

enum class Backend { scalar, avx2 };

struct AdamCoeffs {
  double learning_rate;
  double beta1;
  double beta2;
  double epsilon;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct KernelTable {
  Backend backend;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y += a * b (elementwise)
  void (*mul_acc)(const double* a, const double* b, double* y, std::size_t n);
  void (*adam_update)(double* w, double* m, double* v, const double* g, std::size_t n,
                      const AdamCoeffs& c);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void mul_acc(const double* a, const double* b, double* y, std::size_t n);
void adam_update(double* w, double* m, double* v, const double* g, std::size_t n,
                 const AdamCoeffs& c);
const KernelTable& table();
}  // namespace scalar

#if defined(CONVERSE_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void mul_acc(const double* a, const double* b, double* y, std::size_t n);
void adam_update(double* w, double* m, double* v, const double* g, std::size_t n,
                 const AdamCoeffs& c);
const KernelTable& table();
}  // namespace avx2
#endif

bool backend_available(Backend b);
Backend active_backend();
// Throws std::invalid_argument when the backend is not available on this CPU.
void force_backend(Backend b);
std::string_view backend_name(Backend b);

const KernelTable& kernels();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  kernels().axpy(alpha, x.data(), y.data(), x.size());
}
inline void mul_acc(std::span<const double> a, std::span<const double> b, std::span<double> y) {
  kernels().mul_acc(a.data(), b.data(), y.data(), a.size());
}

}  // namespace converse::simd
