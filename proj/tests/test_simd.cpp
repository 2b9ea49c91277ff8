#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "converse/simd/kernels.hpp"

namespace simd = converse::simd;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

class SimdEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!simd::backend_available(simd::Backend::avx2)) GTEST_SKIP() << "no AVX2 on this CPU";
  }
};

}  // namespace

TEST(SimdDispatch, ScalarAlwaysAvailable) {
  EXPECT_TRUE(simd::backend_available(simd::Backend::scalar));
  EXPECT_EQ(simd::backend_name(simd::Backend::scalar), "scalar");
}

TEST(SimdDispatch, ForceBackendSwitchesTable) {
  const auto original = simd::active_backend();
  simd::force_backend(simd::Backend::scalar);
  EXPECT_EQ(simd::active_backend(), simd::Backend::scalar);
  EXPECT_EQ(simd::kernels().backend, simd::Backend::scalar);
  if (simd::backend_available(simd::Backend::avx2)) {
    simd::force_backend(simd::Backend::avx2);
    EXPECT_EQ(simd::kernels().backend, simd::Backend::avx2);
  } else {
    EXPECT_THROW(simd::force_backend(simd::Backend::avx2), std::invalid_argument);
  }
  simd::force_backend(original);
}

#if defined(CONVERSE_HAVE_AVX2)

TEST_F(SimdEquivalence, DotAgreesToRounding) {
  std::mt19937_64 rng(1);
  for (std::size_t n = 0; n < 70; ++n) {
    const auto a = random_vector(n, rng), b = random_vector(n, rng);
    const double s = simd::scalar::dot(a.data(), b.data(), n);
    const double v = simd::avx2::dot(a.data(), b.data(), n);
    double magnitude = 0.0;
    for (std::size_t i = 0; i < n; ++i) magnitude += std::abs(a[i] * b[i]);
    EXPECT_NEAR(s, v, 1e-14 * (magnitude + 1.0)) << "n=" << n;
  }
}

TEST_F(SimdEquivalence, AxpyBitIdentical) {
  std::mt19937_64 rng(2);
  for (std::size_t n = 0; n < 70; ++n) {
    const auto x = random_vector(n, rng);
    auto y1 = random_vector(n, rng);
    auto y2 = y1;
    simd::scalar::axpy(0.37, x.data(), y1.data(), n);
    simd::avx2::axpy(0.37, x.data(), y2.data(), n);
    EXPECT_EQ(y1, y2) << "n=" << n;
  }
}

TEST_F(SimdEquivalence, MulAccBitIdentical) {
  std::mt19937_64 rng(3);
  for (std::size_t n = 0; n < 70; ++n) {
    const auto a = random_vector(n, rng), b = random_vector(n, rng);
    auto y1 = random_vector(n, rng);
    auto y2 = y1;
    simd::scalar::mul_acc(a.data(), b.data(), y1.data(), n);
    simd::avx2::mul_acc(a.data(), b.data(), y2.data(), n);
    EXPECT_EQ(y1, y2) << "n=" << n;
  }
}

TEST_F(SimdEquivalence, AdamUpdateBitIdentical) {
  std::mt19937_64 rng(4);
  const simd::AdamCoeffs c{0.01, 0.9, 0.999, 1e-8, 1.0 - 0.9 * 0.9, 1.0 - 0.999 * 0.999};
  for (std::size_t n = 0; n < 70; ++n) {
    auto w1 = random_vector(n, rng), m1 = random_vector(n, rng), v1 = random_vector(n, rng);
    for (auto& x : v1) x = std::abs(x);
    const auto g = random_vector(n, rng);
    auto w2 = w1, m2 = m1, v2 = v1;
    simd::scalar::adam_update(w1.data(), m1.data(), v1.data(), g.data(), n, c);
    simd::avx2::adam_update(w2.data(), m2.data(), v2.data(), g.data(), n, c);
    EXPECT_EQ(w1, w2) << "n=" << n;
    EXPECT_EQ(m1, m2);
    EXPECT_EQ(v1, v2);
  }
}

TEST_F(SimdEquivalence, UnalignedOffsets) {
  std::mt19937_64 rng(5);
  const auto base = random_vector(64, rng);
  for (std::size_t off = 0; off < 4; ++off) {
    const std::size_t n = 64 - off;
    auto y1 = random_vector(n, rng);
    auto y2 = y1;
    simd::scalar::axpy(-1.25, base.data() + off, y1.data(), n);
    simd::avx2::axpy(-1.25, base.data() + off, y2.data(), n);
    EXPECT_EQ(y1, y2);
  }
}

#endif
