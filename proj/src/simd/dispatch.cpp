#include "converse/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace converse::simd {

namespace {

bool cpu_has_avx2() {
#if defined(CONVERSE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::scalar:
      return &scalar::table();
    case Backend::avx2:
#if defined(CONVERSE_HAVE_AVX2)
      return cpu_has_avx2() ? &avx2::table() : nullptr;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("CONVERSE_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &scalar::table();
    if (want == "avx2") {
      if (const KernelTable* t = table_for(Backend::avx2)) return t;
    }
  }
  if (const KernelTable* t = table_for(Backend::avx2)) return t;
  return &scalar::table();
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

bool backend_available(Backend b) { return table_for(b) != nullptr; }

Backend active_backend() { return kernels().backend; }

void force_backend(Backend b) {
  const KernelTable* t = table_for(b);
  if (t == nullptr) {
    throw std::invalid_argument("SIMD backend not available: " + std::string(backend_name(b)));
  }
  active().store(t);
}

std::string_view backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

const KernelTable& kernels() { return *active().load(std::memory_order_relaxed); }

}  // namespace converse::simd
