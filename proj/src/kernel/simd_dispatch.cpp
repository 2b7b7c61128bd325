#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "hinftrack/error.hpp"
#include "hinftrack/simd.hpp"

namespace hinftrack::simd {
namespace {

struct KernelTable {
  Backend backend;
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  void (*gemm)(const double*, const double*, double*, std::size_t, std::size_t, std::size_t);
};

constexpr KernelTable kScalarTable{Backend::kScalar, &scalar::dot, &scalar::axpy, &scalar::scale,
                                   &scalar::gemm};
constexpr KernelTable kAvx2Table{Backend::kAvx2, &avx2::dot, &avx2::axpy, &avx2::scale,
                                 &avx2::gemm};

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("HINFTRACK_SIMD")) {
    const std::string v(env);
    if (v == "scalar") return &kScalarTable;
    if (v == "avx2" && backend_available(Backend::kAvx2)) return &kAvx2Table;
  }
  return backend_available(Backend::kAvx2) ? &kAvx2Table : &kScalarTable;
}

std::atomic<const KernelTable*>& table_slot() {
  static std::atomic<const KernelTable*> slot{initial_table()};
  return slot;
}

const KernelTable& table() { return *table_slot().load(std::memory_order_acquire); }

void require_size(std::size_t got, std::size_t want, const char* what) {
  if (got < want) throw DimensionError(std::string("simd::") + what + ": buffer too small");
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool backend_available(Backend b) {
  if (b == Backend::kScalar) return true;
  static const bool avx2_ok = avx2::compiled() && cpu_has_avx2();
  return avx2_ok;
}

Backend active_backend() { return table().backend; }

void set_backend(Backend b) {
  if (!backend_available(b)) {
    throw std::invalid_argument("SIMD backend not available: " + std::string(backend_name(b)));
  }
  table_slot().store(b == Backend::kAvx2 ? &kAvx2Table : &kScalarTable,
                     std::memory_order_release);
}

double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("simd::dot: length mismatch");
  return table().dot(x.data(), y.data(), x.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError("simd::axpy: length mismatch");
  table().axpy(alpha, x.data(), y.data(), x.size());
}

void scale(double alpha, std::span<double> x) { table().scale(alpha, x.data(), x.size()); }

void gemm(std::span<const double> a, std::span<const double> b, std::span<double> c,
          std::size_t m, std::size_t k, std::size_t n) {
  require_size(a.size(), m * k, "gemm(a)");
  require_size(b.size(), k * n, "gemm(b)");
  require_size(c.size(), m * n, "gemm(c)");
  if (m == 0 || n == 0) return;
  table().gemm(a.data(), b.data(), c.data(), m, k, n);
}

}  // namespace hinftrack::simd
