#include <atomic>
#include <cmath>
#include <stdexcept>

#include "grw/kernels/kernels.hpp"
#include "grw/kernels/philox.hpp"
#include "kernels_internal.hpp"

namespace grw::kernels {

double PhiloxStream::normal() {
  // Box-Muller; uniform() never returns 0 so the log is safe
  double u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

bool avx2_available() {
#if defined(GRW_HAVE_AVX2_TU)
  static const bool ok =
      __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return ok;
#else
  return false;
#endif
}

namespace {

const KernelTable* resolve(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return &detail::scalar_table;
    case Backend::kAvx2:
#if defined(GRW_HAVE_AVX2_TU)
      if (avx2_available()) return &detail::avx2_table;
#endif
      throw std::runtime_error("kernels: avx2 backend not available");
    case Backend::kAuto:
      break;
  }
#if defined(GRW_HAVE_AVX2_TU)
  if (avx2_available()) return &detail::avx2_table;
#endif
  return &detail::scalar_table;
}

std::atomic<const KernelTable*> g_active{nullptr};
std::atomic<Backend> g_active_id{Backend::kAuto};

const KernelTable* active_or_init() {
  const KernelTable* t = g_active.load(std::memory_order_acquire);
  if (t) return t;
  const KernelTable* r = resolve(Backend::kAuto);
  g_active.store(r, std::memory_order_release);
  g_active_id.store(avx2_available() ? Backend::kAvx2 : Backend::kScalar,
                    std::memory_order_release);
  return r;
}

}  // namespace

void set_backend(Backend b) {
  const KernelTable* t = resolve(b);
  Backend resolved = b;
  if (b == Backend::kAuto)
    resolved = avx2_available() ? Backend::kAvx2 : Backend::kScalar;
  g_active.store(t, std::memory_order_release);
  g_active_id.store(resolved, std::memory_order_release);
}

Backend active_backend() {
  active_or_init();
  return g_active_id.load(std::memory_order_acquire);
}

const KernelTable& table() { return *active_or_init(); }

const KernelTable& table(Backend b) { return *resolve(b); }

std::string backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kAuto:
      return "auto";
  }
  return "unknown";
}

}  // namespace grw::kernels
