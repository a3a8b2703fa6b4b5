#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <string>

// Data-parallel inner loops behind the simulation code: scalar reference
// implementations plus AVX2 variants selected at runtime. Both variants of
// every kernel are equivalence-tested against each other; the integer RNG
// path is bit-identical across backends.
namespace grw::kernels {

enum class Backend { kAuto, kScalar, kAvx2 };

// Resolve and pin the backend used by the free-function kernels below.
// kAuto picks the best available. Throws std::runtime_error if the requested
// backend is not available on this CPU/build.
void set_backend(Backend b);
Backend active_backend();  // never kAuto
bool avx2_available();
std::string backend_name(Backend b);

struct McBlockResult {
  std::uint64_t k_in = 0;
  std::uint64_t resolved = 0;
  double max_time = 0.0;  // max over all hit times in the block
};

struct Moments {
  double w0 = 0.0;  // sum |z|^2
  double w1 = 0.0;  // sum x |z|^2
  double w2 = 0.0;  // sum x^2 |z|^2
};

struct KernelTable {
  // uniforms in (0,1] for marbles [first, first+count): u_time[i], u_branch[i]
  void (*fill_uniform_pairs)(std::uint64_t seed, std::uint64_t trajectory,
                             std::uint64_t first, std::size_t count,
                             double* u_time, double* u_branch);
  // t[i] = -log(u[i]) / rate
  void (*exp_transform)(const double* u, std::size_t n, double rate,
                        double* t);
  // k_in counts resolved (t <= t_max) marbles with u_branch >= p_out;
  // resolved counts t <= t_max; max_time over every t.
  McBlockResult (*mc_reduce)(const double* t, const double* u_branch,
                             std::size_t n, double p_out, double t_max);
  void (*cmul_inplace)(std::complex<double>* z, const std::complex<double>* w,
                       std::size_t n);
  void (*scale_inplace)(std::complex<double>* z, std::size_t n, double s);
  double (*sum_abs2)(const std::complex<double>* z, std::size_t n);
  Moments (*abs2_moments)(const std::complex<double>* z, std::size_t n,
                          double x0, double dx);
  double (*max_abs2)(const std::complex<double>* z, std::size_t n);
};

// active table (follows set_backend)
const KernelTable& table();
// specific backend's table, for equivalence tests
const KernelTable& table(Backend b);

// convenience wrappers through the active table
inline void fill_uniform_pairs(std::uint64_t seed, std::uint64_t trajectory,
                               std::uint64_t first, std::size_t count,
                               double* u_time, double* u_branch) {
  table().fill_uniform_pairs(seed, trajectory, first, count, u_time, u_branch);
}
inline void exp_transform(const double* u, std::size_t n, double rate,
                          double* t) {
  table().exp_transform(u, n, rate, t);
}
inline McBlockResult mc_reduce(const double* t, const double* u_branch,
                               std::size_t n, double p_out, double t_max) {
  return table().mc_reduce(t, u_branch, n, p_out, t_max);
}
inline void cmul_inplace(std::complex<double>* z, const std::complex<double>* w,
                         std::size_t n) {
  table().cmul_inplace(z, w, n);
}
inline void scale_inplace(std::complex<double>* z, std::size_t n, double s) {
  table().scale_inplace(z, n, s);
}
inline double sum_abs2(const std::complex<double>* z, std::size_t n) {
  return table().sum_abs2(z, n);
}
inline Moments abs2_moments(const std::complex<double>* z, std::size_t n,
                            double x0, double dx) {
  return table().abs2_moments(z, n, x0, dx);
}
inline double max_abs2(const std::complex<double>* z, std::size_t n) {
  return table().max_abs2(z, n);
}

}  // namespace grw::kernels
