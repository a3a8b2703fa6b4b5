#include <cmath>

#include "grw/kernels/kernels.hpp"
#include "grw/kernels/philox.hpp"
#include "kernels_internal.hpp"

// Scalar reference kernels. These are the semantic ground truth the SIMD
// variants are equivalence-tested against.
namespace grw::kernels::detail {

namespace {

void fill_uniform_pairs_scalar(std::uint64_t seed, std::uint64_t trajectory,
                               std::uint64_t first, std::size_t count,
                               double* u_time, double* u_branch) {
  for (std::size_t i = 0; i < count; ++i) {
    philox_pair(seed, trajectory, first + i, u_time[i], u_branch[i]);
  }
}

void exp_transform_scalar(const double* u, std::size_t n, double rate,
                          double* t) {
  double inv = -1.0 / rate;
  for (std::size_t i = 0; i < n; ++i) t[i] = std::log(u[i]) * inv;
}

McBlockResult mc_reduce_scalar(const double* t, const double* u_branch,
                               std::size_t n, double p_out, double t_max) {
  McBlockResult r;
  for (std::size_t i = 0; i < n; ++i) {
    if (t[i] > r.max_time) r.max_time = t[i];
    if (t[i] <= t_max) {
      ++r.resolved;
      if (u_branch[i] >= p_out) ++r.k_in;
    }
  }
  return r;
}

void cmul_inplace_scalar(std::complex<double>* z, const std::complex<double>* w,
                         std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double a = z[i].real(), b = z[i].imag();
    double c = w[i].real(), d = w[i].imag();
    z[i] = {a * c - b * d, a * d + b * c};
  }
}

void scale_inplace_scalar(std::complex<double>* z, std::size_t n, double s) {
  for (std::size_t i = 0; i < n; ++i) z[i] *= s;
}

double sum_abs2_scalar(const std::complex<double>* z, std::size_t n) {
  // Kahan-compensated: the reference must not be the sloppier side
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = z[i].real() * z[i].real() + z[i].imag() * z[i].imag();
    double y = v - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

Moments abs2_moments_scalar(const std::complex<double>* z, std::size_t n,
                            double x0, double dx) {
  Moments m;
  for (std::size_t i = 0; i < n; ++i) {
    double v = z[i].real() * z[i].real() + z[i].imag() * z[i].imag();
    double x = x0 + dx * static_cast<double>(i);
    m.w0 += v;
    m.w1 += v * x;
    m.w2 += v * x * x;
  }
  return m;
}

double max_abs2_scalar(const std::complex<double>* z, std::size_t n) {
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = z[i].real() * z[i].real() + z[i].imag() * z[i].imag();
    if (v > best) best = v;
  }
  return best;
}

}  // namespace

const KernelTable scalar_table = {
    fill_uniform_pairs_scalar, exp_transform_scalar, mc_reduce_scalar,
    cmul_inplace_scalar,       scale_inplace_scalar, sum_abs2_scalar,
    abs2_moments_scalar,       max_abs2_scalar,
};

}  // namespace grw::kernels::detail
