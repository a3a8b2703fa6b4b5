#include "grw/pointer.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>

#include "grw/kernels/kernels.hpp"
#include "grw/qmath.hpp"

namespace grw::pointer {

namespace {

constexpr double kNormTol = 1e-10;
constexpr double kBoundaryFraction = 1e-12;
constexpr double kSupportFraction = 1e-12;

// FFTW plans are cached per size; creation is serialized (FFTW requirement),
// execution on caller-owned buffers is thread-safe.
class FftCache {
 public:
  static FftCache& instance() {
    static FftCache c;
    return c;
  }

  void forward(std::vector<std::complex<double>>& inout) { run(inout, true); }
  void backward(std::vector<std::complex<double>>& inout) { run(inout, false); }

 private:
  struct Plans {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
  };

  void run(std::vector<std::complex<double>>& inout, bool fwd) {
    Plans plans = get_plans(inout.size());
    auto* data = reinterpret_cast<fftw_complex*>(inout.data());
    fftw_execute_dft(fwd ? plans.fwd : plans.bwd, data, data);
  }

  Plans get_plans(std::size_t n) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(n);
    if (it != cache_.end()) return it->second;
    std::vector<std::complex<double>> dummy(n);
    auto* d = reinterpret_cast<fftw_complex*>(dummy.data());
    Plans p;
    // ESTIMATE keeps planning deterministic run to run; UNALIGNED lets the
    // plan execute on any caller buffer
    p.fwd = fftw_plan_dft_1d(static_cast<int>(n), d, d, FFTW_FORWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.bwd = fftw_plan_dft_1d(static_cast<int>(n), d, d, FFTW_BACKWARD,
                             FFTW_ESTIMATE | FFTW_UNALIGNED);
    cache_[n] = p;
    return p;
  }

  std::mutex mu_;
  std::map<std::size_t, Plans> cache_;
};

double wavenumber(std::size_t j, std::size_t n, double dx) {
  auto jj = static_cast<std::ptrdiff_t>(j);
  auto nn = static_cast<std::ptrdiff_t>(n);
  if (jj > nn / 2) jj -= nn;
  return 2.0 * M_PI * static_cast<double>(jj) /
         (static_cast<double>(n) * dx);
}

void check_boundary(const std::vector<std::complex<double>>& amp,
                    const char* what) {
  double peak = kernels::max_abs2(amp.data(), amp.size());
  double lo = std::norm(amp.front());
  double hi = std::norm(amp.back());
  if (lo > kBoundaryFraction * peak || hi > kBoundaryFraction * peak) {
    std::ostringstream msg;
    msg << what << ": probability density at the grid edge ("
        << std::max(lo, hi) << ") exceeds " << kBoundaryFraction
        << " of the peak (" << peak << "); enlarge the grid";
    throw SupportEscapeError(msg.str());
  }
}

// index range where |psi|^2 > fraction * peak
std::pair<std::size_t, std::size_t> support_extent(
    const std::vector<std::complex<double>>& amp) {
  double cut = kSupportFraction * kernels::max_abs2(amp.data(), amp.size());
  std::size_t lo = 0, hi = amp.size() - 1;
  while (lo < hi && std::norm(amp[lo]) <= cut) ++lo;
  while (hi > lo && std::norm(amp[hi]) <= cut) --hi;
  return {lo, hi};
}

GridWavefunction spectral_phase_evolution(
    const GridWavefunction& psi,
    const std::function<double(double)>& phase_of_k, const char* what) {
  std::size_t n = psi.size();
  std::vector<std::complex<double>> work = psi.amplitudes();
  FftCache::instance().forward(work);
  std::vector<std::complex<double>> table(n);
  for (std::size_t j = 0; j < n; ++j) {
    double th = phase_of_k(wavenumber(j, n, psi.dx()));
    table[j] = {std::cos(th), std::sin(th)};
  }
  kernels::cmul_inplace(work.data(), table.data(), n);
  FftCache::instance().backward(work);
  kernels::scale_inplace(work.data(), n, 1.0 / static_cast<double>(n));
  GridSpec g = psi.grid();
  GridWavefunction out = GridWavefunction::from_samples(std::move(work), g);
  check_boundary(out.amplitudes(), what);
  return out;
}

}  // namespace

GridSpec GridWavefunction::grid() const {
  GridSpec g;
  g.x_min = x_min_;
  g.x_max = x_min_ + dx_ * static_cast<double>(amp_.size());
  g.points = amp_.size();
  g.mass = mass_;
  g.hbar = hbar_;
  return g;
}

GridWavefunction GridWavefunction::from_samples(
    std::vector<std::complex<double>> amps, const GridSpec& grid,
    bool renormalize, bool enforce_boundary) {
  if (grid.points == 0 || amps.size() != grid.points)
    throw std::invalid_argument("GridWavefunction: sample count mismatch");
  if (!(grid.x_max > grid.x_min))
    throw std::invalid_argument("GridWavefunction: empty spatial extent");
  if (!(grid.mass > 0.0) || !(grid.hbar > 0.0))
    throw std::invalid_argument("GridWavefunction: mass and hbar must be > 0");
  GridWavefunction w;
  w.x_min_ = grid.x_min;
  w.dx_ = grid.dx();
  w.mass_ = grid.mass;
  w.hbar_ = grid.hbar;
  w.amp_ = std::move(amps);
  double nrm = kernels::sum_abs2(w.amp_.data(), w.amp_.size()) * w.dx_;
  if (renormalize) {
    if (!(nrm > 0.0))
      throw std::invalid_argument("GridWavefunction: zero norm");
    kernels::scale_inplace(w.amp_.data(), w.amp_.size(), 1.0 / std::sqrt(nrm));
  } else if (std::fabs(nrm - 1.0) > kNormTol) {
    std::ostringstream msg;
    msg << "GridWavefunction: norm " << nrm << " violates |norm-1| <= "
        << kNormTol;
    throw std::invalid_argument(msg.str());
  }
  if (enforce_boundary) check_boundary(w.amp_, "GridWavefunction");
  return w;
}

double GridWavefunction::norm() const {
  return kernels::sum_abs2(amp_.data(), amp_.size()) * dx_;
}

double GridWavefunction::position_mean() const {
  auto m = kernels::abs2_moments(amp_.data(), amp_.size(), x_min_, dx_);
  return m.w1 / m.w0;
}

double GridWavefunction::position_variance() const {
  auto m = kernels::abs2_moments(amp_.data(), amp_.size(), x_min_, dx_);
  double mean = m.w1 / m.w0;
  return m.w2 / m.w0 - mean * mean;
}

double GridWavefunction::peak_density() const {
  return kernels::max_abs2(amp_.data(), amp_.size());
}

void MeasurementCoupling::validate() const {
  if (!(T > 0.0))
    throw std::domain_error("MeasurementCoupling: T must be positive");
  if (omega1 == omega2)
    throw std::domain_error(
        "MeasurementCoupling: omega1 = omega2 cannot distinguish outcomes");
}

GridWavefunction gaussian_pointer(double delta, double center,
                                  const GridSpec& grid) {
  if (!(delta > 0.0)) throw std::domain_error("gaussian_pointer: delta <= 0");
  if (grid.x_min > center - 12.0 * delta || grid.x_max < center + 12.0 * delta)
    throw std::domain_error(
        "gaussian_pointer: grid must span center +- 12 delta");
  double dx = grid.dx();
  if (dx > delta / 4.0)
    throw std::domain_error(
        "gaussian_pointer: grid resolution too coarse (need dx <= delta/4)");
  std::vector<std::complex<double>> amps(grid.points);
  double norm_factor = std::pow(2.0 * M_PI * delta * delta, -0.25);
  for (std::size_t i = 0; i < grid.points; ++i) {
    double x = grid.x_min + dx * static_cast<double>(i) - center;
    amps[i] = norm_factor * std::exp(-x * x / (4.0 * delta * delta));
  }
  // discrete renormalization; the correction is ~1e-16 for dx <= delta/4
  return GridWavefunction::from_samples(std::move(amps), grid, true);
}

GridWavefunction evolve_measurement(const GridWavefunction& psi,
                                    const MeasurementCoupling& coupling,
                                    double omega) {
  coupling.validate();
  double s = coupling.shift(omega);
  // precheck: translated support must stay inside the grid (a periodic FFT
  // would silently wrap it)
  auto [lo, hi] = support_extent(psi.amplitudes());
  double x_lo = psi.x_at(lo) + std::min(s, 0.0);
  double x_hi = psi.x_at(hi) + std::max(s, 0.0);
  if (x_lo < psi.x_min() || x_hi > psi.x_min() + psi.dx() * double(psi.size())) {
    std::ostringstream msg;
    msg << "evolve_measurement: shift " << s
        << " pushes the support outside the grid ["
        << psi.x_min() << ", "
        << psi.x_min() + psi.dx() * double(psi.size()) << ")";
    throw SupportEscapeError(msg.str());
  }
  return spectral_phase_evolution(
      psi, [s](double k) { return -k * s; }, "evolve_measurement");
}

GridWavefunction evolve_free(const GridWavefunction& psi, double t) {
  if (t < 0.0) throw std::domain_error("evolve_free: t must be >= 0");
  if (t == 0.0) return psi;
  double c = psi.hbar() * t / (2.0 * psi.mass());
  try {
    return spectral_phase_evolution(
        psi, [c](double k) { return -c * k * k; }, "evolve_free");
  } catch (const SupportEscapeError&) {
    // suggest the span that keeps the spread state inside
    double sigma_x = std::sqrt(psi.position_variance());
    double span_now = psi.dx() * static_cast<double>(psi.size());
    double sigma_t = std::sqrt(sigma_x * sigma_x +
                               std::pow(psi.hbar() * t / psi.mass(), 2) /
                                   (4.0 * sigma_x * sigma_x));
    std::ostringstream msg;
    msg << "evolve_free: spread state reached the grid edge; enlarge the span "
        << "from " << span_now << " to at least " << 24.0 * sigma_t;
    throw SupportEscapeError(msg.str());
  }
}

std::vector<MeasurementBranch> evolve_superposition(
    const GridWavefunction& psi0, const MeasurementCoupling& coupling,
    std::complex<double> c1, std::complex<double> c2) {
  double total = std::norm(c1) + std::norm(c2);
  if (std::fabs(total - 1.0) > 1e-10)
    throw std::domain_error(
        "evolve_superposition: |c1|^2 + |c2|^2 must equal 1");
  std::vector<MeasurementBranch> out;
  out.push_back({1, c1, evolve_measurement(psi0, coupling, coupling.omega1)});
  out.push_back({2, c2, evolve_measurement(psi0, coupling, coupling.omega2)});
  return out;
}

TailDecomposition tail_decompose(const GridWavefunction& psi, double D) {
  if (!(D > 0.0)) throw std::domain_error("tail_decompose: D must be > 0");
  double x_lo = psi.x_min();
  double x_hi = psi.x_min() + psi.dx() * static_cast<double>(psi.size());
  if (-D < x_lo || D > x_hi)
    throw std::domain_error("tail_decompose: (-D, D) must lie within the grid");

  const auto& amp = psi.amplitudes();
  const double dx = psi.dx();
  TailDecomposition td;
  td.D = D;

  // continuum weights: midpoint quadrature with fractional cut cells.
  // Cells with representable density go through a compensated double sum;
  // only sub-underflow cells (|psi| nonzero but |psi|^2 below double range)
  // take the extended-range path, so deep tails never flush to zero.
  struct TwoTier {
    double sum = 0.0, comp = 0.0;
    ExtReal ext;
    void add_double(double v) {
      double y = v - comp;
      double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    void add_ext(const ExtReal& v) { ext = ext + v; }
    ExtReal total() const { return ExtReal::from_double(sum) + ext; }
  };
  TwoTier in_acc, out_acc;
  ExtReal cell = ExtReal::from_double(dx);
  for (std::size_t i = 0; i < amp.size(); ++i) {
    double x = psi.x_at(i);
    double c_lo = x - 0.5 * dx, c_hi = x + 0.5 * dx;
    // classify whole cells exactly; only genuine cut cells take the
    // cancellation-prone fractional path
    double frac;
    if (c_lo >= -D && c_hi <= D) {
      frac = 1.0;
    } else if (c_hi <= -D || c_lo >= D) {
      frac = 0.0;
    } else {
      double inside = std::min(c_hi, D) - std::max(c_lo, -D);
      frac = std::clamp(inside / dx, 0.0, 1.0);
    }
    double dens = std::norm(amp[i]);
    if (dens >= 1e-280) {
      double v = dens * dx;
      if (frac > 0.0) in_acc.add_double(v * frac);
      if (frac < 1.0) out_acc.add_double(v * (1.0 - frac));
    } else if (amp[i] != std::complex<double>(0.0, 0.0)) {
      ExtReal re = ExtReal::from_double(amp[i].real());
      ExtReal im = ExtReal::from_double(amp[i].imag());
      ExtReal v = (re * re + im * im) * cell;
      if (frac > 0.0) in_acc.add_ext(v * ExtReal::from_double(frac));
      if (frac < 1.0) out_acc.add_ext(v * ExtReal::from_double(1.0 - frac));
    }
  }
  ExtReal in_sum = in_acc.total(), out_sum = out_acc.total();
  td.N_in = in_sum.is_zero() ? LogProb::zero()
                             : LogProb::from_log10(log10_of(in_sum));
  td.N_out = out_sum.is_zero() ? LogProb::zero()
                               : LogProb::from_log10(log10_of(out_sum));

  // sample-indicator split; pieces inherit the phase of psi pointwise
  std::vector<std::complex<double>> in_amp(amp.size()), out_amp(amp.size());
  TwoTier din, dout;
  for (std::size_t i = 0; i < amp.size(); ++i) {
    double x = psi.x_at(i);
    if (x > -D && x < D) {
      in_amp[i] = amp[i];
      din.add_double(std::norm(amp[i]) * dx);
    } else {
      out_amp[i] = amp[i];
      dout.add_double(std::norm(amp[i]) * dx);
    }
  }
  double disc_in = din.sum, disc_out = dout.sum;
  td.disc_in = disc_in;
  td.disc_out = disc_out;
  GridSpec g = psi.grid();
  if (disc_in >= 1e-300)
    td.in_state =
        GridWavefunction::from_samples(std::move(in_amp), g, true, false);
  if (disc_out >= 1e-300)
    td.out_state =
        GridWavefunction::from_samples(std::move(out_amp), g, true, false);
  return td;
}

GridWavefunction TailDecomposition::reconstruct(const GridSpec& grid) const {
  std::vector<std::complex<double>> amps(grid.points, 0.0);
  double si = std::sqrt(disc_in), so = std::sqrt(disc_out);
  if (in_state)
    for (std::size_t i = 0; i < grid.points; ++i)
      amps[i] += si * in_state->amplitudes()[i];
  if (out_state)
    for (std::size_t i = 0; i < grid.points; ++i)
      amps[i] += so * out_state->amplitudes()[i];
  return GridWavefunction::from_samples(std::move(amps), grid, false, false);
}

std::complex<double> overlap(const GridWavefunction& a,
                             const GridWavefunction& b) {
  if (a.size() != b.size() || a.x_min() != b.x_min() || a.dx() != b.dx())
    throw std::invalid_argument("overlap: grids do not match");
  // compensated sums; term order fixed so overlap(a,b) == conj(overlap(b,a))
  double sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0;
  const auto& av = a.amplitudes();
  const auto& bv = b.amplitudes();
  for (std::size_t i = 0; i < av.size(); ++i) {
    double re = av[i].real() * bv[i].real() + av[i].imag() * bv[i].imag();
    double im = av[i].real() * bv[i].imag() - av[i].imag() * bv[i].real();
    double y = re - cr;
    double t = sr + y;
    cr = (t - sr) - y;
    sr = t;
    y = im - ci;
    t = si + y;
    ci = (t - si) - y;
    si = t;
  }
  return {sr * a.dx(), si * a.dx()};
}

DistinguishabilityReport distinguishability_report(
    const MeasurementCoupling& coupling, double delta) {
  if (!(delta > 0.0))
    throw std::domain_error("distinguishability_report: delta <= 0");
  DistinguishabilityReport r;
  r.shift = coupling.gamma * (coupling.omega2 - coupling.omega1) * coupling.T;
  r.ratio = r.shift / delta;
  // Gaussian outcome overlap exp(-d^2/(8 delta^2)), reported in log10
  r.overlap_log10 = -(r.shift * r.shift) /
                    (8.0 * delta * delta) * qmath::kLog10E;
  return r;
}

}  // namespace grw::pointer
