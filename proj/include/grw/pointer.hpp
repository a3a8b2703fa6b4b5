#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <optional>
#include <vector>

#include "grw/extreal.hpp"
#include "grw/logprob.hpp"

// von Neumann pointer model on a uniform 1-D grid: Gaussian ready states,
// measurement coupling H = -gamma*Omega*P acting as exact translation, free
// spreading, and in/out tail splitting over an interval. Values are immutable
// after construction; operations return new wavefunctions.
namespace grw::pointer {

struct GridSpec {
  double x_min = 0.0;
  double x_max = 0.0;
  std::size_t points = 0;
  double mass = 1.0;  // no default unit system; 1.0 = dimensionless convention
  double hbar = 1.0;

  double dx() const { return (x_max - x_min) / static_cast<double>(points); }
};

class GridWavefunction {
 public:
  // Validates normalization (|1 - sum|psi|^2 dx| <= 1e-10 unless renormalize)
  // and the boundary invariant: edge density below 1e-12 of the peak.
  // enforce_boundary = false is for indicator-restricted pieces, which may
  // legitimately touch the grid edge and never feed back into evolution.
  static GridWavefunction from_samples(std::vector<std::complex<double>> amps,
                                       const GridSpec& grid,
                                       bool renormalize = false,
                                       bool enforce_boundary = true);

  const std::vector<std::complex<double>>& amplitudes() const { return amp_; }
  std::size_t size() const { return amp_.size(); }
  double x_min() const { return x_min_; }
  double dx() const { return dx_; }
  double x_at(std::size_t i) const { return x_min_ + dx_ * double(i); }
  double mass() const { return mass_; }
  double hbar() const { return hbar_; }
  GridSpec grid() const;

  double norm() const;               // sum |psi|^2 dx
  double position_mean() const;      // <X>
  double position_variance() const;  // <X^2> - <X>^2
  double peak_density() const;       // max |psi|^2

 private:
  friend class Evolver;
  GridWavefunction() = default;
  std::vector<std::complex<double>> amp_;
  double x_min_ = 0.0, dx_ = 0.0, mass_ = 1.0, hbar_ = 1.0;
};

struct MeasurementCoupling {
  double gamma = 0.0;   // coupling strength (length / (time * eigenvalue))
  double omega1 = 0.0;  // eigenvalue of the measured observable, outcome 1
  double omega2 = 0.0;  // outcome 2
  double T = 0.0;       // interaction window

  void validate() const;  // T > 0; omega1 != omega2 for distinguishability
  double shift(double omega) const { return gamma * omega * T; }
};

struct TailDecomposition {
  double D = 0.0;
  // continuum weights over (-D, D) and its complement (fractional-cell
  // midpoint quadrature, O(dx^2)); always sum to 1 within 1e-10
  LogProb N_in;
  LogProb N_out;
  // sample-indicator pieces, each renormalized by its own discrete norm;
  // absent when the discrete weight is below 1e-300 (degenerate piece)
  std::optional<GridWavefunction> in_state;
  std::optional<GridWavefunction> out_state;
  // discrete split fractions: sqrt(disc_in)*in + sqrt(disc_out)*out == psi
  double disc_in = 0.0;
  double disc_out = 0.0;

  // exact sample-level reconstruction from the pieces
  GridWavefunction reconstruct(const GridSpec& grid) const;
};

struct DistinguishabilityReport {
  double shift = 0.0;          // d = gamma*(omega2-omega1)*T
  double ratio = 0.0;          // d / delta
  double overlap_log10 = 0.0;  // log10 exp(-d^2/(8 delta^2))
};

struct MeasurementBranch {
  int micro_index = 0;  // which eigenstate drove the pointer
  std::complex<double> amplitude;
  GridWavefunction pointer_state;
};

// Ready state: Gaussian of width delta centred at `center`, sampled and
// renormalized on the grid. Errors: grid must span center +- 12 delta and
// resolve dx <= delta/4.
GridWavefunction gaussian_pointer(double delta, double center,
                                  const GridSpec& grid);

// Translation by gamma*omega*T, applied spectrally (the coupling Hamiltonian
// is diagonal in the conjugate domain). Support must stay inside the grid.
GridWavefunction evolve_measurement(const GridWavefunction& psi,
                                    const MeasurementCoupling& coupling,
                                    double omega);

// Free-particle spectral propagation for time t >= 0.
GridWavefunction evolve_free(const GridWavefunction& psi, double t);

// Entangled post-measurement state for a two-branch superposed input:
// one (label, amplitude, shifted pointer) entry per eigenvalue.
std::vector<MeasurementBranch> evolve_superposition(
    const GridWavefunction& psi0, const MeasurementCoupling& coupling,
    std::complex<double> c1, std::complex<double> c2);

// Indicator split over (-D, D). Extended-range accumulation keeps tail
// weights meaningful far below double underflow.
TailDecomposition tail_decompose(const GridWavefunction& psi, double D);

// discrete inner product sum conj(a) b dx; grids must match
std::complex<double> overlap(const GridWavefunction& a,
                             const GridWavefunction& b);

// closed-form outcome distinguishability for a Gaussian ready state
DistinguishabilityReport distinguishability_report(
    const MeasurementCoupling& coupling, double delta);

// thrown when a state (possibly after evolution) reaches the grid edge
struct SupportEscapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace grw::pointer
