#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

// Numerical witnesses for the conservation-law obstruction to ideal
// measurements: the five-step operator identity, the commutator witness, and
// the nonideality-vs-apparatus-size trade-off for a spin-1/2 measured against
// a conserved x-component. Spin convention: hbar = 1, S_k = sigma_k / 2.
namespace grw::way {

using Cmat = Eigen::MatrixXcd;
using Cvec = Eigen::VectorXcd;

double hermiticity_residual(const Cmat& a);
double unitarity_residual(const Cmat& u);
double operator_norm(const Cmat& a);  // largest singular value

// system-major tensor product: index = s * dim_a + a
Cmat kron(const Cmat& a, const Cmat& b);

// angular momentum matrices on dimension 2j+1 (basis: descending m_z)
Cmat spin_x(double j);
Cmat spin_y(double j);
Cmat spin_z(double j);

// exp(i H) for Hermitian H, exactly unitary via eigendecomposition
Cmat unitary_exp_i(const Cmat& h);

struct WAYModel {
  Cmat M;        // measured observable on S, Hermitian, nondegenerate
  Cmat Gamma_S;  // system part of the additive conserved quantity
  Cmat Gamma_A;  // apparatus part
  Cmat U;        // interaction unitary on S (x) A
  Cvec ready;    // apparatus ready state |A0|

  Eigen::Index dim_s() const { return M.rows(); }
  Eigen::Index dim_a() const { return Gamma_A.rows(); }
  Cmat gamma_total() const;
  // Hermiticity/unitarity residuals < 1e-12, consistent dimensions,
  // normalized ready state. Throws std::invalid_argument.
  void validate() const;
};

// operator norm of U^dag Gamma U - Gamma; < 1e-12 certifies conservation
double conservation_residual(const Cmat& u, const Cmat& gamma);

struct OutcomeState {
  double eigenvalue = 0.0;
  Cvec apparatus_state;  // normalized projection; zero when degenerate
  double fidelity = 0.0; // squared norm of the projection onto |m> (x) (.)
  bool near_zero_projection = false;  // fidelity <= 1e-12: distorting regime
};

// For each eigenstate |m> of M: project U[|m> (x) |A0>] onto |m> (x) (.).
// Sorted by ascending eigenvalue. Throws on (near-)degenerate M.
std::vector<OutcomeState> outcome_states(const WAYModel& model);

struct ChainResult {
  bool preconditions_met = false;
  double conservation = 0.0;   // residual of U^dag Gamma U = Gamma
  double min_fidelity = 0.0;   // worst outcome fidelity
  std::complex<double> lhs;    // <m'|[Gamma_S, M]|m>
  std::complex<double> rhs;    // (m-m')[<m'|m><A'|Gamma_A|A> + <A'|A><m'|Gamma_S|m>]
  double residual = 0.0;       // |lhs - rhs|
  std::string detail;
};

// The two ends of the five-step identity, evaluated independently for the
// eigenvalue pair (index_m_prime, index_m). When the model is not
// conserving-and-ideal at 1e-9 the identity is not asserted and the result
// reports which precondition failed.
ChainResult chain_identity_residual(const WAYModel& model, int index_m_prime,
                                    int index_m);

// operator norm of [Gamma_S, M]; nonzero rules out ideal measurements with
// orthogonal outcome states
double commutator_obstruction(const Cmat& m, const Cmat& gamma_s);

// random Hermitian with commutant structure: commutes with gamma by
// construction (block Hermitian in gamma's eigenbasis, degenerate clusters
// grouped at tolerance 1e-9)
Cmat random_commutant_hermitian(const Cmat& gamma, std::uint64_t seed,
                                std::uint64_t stream);
Cmat random_hermitian(Eigen::Index dim, std::uint64_t seed,
                      std::uint64_t stream);

struct SweepRow {
  double j = 0.0;
  int dim_a = 0;
  double gamma2_mean = 0.0;    // <A0| Gamma_A^2 |A0>
  double epsilon = 0.0;        // max(1 - min fidelity, |<A_+|A_->|)
  double min_fidelity = 0.0;
  double outcome_overlap = 0.0;
  std::string optimizer_status;  // "converged" / "max_iter" (achieved, not
                                 // proven minimal)
};

struct SweepOptions {
  std::uint64_t seed = 1986;
  int restarts = 20;       // warm start + ansatz starts + random restarts
  int max_evals = 60000;   // Nelder-Mead budget per restart
};

// Apparatus = spin j with Gamma_A = J_x; measured observable S_z of a
// spin-1/2 with Gamma_S = S_x. The interaction family is every unitary
// commuting with the total Gamma (parameterized by its eigenspace blocks,
// restricted to real rotations); the ready state is optimized jointly.
// Each j is warm-started from the embedded previous solution, so epsilon is
// nonincreasing along the sweep by construction.
std::vector<SweepRow> nonideality_sweep(std::span<const double> j_values,
                                        const SweepOptions& options = {});

// The full model realizing a sweep row (for independent verification).
struct SweepSolution {
  SweepRow row;
  WAYModel model;
};
SweepSolution nonideality_best_model(double j, const SweepOptions& options = {});

}  // namespace grw::way
