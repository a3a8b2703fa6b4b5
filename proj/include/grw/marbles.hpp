#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "grw/extreal.hpp"
#include "grw/logprob.hpp"

// The n-marble box model: weights of the product-state expansion, collapse
// probabilities and thresholds for astronomically large n, and Monte Carlo of
// the spontaneous-localization hit process that picks one branch.
namespace grw::marbles {

// Squared amplitudes of the in-box / out-of-box parts of one marble's state.
// Relative phase carries no weight-level information and is not stored.
struct MarbleAmplitudes {
  LogProb a2;  // in-box weight, = 1 - b2 by construction
  LogProb b2;  // tail weight; exact zero encodes the tail-free limit

  static MarbleAmplitudes from_b2(const LogProb& b2);
  static MarbleAmplitudes from_b2_log10(const ExtReal& log10_b2);
};

// Rates of the spontaneous localization process. Defaults are the standard
// values for a ~1 g marble: 1e-16 /s per nucleon, 1e24 nucleons, 1e-5 cm
// localization width; each is overridable through the CLI/config.
struct GrwParameters {
  double lambda_per_nucleon = 1e-16;  // s^-1
  double nucleons_per_marble = 1e24;
  double localization_width = 1e-5;  // cm

  double marble_rate() const { return lambda_per_nucleon * nucleons_per_marble; }
  void validate() const;  // throws std::domain_error unless all > 0
};

// Post-perception-time tail weight of a 1 cm^3 solid of normal density:
// |b|^2 = exp(-2*10^15). Both the exact e-based log10 and its decade
// rounding are provided; reports carry both.
inline constexpr double kTailLog10Exact = -8.685889638065037e14;  // -2e15/ln10
inline constexpr double kTailLog10Decade = -1e15;

struct EnsembleSpec {
  ExtReal n;  // marble count; analytic operations accept up to ~1e60
  MarbleAmplitudes amplitudes;
  GrwParameters grw;

  void validate() const;  // n >= 1, integral when <= 2^53, params positive
  // integral n for Monte Carlo; throws beyond the 1e7 cap
  std::uint64_t mc_count() const;
};

inline constexpr std::uint64_t kMonteCarloCap = 10'000'000;
inline constexpr std::uint64_t kDenseDistributionCap = 1'000'000;

// One definite term of the product-state expansion.
struct BranchOutcome {
  double k_in = 0;
  LogProb log_weight;  // weight of this single term: (a^2)^k (b^2)^(n-k)
  std::optional<std::uint64_t> in_mask;  // bit i set = marble i inside; n <= 64
};

enum class MarbleFate : std::uint8_t { kOut = 0, kIn = 1, kUnresolved = 2 };

struct ReductionTrajectory {
  std::vector<double> hit_times;       // first-hit time per marble
  std::vector<MarbleFate> outcomes;    // resolved branch, or unresolved at t_max
  double total_reduction_time = 0.0;   // max over per-marble first hits
  std::uint64_t final_k_in = 0;        // marbles resolved inside
  std::uint64_t unresolved = 0;

  // The definite expansion term selected by a fully resolved trajectory;
  // throws std::logic_error while any marble is unresolved.
  BranchOutcome branch(const EnsembleSpec& spec) const;
};

// C(n,k) (a^2)^k (b^2)^(n-k). k = n and k = 0 reduce exactly to the pure
// powers. Requires k (and n, unless k == n or k == 0) below 2^53 so the
// binomial coefficient is well defined in double indexing.
LogProb branch_class_weight(const EnsembleSpec& spec, const ExtReal& k);
LogProb branch_class_weight(const EnsembleSpec& spec, double k);

// (1 - b^2)^n
LogProb prob_all_in(const EnsembleSpec& spec);
// 1 - (1 - b^2)^n
LogProb prob_not_all_in(const EnsembleSpec& spec);

// smallest n with 1 - (1-b^2)^n > tau:  ln(1-tau)/ln(1-b^2)
ExtReal anomaly_threshold_n(const LogProb& tau, const LogProb& b2);

// largest tau for which the not-all-in probability stays below it at size n
LogProb max_tau_for_n(const ExtReal& n, const LogProb& b2);

// Hit process: every marble draws an exponential first-hit time at rate
// lambda*nucleons; the hit resolves its branch (out with probability b^2,
// compared in the log domain so sub-resolution tails can never fire).
// Marbles whose first hit falls beyond t_max stay unresolved. Identical
// (spec, seed) gives bit-identical trajectories.
ReductionTrajectory simulate_reduction(const EnsembleSpec& spec,
                                       std::uint64_t seed, double t_max,
                                       std::uint64_t trajectory_index = 0);

struct TrajectoryRecord {
  double total_reduction_time = 0.0;
  std::uint64_t final_k_in = 0;
  std::uint64_t unresolved = 0;
};

// One summary record per trajectory, indexed by the trajectory's RNG stream;
// ordering is by index so results are independent of scheduling.
std::vector<TrajectoryRecord> simulate_batch(const EnsembleSpec& spec,
                                             std::uint64_t samples,
                                             std::uint64_t seed,
                                             double t_max = 1e30);

struct ReductionStats {
  double mean = 0.0;
  double q50 = 0.0;
  double q99 = 0.0;
  double std_err = 0.0;  // standard error of the mean
  std::uint64_t samples = 0;
};

// Statistics of total_reduction_time over independent trajectories
// (streams indexed by trajectory, so results are scheduling-independent).
ReductionStats reduction_time_stats(const EnsembleSpec& spec,
                                    std::uint64_t samples, std::uint64_t seed,
                                    double t_max = 1e30);

// Histogram of final_k_in over trajectories (index = k). All marbles must
// resolve, so t_max is taken large.
std::vector<std::uint64_t> sample_count_histogram(const EnsembleSpec& spec,
                                                  std::uint64_t samples,
                                                  std::uint64_t seed);

// Dense branch-class distribution, k = 0..n. Guarded at n <= 1e6.
std::vector<LogProb> count_distribution(const EnsembleSpec& spec);
// Specific classes for large n.
std::vector<std::pair<double, LogProb>> count_distribution(
    const EnsembleSpec& spec, std::span<const double> ks);

// Full 2^n expansion, one BranchOutcome per term. Guarded at n <= 20.
std::vector<BranchOutcome> enumerate_branches(const EnsembleSpec& spec);

}  // namespace grw::marbles
