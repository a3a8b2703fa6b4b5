#include "grw/marbles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "grw/kernels/kernels.hpp"
#include "grw/kernels/philox.hpp"
#include "grw/qmath.hpp"

namespace grw::marbles {

namespace qm = grw::qmath;

MarbleAmplitudes MarbleAmplitudes::from_b2(const LogProb& b2) {
  if (b2.is_one())
    throw std::domain_error("MarbleAmplitudes: b2 = 1 leaves no in-box weight");
  MarbleAmplitudes m;
  m.b2 = b2;
  m.a2 = qm::one_minus(b2);
  return m;
}

MarbleAmplitudes MarbleAmplitudes::from_b2_log10(const ExtReal& log10_b2) {
  return from_b2(LogProb::from_log10(log10_b2));
}

void GrwParameters::validate() const {
  if (!(lambda_per_nucleon > 0.0) || !(nucleons_per_marble > 0.0) ||
      !(localization_width > 0.0))
    throw std::domain_error("GrwParameters: all parameters must be positive");
}

namespace {

// ExtReal round trips leave integers a few ulps off; snap within tolerance.
bool near_integer(double v, double& snapped) {
  snapped = std::round(v);
  return std::fabs(v - snapped) <= 1e-9 * std::max(1.0, std::fabs(v));
}

}  // namespace

void EnsembleSpec::validate() const {
  grw.validate();
  static const ExtReal kHalf = ExtReal::from_double(0.5);
  if (n < kHalf)
    throw std::domain_error("EnsembleSpec: need at least one marble");
  static const ExtReal kIntLimit = ExtReal::from_double(9.007199254740992e15);
  if (n <= kIntLimit) {
    double snapped;
    if (!near_integer(n.to_double(), snapped) || snapped < 1.0)
      throw std::domain_error("EnsembleSpec: marble count must be integral");
  }
}

std::uint64_t EnsembleSpec::mc_count() const {
  validate();
  double nd = n.to_double();
  if (!(nd <= static_cast<double>(kMonteCarloCap)))
    throw std::domain_error(
        "EnsembleSpec: Monte Carlo is capped at 1e7 marbles; use the analytic "
        "operations for larger ensembles");
  double snapped;
  near_integer(nd, snapped);
  return static_cast<std::uint64_t>(snapped);
}

// ----------------------------------------------------------- analytic ops ---

LogProb branch_class_weight(const EnsembleSpec& spec, const ExtReal& k) {
  spec.validate();
  if (k.sign() < 0 || k > spec.n)
    throw std::domain_error("branch_class_weight: k outside [0, n]");
  const LogProb& a2 = spec.amplitudes.a2;
  const LogProb& b2 = spec.amplitudes.b2;
  if (k == spec.n) return qm::pow(a2, spec.n);  // C(n,n) = 1, exact
  if (k.is_zero()) return qm::pow(b2, spec.n);
  if (b2.is_zero()) return LogProb::zero();  // tail-free: only k = n survives

  static const ExtReal kIntLimit = ExtReal::from_double(9.007199254740992e15);
  double kd;
  if (!near_integer(k.to_double(), kd))
    throw std::domain_error("branch_class_weight: k must be integral");

  ExtReal log_c;
  if (spec.n <= kIntLimit) {
    log_c = ExtReal::from_double(qm::log10_binomial(spec.n.to_double(), kd));
  } else {
    // beyond 2^53 only classes near the edges are addressable; C(n,k) for
    // k << n via k*log10(n) - log10(k!) - k(k-1)/(2n)/ln10
    if (kd > 1e6)
      throw std::domain_error(
          "branch_class_weight: for n beyond 2^53 only k <= 1e6 (or k = n) "
          "classes are addressable");
    double nd = spec.n.to_double();  // may saturate to inf; corrections -> 0
    double corr = std::isinf(nd) ? 0.0 : kd * (kd - 1.0) / (2.0 * nd);
    log_c = k * log10_of(spec.n) +
            ExtReal::from_double(-std::lgamma(kd + 1.0) * qm::kLog10E -
                                 corr * qm::kLog10E);
  }
  ExtReal log_w = log_c + k * a2.log10() + (spec.n - k) * b2.log10();
  return LogProb::from_log10(log_w);
}

LogProb branch_class_weight(const EnsembleSpec& spec, double k) {
  return branch_class_weight(spec, ExtReal::from_double(k));
}

LogProb prob_all_in(const EnsembleSpec& spec) {
  spec.validate();
  return qm::pow(spec.amplitudes.a2, spec.n);
}

LogProb prob_not_all_in(const EnsembleSpec& spec) {
  spec.validate();
  return qm::complement_power(spec.amplitudes.b2, spec.n);
}

ExtReal anomaly_threshold_n(const LogProb& tau, const LogProb& b2) {
  if (tau.is_zero() || tau.is_one())
    throw std::domain_error("anomaly_threshold_n: tau must lie in (0,1)");
  if (b2.is_zero() || b2.is_one())
    throw std::domain_error("anomaly_threshold_n: b2 must lie in (0,1)");
  // n = ln(1-tau)/ln(1-b2); the ratio of log10s equals the ratio of lns
  return qm::one_minus(tau).log10() / qm::one_minus(b2).log10();
}

LogProb max_tau_for_n(const ExtReal& n, const LogProb& b2) {
  if (n < ExtReal::from_double(1.0))
    throw std::domain_error("max_tau_for_n: n must be >= 1");
  return qm::complement_power(b2, n);
}

// -------------------------------------------------------------- Monte Carlo ---

namespace {

struct McScratch {
  std::vector<double> u_time, u_branch, times;
  explicit McScratch(std::size_t block) : u_time(block), u_branch(block), times(block) {}
};

constexpr std::size_t kBlock = 8192;

// Linear out-branch threshold. Equivalent to the log-domain comparison
// log10(u) < log10(b2): tails below the generator's 2^-53 resolution give a
// threshold of 0 and can never fire (u is always > 0).
double out_threshold(const LogProb& b2) {
  if (b2.is_zero()) return 0.0;
  return b2.to_linear();
}

struct TrajectorySummary {
  double max_time = 0.0;
  std::uint64_t k_in = 0;
  std::uint64_t resolved = 0;
};

TrajectorySummary run_summary(std::uint64_t n, double rate, double p_out,
                              double t_max, std::uint64_t seed,
                              std::uint64_t traj, McScratch& scratch) {
  const auto& tbl = kernels::table();
  TrajectorySummary s;
  for (std::uint64_t first = 0; first < n; first += kBlock) {
    std::size_t count = static_cast<std::size_t>(
        std::min<std::uint64_t>(kBlock, n - first));
    tbl.fill_uniform_pairs(seed, traj, first, count, scratch.u_time.data(),
                           scratch.u_branch.data());
    tbl.exp_transform(scratch.u_time.data(), count, rate, scratch.times.data());
    auto r = tbl.mc_reduce(scratch.times.data(), scratch.u_branch.data(),
                           count, p_out, t_max);
    s.k_in += r.k_in;
    s.resolved += r.resolved;
    s.max_time = std::max(s.max_time, r.max_time);
  }
  return s;
}

// static partition over worker threads; work items are independent streams
void parallel_trajectories(std::uint64_t samples,
                           const std::function<void(std::uint64_t, std::uint64_t,
                                                    McScratch&)>& run_range) {
  unsigned hw = std::thread::hardware_concurrency();
  unsigned workers = std::max(1u, std::min(hw, 8u));
  if (samples < 4 * workers) workers = 1;
  if (workers == 1) {
    McScratch scratch(kBlock);
    run_range(0, samples, scratch);
    return;
  }
  std::vector<std::thread> pool;
  std::uint64_t chunk = (samples + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::uint64_t lo = w * chunk;
    std::uint64_t hi = std::min<std::uint64_t>(samples, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&run_range, lo, hi] {
      McScratch scratch(kBlock);
      run_range(lo, hi, scratch);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

ReductionTrajectory simulate_reduction(const EnsembleSpec& spec,
                                       std::uint64_t seed, double t_max,
                                       std::uint64_t trajectory_index) {
  std::uint64_t n = spec.mc_count();
  if (!(t_max > 0.0))
    throw std::domain_error("simulate_reduction: t_max must be positive");
  double rate = spec.grw.marble_rate();
  double p_out = out_threshold(spec.amplitudes.b2);

  ReductionTrajectory traj;
  traj.hit_times.resize(n);
  traj.outcomes.resize(n);

  const auto& tbl = kernels::table();
  McScratch scratch(kBlock);
  for (std::uint64_t first = 0; first < n; first += kBlock) {
    std::size_t count = static_cast<std::size_t>(
        std::min<std::uint64_t>(kBlock, n - first));
    tbl.fill_uniform_pairs(seed, trajectory_index, first, count,
                           scratch.u_time.data(), scratch.u_branch.data());
    tbl.exp_transform(scratch.u_time.data(), count, rate,
                      traj.hit_times.data() + first);
    for (std::size_t i = 0; i < count; ++i) {
      double t = traj.hit_times[first + i];
      traj.total_reduction_time = std::max(traj.total_reduction_time, t);
      if (t > t_max) {
        traj.outcomes[first + i] = MarbleFate::kUnresolved;
        ++traj.unresolved;
      } else if (scratch.u_branch[i] < p_out) {
        traj.outcomes[first + i] = MarbleFate::kOut;
      } else {
        traj.outcomes[first + i] = MarbleFate::kIn;
        ++traj.final_k_in;
      }
    }
  }
  return traj;
}

BranchOutcome ReductionTrajectory::branch(const EnsembleSpec& spec) const {
  if (unresolved > 0)
    throw std::logic_error(
        "ReductionTrajectory: branch undefined while marbles are unresolved");
  BranchOutcome out;
  out.k_in = static_cast<double>(final_k_in);
  ExtReal k = ExtReal::from_int64(static_cast<std::int64_t>(final_k_in));
  ExtReal n = spec.n;
  const auto& amp = spec.amplitudes;
  LogProb in_part = qm::pow(amp.a2, k);
  LogProb out_part = qm::pow(amp.b2, n - k);
  out.log_weight = in_part * out_part;
  if (outcomes.size() <= 64) {
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i)
      if (outcomes[i] == MarbleFate::kIn) mask |= (1ull << i);
    out.in_mask = mask;
  }
  return out;
}

std::vector<TrajectoryRecord> simulate_batch(const EnsembleSpec& spec,
                                             std::uint64_t samples,
                                             std::uint64_t seed, double t_max) {
  std::uint64_t n = spec.mc_count();
  if (!(t_max > 0.0))
    throw std::domain_error("simulate_batch: t_max must be positive");
  double rate = spec.grw.marble_rate();
  double p_out = out_threshold(spec.amplitudes.b2);
  std::vector<TrajectoryRecord> records(samples);
  parallel_trajectories(
      samples, [&](std::uint64_t lo, std::uint64_t hi, McScratch& scratch) {
        for (std::uint64_t t = lo; t < hi; ++t) {
          auto s = run_summary(n, rate, p_out, t_max, seed, t, scratch);
          records[t] = {s.max_time, s.k_in, n - s.resolved};
        }
      });
  return records;
}

ReductionStats reduction_time_stats(const EnsembleSpec& spec,
                                    std::uint64_t samples, std::uint64_t seed,
                                    double t_max) {
  if (samples < 100)
    throw std::domain_error("reduction_time_stats: need at least 100 samples");
  auto records = simulate_batch(spec, samples, seed, t_max);
  std::vector<double> totals(samples);
  for (std::uint64_t t = 0; t < samples; ++t)
    totals[t] = records[t].total_reduction_time;

  ReductionStats st;
  st.samples = samples;
  double sum = 0.0, comp = 0.0;
  for (double v : totals) {
    double y = v - comp;
    double s = sum + y;
    comp = (s - sum) - y;
    sum = s;
  }
  st.mean = sum / static_cast<double>(samples);
  double var = 0.0;
  for (double v : totals) var += (v - st.mean) * (v - st.mean);
  var /= static_cast<double>(samples - 1);
  st.std_err = std::sqrt(var / static_cast<double>(samples));

  std::vector<double> sorted = totals;
  std::sort(sorted.begin(), sorted.end());
  auto rank = [&](double q) {
    auto idx = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(samples))) - 1;
    return sorted[std::min(idx, sorted.size() - 1)];
  };
  st.q50 = rank(0.50);
  st.q99 = rank(0.99);
  return st;
}

std::vector<std::uint64_t> sample_count_histogram(const EnsembleSpec& spec,
                                                  std::uint64_t samples,
                                                  std::uint64_t seed) {
  std::uint64_t n = spec.mc_count();
  double rate = spec.grw.marble_rate();
  double p_out = out_threshold(spec.amplitudes.b2);
  const double t_max = 1e30;  // resolve everything

  std::vector<std::uint64_t> hist(n + 1, 0);
  std::mutex merge_mu;
  parallel_trajectories(
      samples, [&](std::uint64_t lo, std::uint64_t hi, McScratch& scratch) {
        std::vector<std::uint64_t> local(n + 1, 0);
        for (std::uint64_t t = lo; t < hi; ++t)
          ++local[run_summary(n, rate, p_out, t_max, seed, t, scratch).k_in];
        std::lock_guard<std::mutex> lock(merge_mu);
        for (std::size_t k = 0; k <= n; ++k) hist[k] += local[k];
      });
  return hist;
}

std::vector<LogProb> count_distribution(const EnsembleSpec& spec) {
  spec.validate();
  double nd = spec.n.to_double();
  if (!(nd <= static_cast<double>(kDenseDistributionCap)))
    throw std::domain_error(
        "count_distribution: dense output is capped at n = 1e6; request "
        "specific k values instead");
  double snapped;
  near_integer(nd, snapped);
  auto n = static_cast<std::uint64_t>(snapped);
  std::vector<LogProb> dist(n + 1);

  const LogProb& b2 = spec.amplitudes.b2;
  if (b2.is_zero()) {
    for (std::uint64_t k = 0; k < n; ++k) dist[k] = LogProb::zero();
    dist[n] = LogProb::one();
    return dist;
  }

  const ExtReal la = spec.amplitudes.a2.log10();
  const ExtReal lb = b2.log10();
  double log_c = 0.0, comp = 0.0;  // running log10 C(n,k), Kahan-compensated
  for (std::uint64_t k = 0; k <= n; ++k) {
    if (k == 0) {
      dist[k] = qm::pow(b2, spec.n);
    } else if (k == n) {
      dist[k] = qm::pow(spec.amplitudes.a2, spec.n);
    } else {
      ExtReal lw = ExtReal::from_double(log_c) +
                   ExtReal::from_int64(static_cast<std::int64_t>(k)) * la +
                   ExtReal::from_int64(static_cast<std::int64_t>(n - k)) * lb;
      dist[k] = LogProb::from_log10(lw);
    }
    if (k < n) {
      double term = std::log10(static_cast<double>(n - k) /
                               static_cast<double>(k + 1));
      double y = term - comp;
      double t = log_c + y;
      comp = (t - log_c) - y;
      log_c = t;
    }
  }
  return dist;
}

std::vector<std::pair<double, LogProb>> count_distribution(
    const EnsembleSpec& spec, std::span<const double> ks) {
  std::vector<std::pair<double, LogProb>> out;
  out.reserve(ks.size());
  for (double k : ks)
    out.emplace_back(k, branch_class_weight(spec, ExtReal::from_double(k)));
  return out;
}

std::vector<BranchOutcome> enumerate_branches(const EnsembleSpec& spec) {
  std::uint64_t n = spec.mc_count();
  if (n > 20)
    throw std::domain_error(
        "enumerate_branches: 2^n term enumeration is capped at n = 20");
  const auto& amp = spec.amplitudes;
  std::vector<BranchOutcome> out;
  out.reserve(1ull << n);
  for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
    BranchOutcome b;
    auto k = static_cast<std::uint64_t>(__builtin_popcountll(mask));
    b.k_in = static_cast<double>(k);
    b.in_mask = mask;
    ExtReal ke = ExtReal::from_int64(static_cast<std::int64_t>(k));
    ExtReal me = ExtReal::from_int64(static_cast<std::int64_t>(n - k));
    b.log_weight = qm::pow(amp.a2, ke) * qm::pow(amp.b2, me);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace grw::marbles
