// Acceptance suite: one line per criterion, nonzero exit on any failure.
// Each criterion carries a wall-clock budget that is enforced, not advisory.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "grw/cli.hpp"
#include "grw/kernels/philox.hpp"
#include "grw/marbles.hpp"
#include "grw/pointer.hpp"
#include "grw/qmath.hpp"
#include "grw/way.hpp"

namespace mb = grw::marbles;
namespace pt = grw::pointer;
namespace wy = grw::way;
namespace qm = grw::qmath;
using grw::ExtReal;
using grw::LogProb;

namespace {

int g_failures = 0;

void criterion(int number, const std::string& label, double budget_seconds,
               const std::function<bool(std::string&)>& body) {
  std::string detail;
  auto t0 = std::chrono::steady_clock::now();
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_seconds) {
    ok = false;
    detail += (detail.empty() ? "" : "; ") + std::string("over budget ") +
              std::to_string(budget_seconds) + " s";
  }
  if (!ok) ++g_failures;
  std::printf("%s criterion %2d [%5.1f s / %5.0f s]: %s%s%s\n",
              ok ? "PASS" : "FAIL", number, secs, budget_seconds,
              label.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
}

double rel_err(double got, double want) {
  if (want == 0.0) return std::fabs(got);
  return std::fabs(got - want) / std::fabs(want);
}

double binom_pmf(int n, int k, double p) {
  double l = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
             std::lgamma(n - k + 1.0) + k * std::log(p) +
             (n - k) * std::log1p(-p);
  return std::exp(l);
}

mb::EnsembleSpec spec_of(double n, double b2) {
  mb::EnsembleSpec s;
  s.n = ExtReal::from_double(n);
  s.amplitudes = mb::MarbleAmplitudes::from_b2(LogProb::from_real(b2));
  return s;
}

pt::GridWavefunction sampled_gaussian(double delta, double center,
                                      const pt::GridSpec& g) {
  std::vector<std::complex<double>> amps(g.points);
  double nf = std::pow(2.0 * M_PI * delta * delta, -0.25);
  for (std::size_t i = 0; i < g.points; ++i) {
    double x = g.x_min + g.dx() * double(i) - center;
    amps[i] = nf * std::exp(-x * x / (4.0 * delta * delta));
  }
  return pt::GridWavefunction::from_samples(std::move(amps), g, true);
}

double l2_distance(const pt::GridWavefunction& a,
                   const pt::GridWavefunction& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    acc += std::norm(a.amplitudes()[i] - b.amplitudes()[i]);
  return std::sqrt(acc * a.dx());
}

// ---------------------------------------------------------------- criteria ---

bool c1_universe_tau(std::string& detail) {
  grw::cli::RunConfig config;
  config.command = grw::cli::Command::kAnomaly;
  config.parameters["n"] = "1e53";
  config.parameters["log10_b2"] = "-1e15";
  auto report = grw::cli::run_anomaly(config);
  double l10 =
      report.json["results"]["max_tau_for_n"]["log10"].get<double>();
  std::ostringstream os;
  os << "log10 tau_max = " << l10 << " vs -1e15+53";
  detail = os.str();
  return std::fabs(l10 - (-1e15 + 53.0)) <= 1.0;
}

bool c2_threshold(std::string& detail) {
  ExtReal n = mb::anomaly_threshold_n(LogProb::from_real(0.5),
                                      LogProb::from_real(0.1));
  // reference: ln(0.5)/ln(0.9) = 6.57881347896058378...
  double got = n.to_double();
  std::ostringstream os;
  os << "n* = " << got;
  detail = os.str();
  return std::fabs(got - 6.5788134789605838) <= 1e-3;
}

bool c3_consistency(std::string& detail) {
  grw::kernels::PhiloxStream rng(20260810, 3);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    double n = std::floor(std::pow(10.0, rng.uniform(0.0, 6.0)));
    double lb2 = rng.uniform(-12.0, std::log10(0.5));
    mb::EnsembleSpec s;
    s.n = ExtReal::from_double(std::max(1.0, n));
    s.amplitudes =
        mb::MarbleAmplitudes::from_b2_log10(ExtReal::from_double(lb2));
    double sum = mb::prob_all_in(s).to_linear() +
                 mb::prob_not_all_in(s).to_linear();
    worst = std::max(worst, std::fabs(sum - 1.0));
  }
  std::ostringstream os;
  os << "worst |P(=n)+P(!=n)-1| = " << worst << " over 1000 pairs";
  detail = os.str();
  return worst < 1e-12;
}

bool c4_brute_force(std::string& detail) {
  double worst = 0.0;
  for (int n = 1; n <= 12; ++n) {
    double b2 = 0.23;
    double a2 = 1.0 - b2;
    auto spec = spec_of(n, b2);
    std::vector<double> clsw(n + 1, 0.0);
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
      double w = 1.0;
      int k = 0;
      for (int i = 0; i < n; ++i) {
        if (mask & (1u << i)) {
          w *= a2;
          ++k;
        } else {
          w *= b2;
        }
      }
      clsw[k] += w;
    }
    for (int k = 0; k <= n; ++k) {
      worst = std::max(worst,
                       rel_err(mb::branch_class_weight(spec, double(k)).to_linear(),
                               clsw[k]));
    }
  }
  std::ostringstream os;
  os << "worst relative deviation vs 2^n expansion = " << worst;
  detail = os.str();
  return worst < 1e-12;
}

bool c5_monte_carlo(std::string& detail) {
  // total-variation against Binomial(20, 0.7) at 1e6 trajectories
  auto spec20 = spec_of(20, 0.3);
  auto hist = mb::sample_count_histogram(spec20, 1000000, 11);
  double tv = 0.0;
  for (int k = 0; k <= 20; ++k)
    tv += std::fabs(double(hist[k]) / 1e6 - binom_pmf(20, k, 0.7));
  tv *= 0.5;

  // mean reduction time for n = 10 at rate 1e8: H_10/1e8
  auto spec10 = spec_of(10, 0.1);
  auto st = mb::reduction_time_stats(spec10, 300000, 51);
  double want = 2.928968253968254e-8;
  bool mean_ok = std::fabs(st.mean - want) <= 3.0 * st.std_err;

  // n = 1e5 marbles: the sub-perception reduction timescale
  auto spec5 = spec_of(1e5, 0.1);
  auto st5 = mb::reduction_time_stats(spec5, 2000, 52);
  bool scale_ok = st5.mean > 1e-7 && st5.mean < 1e-6;

  std::ostringstream os;
  os << "TV = " << tv << "; mean(n=10) = " << st.mean << " (H10/rate "
     << want << ", 3se " << 3.0 * st.std_err << "); mean(n=1e5) = "
     << st5.mean;
  detail = os.str();
  return tv < 0.005 && mean_ok && scale_ok;
}

bool c6_translation(std::string& detail) {
  pt::GridSpec g;
  g.x_min = -64.0;
  g.x_max = 64.0;
  g.points = 8192;
  grw::kernels::PhiloxStream rng(606, 1);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    double delta = rng.uniform(0.5, 2.0);
    double gamma = rng.uniform(0.2, 3.0);
    double omega = rng.uniform(-4.0, 4.0);
    double T = rng.uniform(0.1, 3.0);
    if (std::fabs(gamma * omega * T) > 30.0) {
      omega = 30.0 / (gamma * T) * (omega < 0 ? -1.0 : 1.0) * 0.9;
    }
    auto psi = pt::gaussian_pointer(delta, 0.0, g);
    pt::MeasurementCoupling c{gamma, 0.0, omega, T};
    auto moved = (omega == 0.0)
                     ? psi
                     : pt::evolve_measurement(psi, c, omega);
    auto want = sampled_gaussian(delta, gamma * omega * T, g);
    worst = std::max(worst, l2_distance(moved, want));
  }
  std::ostringstream os;
  os << "worst L2 error vs analytic shift = " << worst << " over 20 tuples";
  detail = os.str();
  return worst < 1e-8;
}

bool c7_tail_law(std::string& detail) {
  pt::GridSpec g;
  g.x_min = -60.0;
  g.x_max = 60.0;
  g.points = 500000;
  auto psi = pt::gaussian_pointer(1.0, 0.0, g);
  struct Case {
    double D;
    double log10_ref;  // log10 erfc(D/sqrt(2))
  };
  const Case cases[] = {
      {1.0, -0.49851554582798930},
      {2.0, -1.3419860844769559},
      {5.0, -6.2416156767266733},
      {10.0, -22.817023409822095},
  };
  double worst = 0.0;
  for (const auto& cs : cases) {
    auto td = pt::tail_decompose(psi, cs.D);
    double got = td.N_out.log10().to_double();
    worst = std::max(worst, rel_err(std::pow(10.0, got - cs.log10_ref), 1.0));
  }
  // strict positivity through the log path down to D = 50 delta
  bool positive = true;
  for (double D : {20.0, 30.0, 40.0, 50.0}) {
    auto td = pt::tail_decompose(psi, D);
    positive = positive && !td.N_out.is_zero() && td.N_out.log10().sign() < 0;
  }
  auto td50 = pt::tail_decompose(psi, 50.0);
  double l50 = td50.N_out.log10().to_double();
  std::ostringstream os;
  os << "worst rel error vs erfc = " << worst
     << "; log10 N_out(50 delta) = " << l50;
  detail = os.str();
  return worst < 1e-6 && positive && std::fabs(l50 - (-544.66530586633267)) < 1.0;
}

bool c8_orthogonality(std::string& detail) {
  // the coupling translates exactly, so outcome states are translated ready
  // states; overlap exp(-d^2/(8 delta^2))
  pt::GridSpec g;
  g.x_min = -48.0;
  g.x_max = 48.0;
  g.points = 8192;
  double worst = 0.0;
  for (double d : {1.0, 4.0, 20.0}) {
    auto b1 = pt::gaussian_pointer(1.0, -d / 2.0, g);
    auto b2 = pt::gaussian_pointer(1.0, d / 2.0, g);
    double got = std::abs(pt::overlap(b1, b2));
    double want = std::exp(-d * d / 8.0);
    worst = std::max(worst, rel_err(got, want));
  }
  // and the full evolution path agrees where the FFT noise floor permits
  {
    auto psi = pt::gaussian_pointer(1.0, 0.0, g);
    pt::MeasurementCoupling c{1.0, -2.0, 2.0, 1.0};  // d = 4 delta
    auto e1 = pt::evolve_measurement(psi, c, c.omega1);
    auto e2 = pt::evolve_measurement(psi, c, c.omega2);
    worst = std::max(
        worst, rel_err(std::abs(pt::overlap(e1, e2)), std::exp(-2.0)));
  }
  // log-domain closed form at d/delta = 1e3: -125000/ln 10
  pt::MeasurementCoupling ck{1.0, 0.0, 1000.0, 1.0};
  auto rep = pt::distinguishability_report(ck, 1.0);
  double log_rel = rel_err(rep.overlap_log10, -54286.810237906478);
  std::ostringstream os;
  os << "worst overlap rel error = " << worst
     << "; log10 overlap(d=1e3 delta) rel error = " << log_rel;
  detail = os.str();
  return worst < 1e-8 && log_rel < 1e-6;
}

bool c9_spreading(std::string& detail) {
  pt::GridSpec g;
  g.x_min = -420.0;
  g.x_max = 420.0;
  g.points = 1 << 13;
  auto psi = pt::gaussian_pointer(1.0, 0.0, g);
  double worst = 0.0;
  for (int k = 1; k <= 10; ++k) {
    double target = std::pow(2.0, k);
    double t = 2.0 * std::sqrt(target - 1.0);
    auto ev = pt::evolve_free(psi, t);
    worst = std::max(worst, rel_err(ev.position_variance(), target));
  }

  // clipped Gaussian: support leakage strictly positive for every t > 0
  pt::GridSpec gc;
  gc.x_min = -16.0;
  gc.x_max = 16.0;
  gc.points = 2048;
  auto full = pt::gaussian_pointer(1.0, 0.0, gc);
  std::vector<std::complex<double>> amps = full.amplitudes();
  double margin = 5.0 - 0.6 * full.dx();
  for (std::size_t i = 0; i < amps.size(); ++i)
    if (std::fabs(full.x_at(i)) > margin) amps[i] = 0.0;
  auto clipped = pt::GridWavefunction::from_samples(std::move(amps), gc, true);
  bool leak_ok = pt::tail_decompose(clipped, 5.0).N_out.is_zero();
  double min_log10 = 0.0;
  for (double t : {1e-6, 1e-4, 1e-2}) {
    auto tails = pt::tail_decompose(pt::evolve_free(clipped, t), 5.0);
    bool pos = !tails.N_out.is_zero() && tails.N_out.log10().sign() < 0;
    leak_ok = leak_ok && pos;
    if (pos) min_log10 = std::min(min_log10, tails.N_out.log10().to_double());
  }
  std::ostringstream os;
  os << "worst variance rel error over 10 doublings = " << worst
     << "; clipped leakage positive at 3 times (smallest log10 = "
     << min_log10 << ")";
  detail = os.str();
  return worst < 1e-6 && leak_ok;
}

bool c10_chain_and_search(std::string& detail) {
  // constructed exactly conserving ideal model (nonzero chain ends)
  wy::WAYModel m;
  m.M = wy::spin_z(0.5);
  m.Gamma_S = wy::spin_x(0.5);
  m.Gamma_A = wy::random_hermitian(4, 7, 1);
  m.U = wy::kron(wy::Cmat::Identity(2, 2), wy::unitary_exp_i(m.Gamma_A));
  m.ready = wy::Cvec::Zero(4);
  m.ready(0) = 1.0;
  double worst_chain = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      auto r = wy::chain_identity_residual(m, a, b);
      if (!r.preconditions_met) {
        detail = "constructed model failed its own preconditions";
        return false;
      }
      worst_chain = std::max(worst_chain, r.residual);
    }

  // randomized search for a counterexample to the obstruction; every tenth
  // model is a basis-rotated controlled shift, which passes all three gates
  // (so the search is exercised on gate-passing models, not only near-misses)
  int passed_gates = 0;
  int counterexamples = 0;
  const int trials = 10000;
  for (int trial = 0; trial < trials; ++trial) {
    int ds = 2 + (trial % 2);
    int da = 2 + (trial % 5);
    wy::WAYModel r;
    if (trial % 10 == 0) {
      // conserving, ideal, orthogonal by construction: M = Gamma_S diagonal,
      // apparatus shifted cyclically, conjugated by a random product basis
      int n = 3 + (trial / 10) % 6;
      wy::Cmat mdiag = wy::Cmat::Zero(2, 2);
      mdiag(0, 0) = 0.5;
      mdiag(1, 1) = -0.5;
      wy::Cmat shift = wy::Cmat::Zero(n, n);
      for (int a = 0; a < n; ++a) shift((a + 1) % n, a) = 1.0;
      wy::Cmat momentum = wy::Cmat::Zero(n, n);
      {
        wy::Cmat f(n, n);
        for (int a = 0; a < n; ++a)
          for (int k = 0; k < n; ++k)
            f(a, k) = std::polar(1.0 / std::sqrt(double(n)),
                                 2.0 * M_PI * a * k / double(n));
        wy::Cvec diag(n);
        for (int k = 0; k < n; ++k) diag(k) = double(k);
        momentum = f * diag.asDiagonal() * f.adjoint();
      }
      wy::Cmat u = wy::Cmat::Zero(2 * n, 2 * n);
      u.block(0, 0, n, n) = wy::Cmat::Identity(n, n);
      u.block(n, n, n, n) = shift;
      wy::Cmat ws = wy::unitary_exp_i(wy::random_hermitian(2, 31, trial));
      wy::Cmat wa = wy::unitary_exp_i(wy::random_hermitian(n, 37, trial));
      wy::Cmat w = wy::kron(ws, wa);
      r.M = ws * mdiag * ws.adjoint();
      r.Gamma_S = r.M;
      r.Gamma_A = wa * momentum * wa.adjoint();
      r.U = w * u * w.adjoint();
      wy::Cvec ready = wy::Cvec::Zero(n);
      ready(trial % n) = 1.0;
      r.ready = wa * ready;
    } else {
      r.M = wy::random_hermitian(ds, 23, 3 * trial);
      r.Gamma_S = wy::random_hermitian(ds, 23, 3 * trial + 1);
      r.Gamma_A = wy::random_hermitian(da, 23, 3 * trial + 2);
      wy::Cmat gamma0 = r.gamma_total();
      r.U = wy::unitary_exp_i(wy::random_commutant_hermitian(gamma0, 29, trial));
      wy::Cvec ready = wy::Cvec::Zero(da);
      ready(trial % da) = 1.0;
      r.ready = ready;
    }
    wy::Cmat gamma = r.gamma_total();
    if (wy::conservation_residual(r.U, gamma) > 1e-9) continue;
    std::vector<wy::OutcomeState> outs;
    try {
      outs = wy::outcome_states(r);
    } catch (const std::domain_error&) {
      continue;
    }
    double min_fid = 1.0;
    for (const auto& o : outs) min_fid = std::min(min_fid, o.fidelity);
    if (min_fid < 1.0 - 1e-9) continue;
    double max_ovl = 0.0;
    for (std::size_t x = 0; x < outs.size(); ++x)
      for (std::size_t y = x + 1; y < outs.size(); ++y)
        max_ovl = std::max(max_ovl, std::abs(outs[x].apparatus_state.dot(
                                        outs[y].apparatus_state)));
    if (max_ovl > 1e-9) continue;
    ++passed_gates;
    if (wy::commutator_obstruction(r.M, r.Gamma_S) > 1e-6) ++counterexamples;
  }
  std::ostringstream os;
  os << "worst chain residual = " << worst_chain << "; search: " << trials
     << " models, " << passed_gates << " passed all gates, "
     << counterexamples << " counterexamples";
  detail = os.str();
  return worst_chain < 1e-9 && counterexamples == 0;
}

bool c11_sweep(std::string& detail) {
  std::vector<double> js;
  for (int k = 1; k <= 25; ++k) js.push_back(0.5 * k);
  auto rows = wy::nonideality_sweep(js, {});
  bool positive = true, monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    positive = positive && rows[i].epsilon > 0.0;
    if (i > 0)
      monotone = monotone && rows[i].epsilon <= rows[i - 1].epsilon + 1e-9;
  }
  std::ostringstream os;
  os << "eps(1/2) = " << rows.front().epsilon << " ... eps(25/2) = "
     << rows.back().epsilon << (positive ? "; all positive" : "; ZERO FOUND")
     << (monotone ? ", nonincreasing" : ", NON-MONOTONE");
  detail = os.str();
  return positive && monotone;
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion(1, "universe-scale max tau (n = 1e53, log10 b2 = -1e15)", 1.0,
            c1_universe_tau);
  criterion(2, "threshold n*(tau = 0.5, b2 = 0.1) vs high-precision reference",
            1.0, c2_threshold);
  criterion(3, "P(=n) + P(!=n) = 1 to 1e-12 over randomized (n, b2)", 10.0,
            c3_consistency);
  criterion(4, "binomial class weights vs 2^n tensor expansion (n <= 12)",
            30.0, c4_brute_force);
  criterion(5, "hit-process statistics: binomial outcomes and reduction times",
            120.0, c5_monte_carlo);
  criterion(6, "spectral coupling evolution equals the analytic translation",
            10.0, c6_translation);
  criterion(7, "tail weights follow erfc(D/(sqrt2 delta)), positive to 50 delta",
            10.0, c7_tail_law);
  criterion(8, "outcome overlap exp(-d^2/(8 delta^2)) incl. log domain", 5.0,
            c8_orthogonality);
  criterion(9, "free spreading variance law; no compact support survives",
            30.0, c9_spreading);
  criterion(10, "five-step identity and randomized obstruction search", 300.0,
            c10_chain_and_search);
  criterion(11, "nonideality sweep positive and nonincreasing, j <= 25/2",
            600.0, c11_sweep);
  if (g_failures == 0)
    std::printf("all 11 criteria passed\n");
  else
    std::printf("%d criteria FAILED\n", g_failures);
  return g_failures;
}
