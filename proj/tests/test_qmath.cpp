#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "grw/extreal.hpp"
#include "grw/kernels/philox.hpp"
#include "grw/logprob.hpp"
#include "grw/qmath.hpp"

using grw::ExtReal;
using grw::LogProb;
namespace qm = grw::qmath;

namespace {

double rel_err(double got, double want) {
  if (want == 0.0) return std::fabs(got);
  return std::fabs(got - want) / std::fabs(want);
}

double log10_as_double(const LogProb& p) { return p.log10().to_double(); }

}  // namespace

TEST_CASE("from_real basics") {
  CHECK(LogProb::from_real(1.0).is_one());
  CHECK(LogProb::from_real(0.0).is_zero());
  CHECK(std::fabs(log10_as_double(LogProb::from_real(0.1)) + 1.0) < 1e-15);
  // high-precision reference: log10(0.729) = -0.13727247168202537622983...
  CHECK(rel_err(log10_as_double(LogProb::from_real(0.729)),
                -0.13727247168202538) < 1e-14);
  CHECK_THROWS_AS(LogProb::from_real(-0.1), std::domain_error);
  CHECK_THROWS_AS(LogProb::from_real(1.5), std::domain_error);
}

TEST_CASE("from_log10 validation") {
  CHECK(LogProb::from_log10(0.0).is_one());
  CHECK(LogProb::from_log10(5e-13).is_one());  // rounding debris clamps
  CHECK_THROWS_AS(LogProb::from_log10(1e-6), std::domain_error);
  CHECK_THROWS_AS(LogProb::from_log10(ExtReal::from_parts(1.0, 5)),
                  std::domain_error);
}

TEST_CASE("round trip with ordinary reals") {
  grw::kernels::PhiloxStream rng(7, 0);
  for (int i = 0; i < 2000; ++i) {
    double p = std::pow(10.0, rng.uniform(-299.0, 0.0));
    CHECK(rel_err(LogProb::from_real(p).to_linear(), p) < 1e-12);
  }
}

TEST_CASE("pow") {
  LogProb p9 = LogProb::from_real(0.9);
  CHECK(rel_err(qm::pow(p9, 3.0).to_linear(), 0.729) < 1e-13);

  LogProb tiny = LogProb::from_log10(ExtReal::from_parts(-1.0, 15));
  LogProb r = qm::pow(tiny, ExtReal::parse("1e53"));
  CHECK(r.log10().mantissa() == -1.0);
  CHECK(r.log10().exponent10() == 68);

  CHECK(qm::pow(LogProb::one(), 1e9).is_one());
  CHECK(qm::pow(LogProb::zero(), 2.0).is_zero());
  CHECK(qm::pow(LogProb::zero(), 0.0).is_one());
  CHECK(qm::pow(p9, 0.0).is_one());
  CHECK_THROWS_AS(qm::pow(p9, -1.0), std::domain_error);
}

TEST_CASE("one_minus across regimes") {
  CHECK(qm::one_minus(LogProb::zero()).is_one());
  CHECK(qm::one_minus(LogProb::one()).is_zero());
  CHECK(rel_err(qm::one_minus(LogProb::from_real(0.271)).to_linear(), 0.729) <
        1e-13);
  CHECK(rel_err(qm::one_minus(LogProb::from_real(0.729)).to_linear(), 0.271) <
        1e-13);

  // tiny p: log10(1-p) = -4.3429448190325183e-21 for p = 1e-20
  LogProb r = qm::one_minus(LogProb::from_real(1e-20));
  CHECK(rel_err(r.log10().mantissa(), -4.342944819032518) < 1e-12);
  CHECK(r.log10().exponent10() == -21);

  // p of 10^(-10^15): complement's log10 must stay nonzero
  LogProb vanishing = LogProb::from_log10(ExtReal::from_parts(-1.0, 15));
  LogProb c = qm::one_minus(vanishing);
  CHECK(!c.is_one());
  CHECK(!c.is_zero());
  CHECK(rel_err(c.log10().mantissa(), -4.342944819032518) < 1e-12);
  CHECK(c.log10().exponent10() == -1000000000000001);

  // p extremely close to 1: complement recovered from the log directly
  LogProb near_one = LogProb::from_log10(ExtReal::from_parts(-1.0, -15));
  // 1 - 10^(-1e-15) = 1 - exp(-ln10*1e-15) ~ ln10*1e-15
  CHECK(rel_err(qm::one_minus(near_one).to_linear(), qm::kLn10 * 1e-15) <
        1e-9);
}

TEST_CASE("one_minus is an involution on [1e-10, 1-1e-10]") {
  grw::kernels::PhiloxStream rng(11, 0);
  for (int i = 0; i < 2000; ++i) {
    double p = std::pow(10.0, rng.uniform(-10.0, 0.0));
    if (p > 1.0 - 1e-10) continue;
    double back = qm::one_minus(qm::one_minus(LogProb::from_real(p))).to_linear();
    CHECK(rel_err(back, p) < 1e-9);
  }
}

TEST_CASE("complement_power examples") {
  CHECK(rel_err(qm::complement_power(LogProb::from_real(0.1), 3.0).to_linear(),
                0.271) < 1e-12);
  CHECK(qm::complement_power(LogProb::zero(), 12.0).is_zero());
  CHECK(qm::complement_power(LogProb::from_real(0.3), 0.0).is_zero());

  // the universe-scale case: p = 10^(-1e15), n = 1e53 -> ~ n*p
  LogProb p = LogProb::from_log10(ExtReal::from_parts(-1.0, 15));
  LogProb tau = qm::complement_power(p, ExtReal::parse("1e53"));
  double l10 = tau.log10().to_double();
  CHECK(std::fabs(l10 - (-1e15 + 53)) < 0.5);
}

TEST_CASE("complement identity: cp + (1-p)^n = 1") {
  grw::kernels::PhiloxStream rng(13, 0);
  for (int i = 0; i < 3000; ++i) {
    double p = std::pow(10.0, rng.uniform(-14.0, -0.1));
    double n = std::pow(10.0, rng.uniform(0.0, 8.0));
    LogProb lp = LogProb::from_real(p);
    double a = qm::complement_power(lp, n).to_linear();
    double b = qm::pow(qm::one_minus(lp), n).to_linear();
    if (a > 1e-300 && b > 1e-300) {
      CHECK(std::fabs(a + b - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("complement_power monotone in p and n") {
  grw::kernels::PhiloxStream rng(17, 0);
  for (int i = 0; i < 1000; ++i) {
    double lp1 = rng.uniform(-30.0, -0.5);
    double lp2 = rng.uniform(-30.0, -0.5);
    if (lp1 > lp2) std::swap(lp1, lp2);
    double n1 = std::pow(10.0, rng.uniform(0.0, 10.0));
    double n2 = n1 * (1.0 + rng.uniform());
    LogProb p_small = LogProb::from_log10(lp1);
    LogProb p_big = LogProb::from_log10(lp2);
    CHECK(qm::complement_power(p_small, n1) <= qm::complement_power(p_big, n1));
    CHECK(qm::complement_power(p_small, n1) <= qm::complement_power(p_small, n2));
  }
}

TEST_CASE("pow additivity in the log domain") {
  grw::kernels::PhiloxStream rng(19, 0);
  for (int i = 0; i < 1000; ++i) {
    LogProb p = LogProb::from_log10(rng.uniform(-50.0, -1e-6));
    double a = std::pow(10.0, rng.uniform(0.0, 6.0));
    double b = std::pow(10.0, rng.uniform(0.0, 6.0));
    double lhs = (qm::pow(p, a) * qm::pow(p, b)).log10().to_double();
    double rhs = qm::pow(p, a + b).log10().to_double();
    CHECK(rel_err(lhs, rhs) < 1e-12);
  }
}

TEST_CASE("crossover continuity near n*p = 1e-6") {
  // reference in long double: 1-(1-p)^n = -expm1(n*log1p(-p))
  double p = 1e-9;
  LogProb lp = LogProb::from_real(p);
  for (double n = 800.0; n <= 1300.0; n += 7.0) {
    long double ref = -std::expm1l(static_cast<long double>(n) *
                                   std::log1pl(-static_cast<long double>(p)));
    double got = qm::complement_power(lp, n).to_linear();
    CHECK(rel_err(got, static_cast<double>(ref)) < 1e-6);
  }
}

TEST_CASE("log10_binomial") {
  CHECK(rel_err(qm::log10_binomial(2, 1), std::log10(2.0)) < 1e-15);
  CHECK(qm::log10_binomial(5, 0) == 0.0);
  CHECK(qm::log10_binomial(5, 5) == 0.0);
  // exact path: C(50,25) = 126410606437752
  CHECK(std::fabs(qm::log10_binomial(50, 25) - 14.101783514801882) < 1e-12);
  // summation path, high-precision references
  CHECK(std::fabs(qm::log10_binomial(1e6, 5e5) - 301026.89760393411) < 1e-9);
  CHECK(std::fabs(qm::log10_binomial(1e6, 37) - 178.86097388317130) < 1e-9);
  CHECK(std::fabs(qm::log10_binomial(123456, 789) - 2071.1241409957769) < 1e-9);
  CHECK(std::fabs(qm::log10_binomial(1e8, 12345) - 53609.132064856661) < 1e-8);
  CHECK(std::fabs(qm::log10_binomial(1e15, 10) - 143.44023696712319) < 1e-9);
  // Stirling path (k and n-k both beyond 1e6)
  CHECK(rel_err(qm::log10_binomial(1e8, 5e7), 30102995.468338180) < 1e-12);
  CHECK(rel_err(qm::log10_binomial(2e7, 3e6), 3671600.8833299430) < 1e-12);
  CHECK(rel_err(qm::log10_binomial(1e9, 333333333.0), 276434586.27084796) < 1e-12);
  CHECK_THROWS_AS(qm::log10_binomial(5, 6), std::domain_error);
  CHECK_THROWS_AS(qm::log10_binomial(5, -1), std::domain_error);
}

TEST_CASE("LogProb ordering and product") {
  LogProb a = LogProb::from_real(0.3);
  LogProb b = LogProb::from_real(0.8);
  CHECK(a < b);
  CHECK(LogProb::zero() < a);
  CHECK(b < LogProb::one());
  CHECK(rel_err((a * b).to_linear(), 0.24) < 1e-13);
  CHECK((a * LogProb::zero()).is_zero());
}
