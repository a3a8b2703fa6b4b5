#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "grw/extreal.hpp"
#include "grw/kernels/philox.hpp"

using grw::ExtReal;

namespace {
double rel_err(double got, double want) {
  if (want == 0.0) return std::fabs(got);
  return std::fabs(got - want) / std::fabs(want);
}
}  // namespace

TEST_CASE("construction and normalization") {
  ExtReal z;
  CHECK(z.is_zero());
  CHECK(z.to_double() == 0.0);

  ExtReal a = ExtReal::from_double(123.456);
  CHECK(a.mantissa() == doctest::Approx(1.23456).epsilon(1e-15));
  CHECK(a.exponent10() == 2);
  CHECK(rel_err(a.to_double(), 123.456) < 1e-15);

  ExtReal b = ExtReal::from_double(-1e15);
  CHECK(b.mantissa() == -1.0);
  CHECK(b.exponent10() == 15);

  ExtReal c = ExtReal::from_double(9.999999999999999e-301);
  CHECK(c.exponent10() == -301);
  CHECK(c.mantissa() > 1.0 - 1e-9);
}

TEST_CASE("arithmetic matches double in double range") {
  grw::kernels::PhiloxStream rng(101, 0);
  for (int i = 0; i < 2000; ++i) {
    double x = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-30, 30));
    double y = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-30, 30));
    if (x == 0.0 || y == 0.0) continue;
    ExtReal ex = ExtReal::from_double(x);
    ExtReal ey = ExtReal::from_double(y);
    CHECK(rel_err((ex + ey).to_double(), x + y) < 1e-13);
    CHECK(rel_err((ex - ey).to_double(), x - y) < 1e-13);
    CHECK(rel_err((ex * ey).to_double(), x * y) < 1e-13);
    CHECK(rel_err((ex / ey).to_double(), x / y) < 1e-13);
    CHECK(ex.cmp(ey) == (x < y ? -1 : (x > y ? 1 : 0)));
  }
}

TEST_CASE("exact decade arithmetic far outside double range") {
  ExtReal b2 = ExtReal::from_parts(1.0, -1000000000000000); // 10^-1e15
  ExtReal n = ExtReal::from_parts(1.0, 53);                 // 1e53
  ExtReal prod = b2 * n;
  CHECK(prod.mantissa() == 1.0);
  CHECK(prod.exponent10() == -999999999999947);

  // addition neglects terms 40+ decades down
  ExtReal big = ExtReal::from_parts(5.0, 100);
  ExtReal tiny = ExtReal::from_parts(5.0, 40);
  CHECK((big + tiny).cmp(big) == 0);
  ExtReal closer = ExtReal::from_parts(5.0, 85);
  CHECK((big + closer).cmp(big) > 0);
}

TEST_CASE("cancellation produces exact zero") {
  ExtReal a = ExtReal::from_double(3.25);
  CHECK((a - a).is_zero());
}

TEST_CASE("comparisons across exponent ranges") {
  ExtReal small = ExtReal::from_parts(9.0, -400);
  ExtReal smaller = ExtReal::from_parts(1.0, -500);
  ExtReal neg = ExtReal::from_parts(-2.0, 300);
  CHECK(small > smaller);
  CHECK(neg < smaller);
  CHECK(ExtReal{} > neg);
  CHECK(ExtReal{} < small);
}

TEST_CASE("parse: plain, scientific, long digit strings") {
  CHECK(ExtReal::parse("0").is_zero());
  CHECK(ExtReal::parse("0.000").is_zero());
  CHECK(ExtReal::parse("1").to_double() == 1.0);
  CHECK(ExtReal::parse("-42").to_double() == -42.0);
  CHECK(rel_err(ExtReal::parse("0.1").to_double(), 0.1) < 1e-15);
  CHECK(rel_err(ExtReal::parse("123.456e-7").to_double(), 123.456e-7) < 1e-15);
  CHECK(rel_err(ExtReal::parse("-.5e3").to_double(), -500.0) < 1e-15);

  ExtReal n53 = ExtReal::parse("1e53");
  CHECK(n53.mantissa() == 1.0);
  CHECK(n53.exponent10() == 53);

  // 10^60 as a raw digit string
  std::string big = "1";
  big.append(60, '0');
  ExtReal n60 = ExtReal::parse(big);
  CHECK(n60.mantissa() == 1.0);
  CHECK(n60.exponent10() == 60);

  // 18+ significant digits round into the mantissa
  ExtReal long_digits = ExtReal::parse("123456789012345678901");
  CHECK(long_digits.exponent10() == 20);
  CHECK(rel_err(long_digits.mantissa(), 1.23456789012345679) < 1e-15);

  ExtReal huge_exp = ExtReal::parse("-2.5e1000000000000000");
  CHECK(huge_exp.mantissa() == -2.5);
  CHECK(huge_exp.exponent10() == 1000000000000000);

  CHECK_THROWS_AS(ExtReal::parse(""), std::invalid_argument);
  CHECK_THROWS_AS(ExtReal::parse("abc"), std::invalid_argument);
  CHECK_THROWS_AS(ExtReal::parse("1e"), std::invalid_argument);
  CHECK_THROWS_AS(ExtReal::parse("1.2.3"), std::invalid_argument);
  CHECK_THROWS_AS(ExtReal::parse("1e99999999999999999999"),
                  std::invalid_argument);
}

TEST_CASE("to_double saturates outside range") {
  CHECK(ExtReal::from_parts(1.0, 400).to_double() == HUGE_VAL);
  CHECK(ExtReal::from_parts(-1.0, 400).to_double() == -HUGE_VAL);
  CHECK(ExtReal::from_parts(1.0, -400).to_double() == 0.0);
}

TEST_CASE("log10_of and exp10_of") {
  ExtReal v = ExtReal::from_double(729.0);
  CHECK(rel_err(grw::log10_of(v).to_double(), std::log10(729.0)) < 1e-14);

  // round trip at moderate log magnitudes
  ExtReal l = ExtReal::from_parts(-4.342944819032518, 3); // -4342.9...
  ExtReal p = grw::exp10_of(l);
  ExtReal back = grw::log10_of(p);
  CHECK(rel_err(back.to_double(), l.to_double()) < 1e-12);

  // |L| below mantissa resolution: 10^L is indistinguishable from 1
  ExtReal tiny = ExtReal::from_parts(-4.34, -1000000000000000ll);
  CHECK(grw::exp10_of(tiny).to_double() == 1.0);

  // decade-aligned huge exponents stay exact
  ExtReal dec = ExtReal::from_parts(-1.0, 15);
  ExtReal pdec = grw::exp10_of(dec);
  CHECK(pdec.mantissa() == 1.0);
  CHECK(pdec.exponent10() == -1000000000000000ll);

  // non-decade huge exponents: the fractional digit of the exponent is at
  // the edge of double resolution; the log10 round trip stays within 0.5
  ExtReal l2 = ExtReal::from_double(-999999999999947.0);
  ExtReal p2 = grw::exp10_of(l2);
  double back2 = grw::log10_of(p2).to_double();
  CHECK(std::fabs(back2 - (-999999999999947.0)) < 0.5);

  CHECK_THROWS_AS(grw::log10_of(ExtReal{}), std::domain_error);
  CHECK_THROWS_AS(grw::log10_of(ExtReal::from_double(-1.0)), std::domain_error);
  CHECK_THROWS_AS(grw::exp10_of(ExtReal::from_parts(1.0, 30)),
                  std::domain_error);
}

TEST_CASE("to_string") {
  CHECK(ExtReal::from_double(0.0).to_string() == "0");
  CHECK(ExtReal::from_parts(1.0, -999999999999947).to_string() ==
        "1e-999999999999947");
  CHECK(ExtReal::from_double(-2.5).to_string() == "-2.5e0");
}
