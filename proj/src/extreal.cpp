#include "grw/extreal.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <utility>

namespace grw {

namespace {

constexpr double kPow10Tab[23] = {
    1e0,  1e1,  1e2,  1e3,  1e4,  1e5,  1e6,  1e7,  1e8,  1e9,  1e10, 1e11,
    1e12, 1e13, 1e14, 1e15, 1e16, 1e17, 1e18, 1e19, 1e20, 1e21, 1e22};
constexpr double kPow10NegTab[23] = {
    1e0,   1e-1,  1e-2,  1e-3,  1e-4,  1e-5,  1e-6,  1e-7,
    1e-8,  1e-9,  1e-10, 1e-11, 1e-12, 1e-13, 1e-14, 1e-15,
    1e-16, 1e-17, 1e-18, 1e-19, 1e-20, 1e-21, 1e-22};

// Terms further than this many decades below the leading term cannot move a
// 16-digit mantissa.
constexpr std::int64_t kNeglectDecades = 40;

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r))
    throw std::domain_error("ExtReal: exponent overflow");
  return r;
}

ExtReal make_normalized(double mant, std::int64_t exp10) {
  if (!std::isfinite(mant)) throw std::domain_error("ExtReal: non-finite mantissa");
  if (mant == 0.0) return ExtReal{};
  double a = std::fabs(mant);
  if (a < 1.0 || a >= 10.0) {
    int k = static_cast<int>(std::floor(std::log10(a)));
    mant /= pow10d(k);
    exp10 = checked_add(exp10, k);
    // log10 rounding can leave us one decade off at boundaries
    a = std::fabs(mant);
    if (a >= 10.0) {
      mant /= 10.0;
      exp10 = checked_add(exp10, 1);
    } else if (a < 1.0) {
      mant *= 10.0;
      exp10 = checked_add(exp10, -1);
    }
  }
  return ExtReal::from_parts(mant, exp10);
}

}  // namespace

double pow10d(int k) {
  if (k >= 0 && k <= 22) return kPow10Tab[k];
  if (k < 0 && k >= -22) return kPow10NegTab[-k];
  return std::pow(10.0, static_cast<double>(k));
}

ExtReal ExtReal::from_parts(double mant, std::int64_t exp10) {
  if (mant == 0.0) return ExtReal{};
  double a = std::fabs(mant);
  if (a >= 1.0 && a < 10.0) {
    ExtReal r;
    r.mant_ = mant;
    r.exp10_ = exp10;
    return r;
  }
  return make_normalized(mant, exp10);
}

ExtReal ExtReal::from_double(double d) {
  if (!std::isfinite(d)) throw std::domain_error("ExtReal: non-finite input");
  // rescue subnormals: bring them into the normal range first
  if (d != 0.0 && std::fabs(d) < 1e-290)
    return make_normalized(d * 1e300, -300);
  return make_normalized(d, 0);
}

ExtReal ExtReal::from_int64(std::int64_t v) {
  return make_normalized(static_cast<double>(v), 0);
}

double ExtReal::to_double() const {
  if (mant_ == 0.0) return 0.0;
  if (exp10_ > 308) return mant_ > 0 ? HUGE_VAL : -HUGE_VAL;
  if (exp10_ < -325) return mant_ > 0 ? 0.0 : -0.0;
  return mant_ * std::pow(10.0, static_cast<double>(exp10_));
}

ExtReal ExtReal::operator-() const {
  ExtReal r = *this;
  r.mant_ = -r.mant_;
  return r;
}

ExtReal ExtReal::abs() const {
  ExtReal r = *this;
  r.mant_ = std::fabs(r.mant_);
  return r;
}

ExtReal ExtReal::operator+(const ExtReal& o) const {
  if (is_zero()) return o;
  if (o.is_zero()) return *this;
  const ExtReal* big = this;
  const ExtReal* small = &o;
  if (big->exp10_ < small->exp10_) std::swap(big, small);
  std::int64_t diff = big->exp10_ - small->exp10_;
  if (diff > kNeglectDecades) return *big;
  double s = big->mant_ + small->mant_ * pow10d(-static_cast<int>(diff));
  if (s == 0.0) return ExtReal{};
  return make_normalized(s, big->exp10_);
}

ExtReal ExtReal::operator-(const ExtReal& o) const { return *this + (-o); }

ExtReal ExtReal::operator*(const ExtReal& o) const {
  if (is_zero() || o.is_zero()) return ExtReal{};
  return make_normalized(mant_ * o.mant_, checked_add(exp10_, o.exp10_));
}

ExtReal ExtReal::operator/(const ExtReal& o) const {
  if (o.is_zero()) throw std::domain_error("ExtReal: division by zero");
  if (is_zero()) return ExtReal{};
  return make_normalized(mant_ / o.mant_, checked_add(exp10_, -o.exp10_));
}

int ExtReal::cmp(const ExtReal& o) const {
  int sa = sign(), sb = o.sign();
  if (sa != sb) return sa < sb ? -1 : 1;
  if (sa == 0) return 0;
  if (exp10_ != o.exp10_) {
    // larger decade means larger magnitude; flip for negatives
    bool gt = exp10_ > o.exp10_;
    return (gt == (sa > 0)) ? 1 : -1;
  }
  if (mant_ == o.mant_) return 0;
  return mant_ < o.mant_ ? -1 : 1;
}

std::string ExtReal::to_string(int precision) const {
  if (is_zero()) return "0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, mant_);
  std::string s(buf);
  s += 'e';
  s += std::to_string(exp10_);
  return s;
}

ExtReal ExtReal::parse(std::string_view text) {
  const char* p = text.data();
  const char* end = p + text.size();
  auto fail = [&] {
    throw std::invalid_argument("ExtReal: malformed number '" +
                                std::string(text) + "'");
  };
  if (p == end) fail();
  bool neg = false;
  if (*p == '+' || *p == '-') {
    neg = (*p == '-');
    ++p;
  }

  // Collect digit positions: digit at index i (counting all digits, point
  // ignored) has decimal weight 10^(int_digits - 1 - i).
  std::int64_t int_digits = 0;
  std::int64_t idx = 0;
  std::int64_t first_sig = -1;
  std::uint64_t acc = 0;
  std::int64_t kept = 0;
  bool round_up = false;
  bool any_digit = false;
  bool seen_point = false;

  for (; p != end; ++p) {
    char c = *p;
    if (c == '.') {
      if (seen_point) fail();
      seen_point = true;
      int_digits = idx;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) break;
    any_digit = true;
    int d = c - '0';
    if (first_sig < 0 && d != 0) first_sig = idx;
    if (first_sig >= 0) {
      if (kept < 17) {
        acc = acc * 10 + static_cast<std::uint64_t>(d);
        ++kept;
      } else if (kept == 17) {
        round_up = d >= 5;
        ++kept;
      }
    }
    ++idx;
  }
  if (!seen_point) int_digits = idx;
  if (!any_digit) fail();

  std::int64_t exp_part = 0;
  if (p != end && (*p == 'e' || *p == 'E')) {
    ++p;
    if (p == end) fail();
    auto res = std::from_chars(p, end, exp_part);
    if (res.ec != std::errc{} || res.ptr != end) fail();
    p = end;
  }
  if (p != end) fail();

  if (first_sig < 0) return ExtReal{}; // all zeros
  if (round_up) ++acc;

  std::int64_t msd_exp = int_digits - 1 - first_sig;
  std::int64_t kept_used = std::min<std::int64_t>(kept, 17);
  double mant = static_cast<double>(acc);
  std::int64_t e = checked_add(msd_exp, -(kept_used - 1));
  e = checked_add(e, exp_part);
  return make_normalized(neg ? -mant : mant, e);
}

ExtReal log10_of(const ExtReal& v) {
  if (v.sign() <= 0) throw std::domain_error("log10_of: argument must be > 0");
  double lm = std::log10(v.mantissa()); // in [0, 1)
  return ExtReal::from_int64(v.exponent10()) + ExtReal::from_double(lm);
}

ExtReal exp10_of(const ExtReal& L) {
  if (L.is_zero()) return ExtReal::from_double(1.0);
  // guard int64 exponent range
  static const ExtReal kMax = ExtReal::from_double(9.0e18);
  if (L.abs() > kMax) throw std::domain_error("exp10_of: exponent overflow");
  double Ld = L.to_double();
  double fl = std::floor(Ld);
  auto I = static_cast<std::int64_t>(fl);
  ExtReal frac = L - ExtReal::from_int64(I); // exact while |L| < 2^53
  double f = frac.to_double();
  if (f < 0.0) f = 0.0; // guard rounding at decade boundaries
  if (f >= 1.0) {
    f -= 1.0;
    I += 1;
  }
  return ExtReal::from_parts(std::pow(10.0, f), I);
}

}  // namespace grw
