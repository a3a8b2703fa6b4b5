#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace grw {

// Extended-range real: value = mant * 10^exp10 with 1 <= |mant| < 10, or the
// canonical zero (mant == 0, exp10 == 0). A double mantissa keeps ~16
// significant decimal digits; the int64 decimal exponent extends the dynamic
// range far beyond double (needed for quantities like 10^(-10^15) whose
// logarithms are themselves outside double range).
//
// Exponent arithmetic on the int64 field is exact, so decade-aligned values
// (1e53, 1e-1000000000000000, ...) combine without rounding.
class ExtReal {
 public:
  constexpr ExtReal() = default;

  static ExtReal from_double(double d);
  static ExtReal from_int64(std::int64_t v);
  // value = mant * 10^exp10 (mant need not be normalized)
  static ExtReal from_parts(double mant, std::int64_t exp10);
  // Decimal or scientific notation; digit strings of any length.
  // Throws std::invalid_argument on malformed input.
  static ExtReal parse(std::string_view text);

  double mantissa() const { return mant_; }
  std::int64_t exponent10() const { return exp10_; }

  bool is_zero() const { return mant_ == 0.0; }
  int sign() const { return mant_ > 0.0 ? 1 : (mant_ < 0.0 ? -1 : 0); }

  // Saturates to +-inf / +-0 outside double range.
  double to_double() const;
  std::string to_string(int precision = 15) const;

  ExtReal operator-() const;
  ExtReal operator+(const ExtReal& o) const;
  ExtReal operator-(const ExtReal& o) const;
  ExtReal operator*(const ExtReal& o) const;
  ExtReal operator/(const ExtReal& o) const;
  ExtReal abs() const;

  // three-way: -1, 0, +1
  int cmp(const ExtReal& o) const;
  bool operator==(const ExtReal& o) const { return cmp(o) == 0; }
  bool operator!=(const ExtReal& o) const { return cmp(o) != 0; }
  bool operator<(const ExtReal& o) const { return cmp(o) < 0; }
  bool operator<=(const ExtReal& o) const { return cmp(o) <= 0; }
  bool operator>(const ExtReal& o) const { return cmp(o) > 0; }
  bool operator>=(const ExtReal& o) const { return cmp(o) >= 0; }

 private:
  double mant_ = 0.0;
  std::int64_t exp10_ = 0;
};

// 10^k, correctly rounded (exact for |k| <= 22 where the double is exact).
double pow10d(int k);

// log10 of a positive ExtReal, as an ExtReal. Throws std::domain_error for
// v <= 0.
ExtReal log10_of(const ExtReal& v);

// 10^L for an ExtReal exponent L. For |L| > ~9e18 the result exponent would
// overflow int64; throws std::domain_error. For |L| > 2^53 the fractional
// part of L is below mantissa resolution and the result is decade-rounded.
ExtReal exp10_of(const ExtReal& L);

}  // namespace grw
