#pragma once

#include "grw/extreal.hpp"

namespace grw {

// Probability stored as its decimal logarithm. The exact-zero case is a
// reserved sentinel distinct from any finite log10, so b = 0 (no tail at all)
// never collides with "very small tail".
class LogProb {
 public:
  // default-constructed value is 1 (log10 = 0)
  constexpr LogProb() = default;

  static LogProb zero();
  static LogProb one() { return LogProb{}; }

  // Validates log10 <= 0; positives within 1e-12 (rounding debris) clamp to
  // one, larger positives throw std::domain_error.
  static LogProb from_log10(const ExtReal& log10_value);
  static LogProb from_log10(double log10_value);

  // p in [0, 1]; throws std::domain_error outside.
  static LogProb from_real(double p);

  bool is_zero() const { return zero_; }
  bool is_one() const { return !zero_ && log10_.is_zero(); }

  // Throws std::logic_error on the exact-zero sentinel.
  const ExtReal& log10() const;

  // Underflows to 0.0 below ~1e-308; exact zero also maps to 0.0.
  double to_linear() const;

  int cmp(const LogProb& o) const;
  bool operator==(const LogProb& o) const { return cmp(o) == 0; }
  bool operator!=(const LogProb& o) const { return cmp(o) != 0; }
  bool operator<(const LogProb& o) const { return cmp(o) < 0; }
  bool operator<=(const LogProb& o) const { return cmp(o) <= 0; }
  bool operator>(const LogProb& o) const { return cmp(o) > 0; }
  bool operator>=(const LogProb& o) const { return cmp(o) >= 0; }

  // product of probabilities; zero is absorbing
  LogProb operator*(const LogProb& o) const;

 private:
  ExtReal log10_;      // <= 0
  bool zero_ = false;  // exact-zero sentinel
};

}  // namespace grw
