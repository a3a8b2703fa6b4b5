#include "grw/qmath.hpp"

#include <cmath>
#include <stdexcept>

namespace grw {

LogProb LogProb::zero() {
  LogProb p;
  p.zero_ = true;
  return p;
}

LogProb LogProb::from_log10(const ExtReal& log10_value) {
  if (log10_value.sign() > 0) {
    static const ExtReal kTol = ExtReal::from_double(1e-12);
    if (log10_value > kTol)
      throw std::domain_error("LogProb: log10 must be <= 0, got " +
                              log10_value.to_string());
    return one();
  }
  LogProb p;
  p.log10_ = log10_value;
  return p;
}

LogProb LogProb::from_log10(double log10_value) {
  return from_log10(ExtReal::from_double(log10_value));
}

LogProb LogProb::from_real(double p) {
  if (!(p >= 0.0) || p > 1.0)
    throw std::domain_error("LogProb: probability outside [0,1]");
  if (p == 0.0) return zero();
  double l10 = p >= 0.5 ? std::log1p(p - 1.0) * qmath::kLog10E : std::log10(p);
  return from_log10(ExtReal::from_double(l10));
}

const ExtReal& LogProb::log10() const {
  if (zero_) throw std::logic_error("LogProb: log10 of exact zero");
  return log10_;
}

double LogProb::to_linear() const {
  if (zero_) return 0.0;
  return exp10_of(log10_).to_double();
}

int LogProb::cmp(const LogProb& o) const {
  if (zero_ && o.zero_) return 0;
  if (zero_) return -1;
  if (o.zero_) return 1;
  return log10_.cmp(o.log10_);
}

LogProb LogProb::operator*(const LogProb& o) const {
  if (zero_ || o.zero_) return zero();
  return from_log10(log10_ + o.log10_);
}

namespace qmath {

namespace {

const ExtReal kExtLn10 = ExtReal::from_double(kLn10);

// log10(1 - v) for a small positive linear value v (v < ~1e-8), via the
// log1p series; exact-range safe for v far below double underflow.
ExtReal log10_one_minus_small(const ExtReal& v) {
  double vd = v.to_double(); // 0.0 when below double range
  double series = 1.0 + vd * (0.5 + vd / 3.0);
  return v * ExtReal::from_double(-kLog10E * series);
}

}  // namespace

LogProb pow(const LogProb& p, const ExtReal& n) {
  if (n.sign() < 0) throw std::domain_error("pow: exponent must be >= 0");
  if (n.is_zero()) return LogProb::one();
  if (p.is_zero()) return LogProb::zero();
  return LogProb::from_log10(p.log10() * n);
}

LogProb pow(const LogProb& p, double n) {
  if (!std::isfinite(n)) throw std::domain_error("pow: exponent must be finite");
  return pow(p, ExtReal::from_double(n));
}

LogProb one_minus(const LogProb& p) {
  if (p.is_zero()) return LogProb::one();
  if (p.is_one()) return LogProb::zero();
  const ExtReal& L = p.log10();

  static const ExtReal kSeriesBand =
      ExtReal::from_double(kAsymptoticCrossover / kLn10);
  if (L.abs() <= kSeriesBand) {
    // p within ~1e-6/ln10 of 1: with y = ln(p) -> 0-,
    // 1-p = -y*(1 + y/2 + y^2/6 + ...), safe down to |log10 p| ~ 10^(-10^15)
    double x = kLn10 * L.to_double(); // <= 0, may underflow to -0
    double series = 1.0 + x * (0.5 + x / 6.0);
    ExtReal r = L * ExtReal::from_double(-kLn10 * series);
    return LogProb::from_log10(log10_of(r));
  }

  static const ExtReal kHalfDecade = ExtReal::from_double(-0.30103);
  if (L >= kHalfDecade) {
    // p in [~0.5, 1): the complement is comfortably in [~tiny, 0.5]
    double r = -std::expm1(kLn10 * L.to_double());
    return LogProb::from_real(r);
  }

  // p < 0.5: result is near 1; build its log10 directly
  ExtReal pext = exp10_of(L);
  double pd = pext.to_double();
  if (pd > 1e-8) {
    return LogProb::from_log10(
        ExtReal::from_double(std::log1p(-pd) * kLog10E));
  }
  return LogProb::from_log10(log10_one_minus_small(pext));
}

LogProb complement_power(const LogProb& p_tail, const ExtReal& n) {
  if (n.sign() < 0)
    throw std::domain_error("complement_power: n must be >= 0");
  if (p_tail.is_zero() || n.is_zero()) return LogProb::zero();
  LogProb q = pow(one_minus(p_tail), n); // (1-p)^n
  return one_minus(q);
}

LogProb complement_power(const LogProb& p_tail, double n) {
  if (!std::isfinite(n))
    throw std::domain_error("complement_power: n must be finite");
  return complement_power(p_tail, ExtReal::from_double(n));
}

double log10_binomial(double n, double k) {
  if (!(k >= 0.0) || !(k <= n))
    throw std::domain_error("log10_binomial: k outside [0, n]");
  if (k == 0.0 || k == n) return 0.0;
  double m = std::min(k, n - k);
  if (m == 1.0) return std::log10(n);
  bool integral = (n == std::floor(n)) && (k == std::floor(k));

  if (integral && n <= 60.0) {
    // exact integer binomial (intermediates < 2^127)
    auto ni = static_cast<std::uint64_t>(n);
    auto ki = static_cast<std::uint64_t>(m);
    unsigned __int128 c = 1;
    for (std::uint64_t i = 1; i <= ki; ++i) {
      c = c * (ni - ki + i) / i; // division exact: c holds C(n-k+i, i)
    }
    return std::log10(static_cast<double>(static_cast<std::uint64_t>(c)));
  }

  if (m <= 1e6) {
    // Kahan-summed log ratios: log10 C(n,k) = sum_i log10((n-m+i)/i).
    // All terms positive, so no cancellation; abs error ~1e-10 at m = 5e5.
    auto mi = static_cast<std::int64_t>(m);
    double sum = 0.0, comp = 0.0;
    for (std::int64_t i = 1; i <= mi; ++i) {
      double term =
          std::log10((n - m + static_cast<double>(i)) / static_cast<double>(i));
      double y = term - comp;
      double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    return sum;
  }

  // both k and n-k above 1e6: Stirling via the entropy form (all terms
  // positive, Binet corrections < 1e-7/z)
  double x = k / n;
  double entropy = -(x * std::log(x) + (1.0 - x) * std::log1p(-x));
  auto binet = [](double z) {
    double z2 = z * z;
    return (1.0 / 12.0) / z - (1.0 / 360.0) / (z2 * z) +
           (1.0 / 1260.0) / (z2 * z2 * z);
  };
  double ln_c = n * entropy -
                0.5 * std::log(2.0 * M_PI * k * (n - k) / n) + binet(n) -
                binet(k) - binet(n - k);
  return ln_c * kLog10E;
}

}  // namespace qmath
}  // namespace grw
