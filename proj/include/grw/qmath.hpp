#pragma once

#include "grw/extreal.hpp"
#include "grw/logprob.hpp"

// Log-domain probability arithmetic robust across the full dynamic range:
// complements of probabilities within 10^(-10^15) of 0 or 1 keep full
// relative accuracy instead of flushing to 0 or 1.
namespace grw::qmath {

inline constexpr double kLn10 = 2.302585092994046;
inline constexpr double kLog10E = 0.4342944819032518;

// Crossover for the asymptotic branch of one_minus/complement_power:
// when |ln(p)| < kAsymptoticCrossover the complement is evaluated by series
// (log10(1-p) ~ -p/ln10); above it, directly via expm1 in the log domain.
// For complement_power(p, n) this is exactly the n*p < 1e-6 regime.
inline constexpr double kAsymptoticCrossover = 1e-6;

// p^n for n >= 0; p^0 = 1 (including exact zero), 0^n = 0 for n > 0.
LogProb pow(const LogProb& p, const ExtReal& n);
LogProb pow(const LogProb& p, double n);

// 1 - p, full relative accuracy in both tails. A p of 10^(-10^15) yields
// log10 = -10^(-10^15)/ln10, never rounded to exactly zero.
LogProb one_minus(const LogProb& p);

// 1 - (1-p)^n, robust for n*p anywhere between 10^(-10^15) and 10^300.
// Algebraically consistent with pow(one_minus(p), n) by construction.
LogProb complement_power(const LogProb& p_tail, const ExtReal& n);
LogProb complement_power(const LogProb& p_tail, double n);

// log10 of C(n, k). Exact integer path for n <= 60; summation for n <= 2e6
// (absolute error < 1e-9); Stirling beyond, where double mantissa limits
// accuracy to ~1e-12 relative. Throws std::domain_error for k outside [0, n].
double log10_binomial(double n, double k);

}  // namespace grw::qmath
