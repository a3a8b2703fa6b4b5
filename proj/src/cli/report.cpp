#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "grw/cli.hpp"
#include "grw/extreal.hpp"

namespace grw::cli {

namespace {

bool in_linear_range(const ExtReal& log10_value) {
  double ld = log10_value.to_double();
  return std::isfinite(ld) && ld > -300.0 && ld < 300.0;
}

}  // namespace

std::string display_magnitude(const ExtReal& log10_value) {
  double ld = log10_value.to_double();
  char buf[96];
  if (std::fabs(ld) < 1e15) {
    double k = std::floor(ld);
    double mant = std::pow(10.0, ld - k);
    // 9.99999x10^-1 style artifacts roll over to the next decade
    if (mant >= 9.99995) {
      mant /= 10.0;
      k += 1.0;
    }
    std::snprintf(buf, sizeof buf, "%.4gx10^%lld", mant,
                  static_cast<long long>(k));
  } else {
    // the fractional digit of the exponent is beyond double resolution
    std::snprintf(buf, sizeof buf, "10^%s", log10_value.to_string(6).c_str());
  }
  return buf;
}

Json extreal_to_json(const ExtReal& v) {
  double d = v.to_double();
  bool exact = std::isfinite(d) &&
               (v.is_zero() || (v.exponent10() > -300 && v.exponent10() < 300));
  if (exact) return Json(d);
  // out of double range: mantissa/exponent pair plus a display string
  Json j;
  j["mantissa"] = v.mantissa();
  j["exp10"] = v.exponent10();
  j["display"] = v.to_string(6);
  return j;
}

Json logprob_to_json(const LogProb& p) {
  Json j;
  if (p.is_zero()) {
    j["log10"] = nullptr;
    j["linear"] = 0.0;
    j["display"] = "0";
    return j;
  }
  const ExtReal& l = p.log10();
  double ld = l.to_double();
  j["log10"] = ld;
  if (!l.is_zero() && !(l.abs() > ExtReal::from_parts(1.0, -300))) {
    // |log10| below 1e-300: the double form would flush the tail away;
    // carry the extended representation alongside
    j["log10_ext"] = {{"mantissa", l.mantissa()}, {"exp10", l.exponent10()}};
  }
  j["linear"] = in_linear_range(l) ? Json(p.to_linear()) : Json(nullptr);
  j["display"] = display_magnitude(l);
  return j;
}

void write_output(const std::string& path, const std::string& payload) {
  if (path.empty()) {
    std::fwrite(payload.data(), 1, payload.size(), stdout);
    if (!payload.empty() && payload.back() != '\n') std::fputc('\n', stdout);
    return;
  }
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out << payload;
    if (!payload.empty() && payload.back() != '\n') out << '\n';
    if (!out) throw std::runtime_error("write to '" + tmp + "' failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("atomic rename to '" + path + "' failed");
  }
}

}  // namespace grw::cli
