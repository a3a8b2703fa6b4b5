#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "grw/cli.hpp"
#include "grw/kernels/kernels.hpp"
#include "grw/marbles.hpp"
#include "grw/pointer.hpp"
#include "grw/qmath.hpp"
#include "grw/way.hpp"

namespace grw::cli {

namespace mb = grw::marbles;
namespace pt = grw::pointer;
namespace wy = grw::way;

namespace {

const std::string* find(const RunConfig& c, const std::string& key) {
  auto it = c.parameters.find(key);
  return it == c.parameters.end() ? nullptr : &it->second;
}

std::string require(const RunConfig& c, const std::string& key) {
  const std::string* v = find(c, key);
  if (!v)
    throw std::invalid_argument("missing required parameter '" + key + "'");
  return *v;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double d = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("parameter '" + key + "': '" + value +
                                "' is not a number");
  }
}

double get_double(const RunConfig& c, const std::string& key, double fallback) {
  const std::string* v = find(c, key);
  return v ? to_double(key, *v) : fallback;
}

std::uint64_t get_count(const RunConfig& c, const std::string& key,
                        std::uint64_t fallback) {
  const std::string* v = find(c, key);
  if (!v) return fallback;
  try {
    return std::stoull(*v);
  } catch (const std::exception&) {
    throw std::invalid_argument("parameter '" + key + "': '" + *v +
                                "' is not a count");
  }
}

bool get_bool(const RunConfig& c, const std::string& key, bool fallback) {
  const std::string* v = find(c, key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw std::invalid_argument("parameter '" + key + "': expected true/false");
}

// b2 given either linearly or as its decimal log
LogProb tail_weight_from(const RunConfig& c, const std::string& linear_key,
                         const std::string& log_key, bool required) {
  const std::string* lin = find(c, linear_key);
  const std::string* lg = find(c, log_key);
  if (lin && lg)
    throw std::invalid_argument("give either '" + linear_key + "' or '" +
                                log_key + "', not both");
  if (lg) return LogProb::from_log10(ExtReal::parse(*lg));
  if (lin) {
    ExtReal v = ExtReal::parse(*lin);
    if (v.sign() < 0)
      throw std::invalid_argument("'" + linear_key + "' must be >= 0");
    if (v.is_zero()) return LogProb::zero();
    return LogProb::from_log10(log10_of(v));
  }
  if (required)
    throw std::invalid_argument("missing parameter '" + linear_key + "' or '" +
                                log_key + "'");
  return LogProb::one();  // caller checks
}

Json meta(const RunConfig& c, const char* command) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = command;
  j["seed"] = c.seed;
  j["kernel_backend"] = kernels::backend_name(kernels::active_backend());
  return j;
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void csv_field_row(std::ostringstream& csv, const std::string& name,
                   const Json& rendered) {
  csv << name << ',';
  if (rendered.contains("linear") && rendered["linear"].is_number())
    csv << csv_number(rendered["linear"].get<double>());
  csv << ',';
  if (rendered.contains("log10") && rendered["log10"].is_number())
    csv << csv_number(rendered["log10"].get<double>());
  csv << ',' << rendered.value("display", "") << '\n';
}

}  // namespace

Report run_anomaly(const RunConfig& config) {
  ExtReal n = ExtReal::parse(require(config, "n"));
  LogProb b2 = tail_weight_from(config, "b2", "log10_b2", true);

  mb::EnsembleSpec spec;
  spec.n = n;
  spec.amplitudes = mb::MarbleAmplitudes::from_b2(b2);

  Json out = meta(config, "anomaly");
  Json inputs;
  inputs["n"] = extreal_to_json(n);
  inputs["b2"] = logprob_to_json(b2);
  out["inputs"] = inputs;

  Json res;
  res["prob_all_in"] = logprob_to_json(mb::prob_all_in(spec));
  res["prob_not_all_in"] = logprob_to_json(mb::prob_not_all_in(spec));
  res["max_tau_for_n"] = logprob_to_json(mb::max_tau_for_n(n, b2));

  const std::string* tau_lin = find(config, "tau");
  const std::string* tau_log = find(config, "log10_tau");
  if (tau_lin || tau_log) {
    LogProb tau = tail_weight_from(config, "tau", "log10_tau", true);
    if (b2.is_zero() || tau.is_zero() || tau.is_one()) {
      res["threshold_n"] = nullptr;
      res["threshold_note"] =
          "threshold undefined: needs 0 < tau < 1 and 0 < b2 < 1";
    } else {
      ExtReal thr = mb::anomaly_threshold_n(tau, b2);
      res["threshold_n"] = extreal_to_json(thr);
      res["threshold_n_display"] =
          thr.is_zero() ? "0" : display_magnitude(log10_of(thr));
    }
  } else if (b2.is_zero()) {
    res["threshold_n"] = nullptr;
    res["threshold_note"] = "threshold undefined for b2 = 0 (no tail)";
  }

  // built-in post-localization tail weight of a 1 cm^3 solid, both as the
  // exact e-based exponent and its decade rounding
  res["reference_tail"] = {{"log10_exact", mb::kTailLog10Exact},
                           {"log10_decade", mb::kTailLog10Decade}};
  out["results"] = res;

  std::ostringstream csv;
  csv << "field,linear,log10,display\n";
  csv_field_row(csv, "prob_all_in", res["prob_all_in"]);
  csv_field_row(csv, "prob_not_all_in", res["prob_not_all_in"]);
  csv_field_row(csv, "max_tau_for_n", res["max_tau_for_n"]);
  return {std::move(out), csv.str()};
}

Report run_collapse(const RunConfig& config) {
  RunConfig cfg = config;
  // JSON ensemble spec file: {"n": int-or-string, "log10_b2": number,
  // "lambda": number, "nucleons": number, "t_max": number}; explicit
  // parameters win over file values
  if (const std::string* spec_path = find(cfg, "spec")) {
    std::ifstream in(*spec_path);
    if (!in)
      throw std::invalid_argument("spec: cannot open '" + *spec_path + "'");
    Json j = Json::parse(in, nullptr, true, true);
    auto fill = [&cfg](const std::string& key, const Json& v) {
      if (cfg.parameters.count(key)) return;  // explicit value wins
      cfg.parameters[key] =
          v.is_string() ? v.get<std::string>() : Json(v).dump();
    };
    for (const auto& [key, value] : j.items()) {
      if (key == "n" || key == "log10_b2" || key == "b2" || key == "lambda" ||
          key == "nucleons" || key == "width" || key == "t_max" ||
          key == "samples")
        fill(key, value);
      else
        throw std::invalid_argument("spec: unknown key '" + key + "' in '" +
                                    *spec_path + "'");
    }
    cfg.parameters.erase("spec");
  }
  const RunConfig& config_resolved = cfg;
  ExtReal n = ExtReal::parse(require(config_resolved, "n"));
  LogProb b2 = tail_weight_from(config_resolved, "b2", "log10_b2", true);

  mb::EnsembleSpec spec;
  spec.n = n;
  spec.amplitudes = mb::MarbleAmplitudes::from_b2(b2);
  spec.grw.lambda_per_nucleon = get_double(config_resolved, "lambda", 1e-16);
  spec.grw.nucleons_per_marble = get_double(config_resolved, "nucleons", 1e24);
  spec.grw.localization_width = get_double(config_resolved, "width", 1e-5);
  double t_max = get_double(config_resolved, "t_max", 1.0);
  std::uint64_t samples = get_count(config_resolved, "samples", 1000);

  auto records = mb::simulate_batch(spec, samples, config.seed, t_max);

  Json out = meta(config, "collapse");
  Json inputs;
  inputs["n"] = extreal_to_json(n);
  inputs["b2"] = logprob_to_json(b2);
  inputs["lambda"] = spec.grw.lambda_per_nucleon;
  inputs["nucleons"] = spec.grw.nucleons_per_marble;
  inputs["width"] = spec.grw.localization_width;
  inputs["t_max"] = t_max;
  inputs["samples"] = samples;
  out["inputs"] = inputs;

  Json res;
  res["marble_rate"] = spec.grw.marble_rate();

  // reduction-time statistics over the batch
  {
    std::vector<double> totals(records.size());
    for (std::size_t i = 0; i < records.size(); ++i)
      totals[i] = records[i].total_reduction_time;
    double sum = 0.0, comp = 0.0;
    for (double v : totals) {
      double y = v - comp;
      double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    double mean = sum / double(totals.size());
    double var = 0.0;
    for (double v : totals) var += (v - mean) * (v - mean);
    var = totals.size() > 1 ? var / double(totals.size() - 1) : 0.0;
    std::vector<double> sorted = totals;
    std::sort(sorted.begin(), sorted.end());
    auto rank = [&](double q) {
      auto idx = static_cast<std::size_t>(
                     std::ceil(q * double(sorted.size()))) - 1;
      return sorted[std::min(idx, sorted.size() - 1)];
    };
    res["reduction_time"] = {
        {"mean", mean},
        {"q50", rank(0.5)},
        {"q99", rank(0.99)},
        {"std_err", std::sqrt(var / double(totals.size()))}};
  }

  // outcome histogram (sparse: only populated counts)
  {
    std::map<std::uint64_t, std::uint64_t> hist;
    std::uint64_t unresolved_total = 0;
    for (const auto& r : records) {
      ++hist[r.final_k_in];
      unresolved_total += r.unresolved;
    }
    Json h = Json::array();
    for (const auto& [k, count] : hist) h.push_back({k, count});
    res["final_k_in_histogram"] = h;
    res["unresolved_total"] = unresolved_total;
  }

  if (get_bool(config, "distribution", false)) {
    auto dist = mb::count_distribution(spec);
    Json d = Json::array();
    for (std::size_t k = 0; k < dist.size(); ++k)
      d.push_back({k, logprob_to_json(dist[k])});
    res["count_distribution"] = d;
  }
  out["results"] = res;

  std::ostringstream csv;
  csv << "seed_index,total_reduction_time,final_k_in,unresolved_count\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    csv << i << ',' << csv_number(records[i].total_reduction_time) << ','
        << records[i].final_k_in << ',' << records[i].unresolved << '\n';
  }
  return {std::move(out), csv.str()};
}

Report run_pointer(const RunConfig& config) {
  double delta = to_double("delta", require(config, "delta"));
  double center = get_double(config, "center", 0.0);
  pt::GridSpec grid;
  grid.x_min = get_double(config, "x_min", center - 16.0 * delta);
  grid.x_max = get_double(config, "x_max", center + 16.0 * delta);
  grid.points = get_count(config, "points", 4096);
  grid.mass = get_double(config, "mass", 1.0);
  grid.hbar = get_double(config, "hbar", 1.0);

  auto ready = pt::gaussian_pointer(delta, center, grid);

  Json out = meta(config, "pointer");
  Json inputs;
  inputs["delta"] = delta;
  inputs["center"] = center;
  inputs["x_min"] = grid.x_min;
  inputs["x_max"] = grid.x_max;
  inputs["points"] = grid.points;
  inputs["mass"] = grid.mass;
  inputs["hbar"] = grid.hbar;
  out["inputs"] = inputs;

  Json res;
  res["ready"] = {{"norm", ready.norm()},
                  {"position_mean", ready.position_mean()},
                  {"position_variance", ready.position_variance()},
                  {"peak_density", ready.peak_density()}};

  const pt::GridWavefunction* export_state = &ready;
  std::optional<pt::GridWavefunction> evolved;

  bool have_coupling = find(config, "gamma") && find(config, "T") &&
                       find(config, "omega1") && find(config, "omega2");
  if (have_coupling) {
    pt::MeasurementCoupling coupling;
    coupling.gamma = to_double("gamma", require(config, "gamma"));
    coupling.omega1 = to_double("omega1", require(config, "omega1"));
    coupling.omega2 = to_double("omega2", require(config, "omega2"));
    coupling.T = to_double("T", require(config, "T"));
    auto rep = pt::distinguishability_report(coupling, delta);
    res["distinguishability"] = {{"shift", rep.shift},
                                 {"ratio", rep.ratio},
                                 {"overlap_log10", rep.overlap_log10}};
    double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    auto branches = pt::evolve_superposition(ready, coupling, inv_sqrt2,
                                             inv_sqrt2);
    Json blist = Json::array();
    for (const auto& b : branches) {
      blist.push_back({{"micro_index", b.micro_index},
                       {"amplitude_re", b.amplitude.real()},
                       {"amplitude_im", b.amplitude.imag()},
                       {"pointer_mean", b.pointer_state.position_mean()}});
    }
    res["entangled_branches"] = blist;
    double disc = std::abs(
        pt::overlap(branches[0].pointer_state, branches[1].pointer_state));
    res["branch_overlap"] = {
        {"discrete_magnitude", disc},
        {"closed_form_log10", rep.overlap_log10}};
  }

  if (const std::string* ft = find(config, "free_t")) {
    double t = to_double("free_t", *ft);
    evolved = pt::evolve_free(ready, t);
    double x = ready.hbar() * t / (2.0 * ready.mass() * delta * delta);
    res["free_spread"] = {
        {"t", t},
        {"spread_parameter", x},  // hbar t / (2 m delta^2), unit-free
        {"variance", evolved->position_variance()},
        {"variance_law", delta * delta * (1.0 + x * x)}};
    export_state = &*evolved;
  }

  if (const std::string* dstr = find(config, "D")) {
    double D = to_double("D", *dstr);
    auto td = pt::tail_decompose(*export_state, D);
    res["tails"] = {{"D", D},
                    {"N_in", logprob_to_json(td.N_in)},
                    {"N_out", logprob_to_json(td.N_out)}};
  }
  out["results"] = res;

  std::ostringstream csv;
  csv << "x,re,im,density\n";
  const auto& amps = export_state->amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    csv << csv_number(export_state->x_at(i)) << ','
        << csv_number(amps[i].real()) << ',' << csv_number(amps[i].imag())
        << ',' << csv_number(std::norm(amps[i])) << '\n';
  }
  return {std::move(out), csv.str()};
}

Report run_way(const RunConfig& config) {
  std::vector<double> js;
  if (const std::string* list = find(config, "j_list")) {
    std::stringstream ss(*list);
    std::string item;
    while (std::getline(ss, item, ','))
      js.push_back(to_double("j_list", item));
    if (js.empty()) throw std::invalid_argument("j_list: no values");
  } else {
    double j_max = get_double(config, "j_max", 12.5);
    for (double j = 0.5; j <= j_max + 1e-9; j += 0.5) js.push_back(j);
  }
  wy::SweepOptions opt;
  opt.seed = config.seed;
  opt.restarts = static_cast<int>(get_count(config, "restarts", 20));
  opt.max_evals = static_cast<int>(get_count(config, "max_evals", 60000));

  auto rows = wy::nonideality_sweep(js, opt);

  Json out = meta(config, "way");
  Json inputs;
  inputs["j_values"] = js;
  inputs["restarts"] = opt.restarts;
  inputs["max_evals"] = opt.max_evals;
  out["inputs"] = inputs;

  Json res;
  Json table = Json::array();
  for (const auto& r : rows) {
    table.push_back({{"j", r.j},
                     {"dim_a", r.dim_a},
                     {"gamma2_mean", r.gamma2_mean},
                     {"epsilon", r.epsilon},
                     {"min_fidelity", r.min_fidelity},
                     {"outcome_overlap", r.outcome_overlap},
                     {"optimizer_status", r.optimizer_status}});
  }
  res["sweep"] = table;

  // trade-off trend over the upper half of the sweep (diagnostic only:
  // achieved values, not proven minimal)
  if (rows.size() >= 4) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t i = rows.size() / 2; i < rows.size(); ++i) {
      if (rows[i].epsilon <= 0.0 || rows[i].gamma2_mean <= 0.0) continue;
      double x = std::log10(rows[i].gamma2_mean);
      double y = std::log10(rows[i].epsilon);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++cnt;
    }
    if (cnt >= 2)
      res["loglog_slope_diagnostic"] =
          (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  }

  // the commutator witness for the measured/conserved spin pair
  res["obstruction_szsx"] =
      wy::commutator_obstruction(wy::spin_z(0.5), wy::spin_x(0.5));

  // model exchange: dump the best optimized model / analyze a supplied one
  if (const std::string* model_out = find(config, "model_out")) {
    auto sol = wy::nonideality_best_model(js.back(), opt);
    write_output(*model_out, way_model_to_json(sol.model).dump(2));
    res["model_out"] = {{"path", *model_out},
                        {"j", sol.row.j},
                        {"epsilon", sol.row.epsilon},
                        {"gamma2_mean", sol.row.gamma2_mean}};
  }
  if (const std::string* model_in = find(config, "model_in")) {
    std::ifstream in(*model_in);
    if (!in)
      throw std::invalid_argument("model_in: cannot open '" + *model_in + "'");
    auto m = way_model_from_json(Json::parse(in));
    Json rep;
    rep["conservation_residual"] =
        wy::conservation_residual(m.U, m.gamma_total());
    rep["obstruction"] = wy::commutator_obstruction(m.M, m.Gamma_S);
    auto outs = wy::outcome_states(m);
    Json fid = Json::array();
    double min_fid = 1.0, max_ovl = 0.0;
    for (const auto& o : outs) {
      fid.push_back({{"eigenvalue", o.eigenvalue}, {"fidelity", o.fidelity}});
      min_fid = std::min(min_fid, o.fidelity);
    }
    for (std::size_t a = 0; a < outs.size(); ++a)
      for (std::size_t b = a + 1; b < outs.size(); ++b)
        max_ovl = std::max(max_ovl, std::abs(outs[a].apparatus_state.dot(
                                        outs[b].apparatus_state)));
    rep["outcomes"] = fid;
    rep["min_fidelity"] = min_fid;
    rep["max_outcome_overlap"] = max_ovl;
    Json chain = Json::array();
    for (std::size_t a = 0; a < outs.size(); ++a)
      for (std::size_t b = 0; b < outs.size(); ++b) {
        auto r = wy::chain_identity_residual(m, int(a), int(b));
        chain.push_back({{"m_prime", a},
                         {"m", b},
                         {"preconditions_met", r.preconditions_met},
                         {"residual", r.preconditions_met ? Json(r.residual)
                                                          : Json(nullptr)},
                         {"detail", r.detail}});
      }
    rep["chain_identity"] = chain;
    res["model_report"] = rep;
  }

  // five-step identity on an exactly conserving ideal model
  {
    wy::WAYModel m;
    m.M = wy::spin_z(0.5);
    m.Gamma_S = wy::spin_x(0.5);
    m.Gamma_A = wy::random_hermitian(4, config.seed, 77);
    m.U = wy::kron(wy::Cmat::Identity(2, 2), wy::unitary_exp_i(m.Gamma_A));
    m.ready = wy::Cvec::Zero(4);
    m.ready(0) = 1.0;
    Json chain = Json::array();
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        auto r = wy::chain_identity_residual(m, a, b);
        chain.push_back({{"m_prime", a},
                         {"m", b},
                         {"preconditions_met", r.preconditions_met},
                         {"residual", r.residual},
                         {"lhs_abs", std::abs(r.lhs)}});
      }
    res["chain_identity"] = chain;
  }
  out["results"] = res;

  std::ostringstream csv;
  csv << "j,dim,gamma2_mean,epsilon,optimizer_status\n";
  for (const auto& r : rows) {
    csv << csv_number(r.j) << ',' << r.dim_a << ','
        << csv_number(r.gamma2_mean) << ',' << csv_number(r.epsilon) << ','
        << r.optimizer_status << '\n';
  }
  return {std::move(out), csv.str()};
}

Report run(const RunConfig& config) {
  switch (config.command) {
    case Command::kAnomaly:
      return run_anomaly(config);
    case Command::kCollapse:
      return run_collapse(config);
    case Command::kPointer:
      return run_pointer(config);
    case Command::kWay:
      return run_way(config);
  }
  throw std::logic_error("run: bad command");
}

}  // namespace grw::cli
