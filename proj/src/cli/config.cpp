#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "grw/cli.hpp"

namespace grw::cli {

namespace {

const std::set<std::string> kCommonKeys = {"seed", "format", "out"};

}  // namespace

const std::set<std::string>& command_keys(Command c) {
  static const std::set<std::string> anomaly = {"n", "b2", "log10_b2", "tau",
                                                "log10_tau"};
  static const std::set<std::string> collapse = {
      "n",      "b2",    "log10_b2", "lambda",       "nucleons",
      "width",  "t_max", "samples",  "distribution", "spec"};
  static const std::set<std::string> pointer = {
      "delta",  "center", "x_min", "x_max", "points", "mass",
      "hbar",   "gamma",  "omega1", "omega2", "T",    "free_t",
      "D"};
  static const std::set<std::string> way = {"j_max",     "j_list",
                                            "restarts",  "max_evals",
                                            "model_in",  "model_out"};
  switch (c) {
    case Command::kAnomaly:
      return anomaly;
    case Command::kCollapse:
      return collapse;
    case Command::kPointer:
      return pointer;
    case Command::kWay:
      return way;
  }
  throw std::logic_error("command_keys: bad command");
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Command parse_command(const std::string& name) {
  if (name == "anomaly") return Command::kAnomaly;
  if (name == "collapse") return Command::kCollapse;
  if (name == "pointer") return Command::kPointer;
  if (name == "way") return Command::kWay;
  throw std::invalid_argument("unknown command '" + name +
                              "' (expected anomaly|collapse|pointer|way)");
}

void set_parameter(RunConfig& config, const std::string& key,
                   const std::string& value, const std::string& origin) {
  if (key == "seed") {
    try {
      config.seed = std::stoull(value);
    } catch (const std::exception&) {
      throw std::invalid_argument(origin + ": seed '" + value +
                                  "' is not an unsigned integer");
    }
    return;
  }
  if (key == "format") {
    if (value == "json")
      config.format = Format::kJson;
    else if (value == "csv")
      config.format = Format::kCsv;
    else
      throw std::invalid_argument(origin + ": format must be json or csv, got '" +
                                  value + "'");
    return;
  }
  if (key == "out") {
    config.output_path = value;
    return;
  }
  const auto& allowed = command_keys(config.command);
  if (!allowed.count(key)) {
    std::ostringstream msg;
    msg << origin << ": unknown key '" << key << "' for this command; allowed:";
    for (const auto& k : allowed) msg << ' ' << k;
    throw std::invalid_argument(msg.str());
  }
  config.parameters[key] = value;
}

void load_config_file(const std::string& path, Command command,
                      RunConfig& into) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  into.command = command;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    std::ostringstream origin;
    origin << path << ":" << line_no;
    if (eq == std::string::npos)
      throw std::invalid_argument(origin.str() +
                                  ": expected 'key = value', got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument(origin.str() + ": empty key or value");
    set_parameter(into, key, value, origin.str());
  }
}

}  // namespace grw::cli
