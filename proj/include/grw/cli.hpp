#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>

#include <Eigen/Core>
#include <json.hpp>

#include "grw/logprob.hpp"

// Command front end: resolves a flat key=value config plus flag overrides
// into one of the four commands, runs it, and renders JSON/CSV reports.
namespace grw::cli {

using Json = nlohmann::json;

inline constexpr std::uint64_t kDefaultSeed = 1986;  // fixed, documented
inline constexpr int kSchemaVersion = 1;

enum class Command { kAnomaly, kCollapse, kPointer, kWay };
enum class Format { kJson, kCsv };

struct RunConfig {
  Command command = Command::kAnomaly;
  std::map<std::string, std::string> parameters;  // command-specific
  std::uint64_t seed = kDefaultSeed;
  std::string output_path;  // empty = stdout
  Format format = Format::kJson;
};

Command parse_command(const std::string& name);

// the accepted parameter keys for a command (used for validation and for
// generating the mirrored per-command flags)
const std::set<std::string>& command_keys(Command command);

// flat key = value lines, '#' comments; unknown keys for the chosen command
// are rejected with line diagnostics
void load_config_file(const std::string& path, Command command,
                      RunConfig& into);

// validates a single key for the command (used by both file and flag paths)
void set_parameter(RunConfig& config, const std::string& key,
                   const std::string& value, const std::string& origin);

struct Report {
  Json json;
  std::string csv;  // populated alongside the JSON rendering
};

Report run_anomaly(const RunConfig& config);
Report run_collapse(const RunConfig& config);
Report run_pointer(const RunConfig& config);
Report run_way(const RunConfig& config);
Report run(const RunConfig& config);

// probability rendering: {"linear": num|null, "log10": num|null,
// "log10_ext": {...} when the log10 itself leaves double range,
// "display": "m x 10^k"}
Json logprob_to_json(const LogProb& p);
Json extreal_to_json(const ExtReal& v);
std::string display_magnitude(const ExtReal& log10_value);

// temp-file-plus-rename; writes to stdout when path is empty
void write_output(const std::string& path, const std::string& payload);

}  // namespace grw::cli

// JSON model exchange for the conservation-law analyses: complex matrices as
// nested arrays of [re, im] pairs.
namespace grw::way {
struct WAYModel;
}
namespace grw::cli {
Json cmat_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd cmat_from_json(const Json& j, const std::string& name);
Json way_model_to_json(const grw::way::WAYModel& model);
grw::way::WAYModel way_model_from_json(const Json& j);

}  // namespace grw::cli
