// grw: branch statistics, collapse simulation, pointer-measurement and
// conservation-law analyses from one command line.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "grw/cli.hpp"
#include "grw/kernels/kernels.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_path;
  std::string format;
  std::string backend = "auto";
  std::uint64_t seed = grw::cli::kDefaultSeed;
  bool seed_given = false;
  std::vector<std::string> params;  // key=value overrides
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path,
                  "flat key = value config file");
  cmd->add_option("--out", flags.out_path, "output path (default: stdout)");
  cmd->add_option("--format", flags.format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--seed", flags.seed, "RNG seed (default 1986)")
      ->trigger_on_parse()
      ->each([&flags](const std::string&) { flags.seed_given = true; });
  cmd->add_option("--backend", flags.backend, "kernel backend")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));
  cmd->add_option("--set,-p", flags.params,
                  "parameter override key=value (repeatable; wins over "
                  "--config)");
}

// one literal flag per config key (e.g. --n, --log10_b2); collected in order
// into the same override list as --set
void add_parameter_flags(CLI::App* cmd, grw::cli::Command command,
                         CommonFlags& flags) {
  for (const auto& key : grw::cli::command_keys(command)) {
    cmd->add_option_function<std::string>(
        "--" + key,
        [&flags, key](const std::string& value) {
          flags.params.push_back(key + "=" + value);
        },
        "parameter '" + key + "'");
  }
}

int run_command(grw::cli::Command command, const CommonFlags& flags) {
  grw::cli::RunConfig config;
  config.command = command;
  try {
    if (!flags.config_path.empty())
      grw::cli::load_config_file(flags.config_path, command, config);
    for (const auto& kv : flags.params) {
      auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("--set expects key=value, got '" + kv +
                                    "'");
      grw::cli::set_parameter(config, kv.substr(0, eq), kv.substr(eq + 1),
                              "--set");
    }
    if (flags.seed_given) config.seed = flags.seed;
    if (!flags.out_path.empty()) config.output_path = flags.out_path;
    if (!flags.format.empty())
      config.format = flags.format == "csv" ? grw::cli::Format::kCsv
                                            : grw::cli::Format::kJson;
    if (flags.backend == "scalar")
      grw::kernels::set_backend(grw::kernels::Backend::kScalar);
    else if (flags.backend == "avx2")
      grw::kernels::set_backend(grw::kernels::Backend::kAvx2);
    else
      grw::kernels::set_backend(grw::kernels::Backend::kAuto);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  }
  try {
    auto report = grw::cli::run(config);
    std::string payload = config.format == grw::cli::Format::kCsv
                              ? report.csv
                              : report.json.dump(2);
    grw::cli::write_output(config.output_path, payload);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "collapse-model branch statistics, hit-process simulation, pointer "
      "measurements and conservation-law measurement limits"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* help;
    grw::cli::Command command;
  };
  const Sub subs[] = {
      {"anomaly", "branch probabilities and thresholds for n-marble ensembles",
       grw::cli::Command::kAnomaly},
      {"collapse", "Monte Carlo of the spontaneous-localization hit process",
       grw::cli::Command::kCollapse},
      {"pointer", "Gaussian pointer states, translation coupling, spreading, "
                  "tail weights",
       grw::cli::Command::kPointer},
      {"way", "nonideality sweep and identities for conserved-quantity "
              "measurement limits",
       grw::cli::Command::kWay},
  };

  std::vector<CommonFlags> flag_sets(4);
  int selected = -1;
  for (int i = 0; i < 4; ++i) {
    auto* cmd = app.add_subcommand(subs[i].name, subs[i].help);
    add_common(cmd, flag_sets[i]);
    add_parameter_flags(cmd, subs[i].command, flag_sets[i]);
    cmd->callback([&selected, i] { selected = i; });
  }

  CLI11_PARSE(app, argc, argv);
  if (selected < 0) return 2;
  return run_command(subs[selected].command, flag_sets[selected]);
}
