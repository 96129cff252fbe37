#pragma once

// Command-line front end:
//   ltg run      --config <path> [--preset <name>] [--seed <u64>] [--out <dir>]
//   ltg validate --config <path> [--preset <name>]
//   ltg rerun    --from <output.csv> [--out <dir>]
// Exit status 0 on success, 1 for input errors, 2 for numerical errors.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ltg/config.hpp"
#include "ltg/errors.hpp"
#include "ltg/experiments.hpp"
#include "ltg/output.hpp"

namespace ltg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNumerical = 2;

namespace detail {

inline int run_resolved(const config::Json& user, const std::optional<std::string>& preset,
                        std::ostream& out) {
  const config::ExperimentConfig cfg = config::load(user, preset);
  const experiments::RunResult result = experiments::run(cfg);
  for (const auto& path : output::write_run(result, cfg, cfg.output_dir)) out << path.string() << '\n';
  return kExitOk;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-qubit dephasing under random telegraph noise: analytic, Monte Carlo, SLM and optics experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string from;

  CLI::App* run = app.add_subcommand("run", "Run the experiment described by a config");
  run->add_option("--config", config_path, "JSON config file");
  run->add_option("--preset", preset, "Figure preset")->check(CLI::IsMember(config::preset_names()));
  auto* seed_opt = run->add_option("--seed", seed, "Master seed (overrides the config)");
  run->add_option("--out", out_dir, "Output directory (overrides the config)");

  CLI::App* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("--config", config_path, "JSON config file")->required();
  validate->add_option("--preset", preset, "Figure preset")->check(CLI::IsMember(config::preset_names()));

  CLI::App* rerun = app.add_subcommand("rerun", "Re-run the config embedded in an output file");
  rerun->add_option("--from", from, "Output CSV written by a previous run")->required();
  rerun->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    const std::optional<std::string> preset_opt = preset.empty() ? std::nullopt : std::optional(preset);
    if (*run) {
      if (config_path.empty() && !preset_opt) throw ConfigError("run needs --config or --preset");
      config::Json user = config_path.empty() ? config::Json::object() : config::read_file(config_path);
      if (!user.is_object()) throw ConfigError("config must be a JSON object");
      if (*seed_opt) user["seed"] = seed;
      if (!out_dir.empty()) user["output_dir"] = out_dir;
      return detail::run_resolved(user, preset_opt, out);
    }
    if (*validate) {
      const config::Json user = config::read_file(config_path);
      const config::ExperimentConfig cfg = config::load(user, preset_opt);
      const std::vector<std::string> problems = config::diagnostics(cfg);
      for (const auto& p : problems) err << config_path << ": " << p << '\n';
      if (!problems.empty()) return kExitInput;
      out << config_path << ": ok (" << cfg.effective_command << ")\n";
      return kExitOk;
    }
    if (*rerun) {
      config::Json user = output::read_embedded_config(from);
      user["output_dir"] = out_dir;
      return detail::run_resolved(user, std::nullopt, out);
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitInput;
}

}  // namespace ltg::cli
