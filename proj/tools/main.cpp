// oscillab command line: run experiment configs, generate the built-in
// preset, list known settings, and verify artifact manifests.

#include "oscillab/experiment.hpp"
#include "oscillab/io.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace {

std::optional<std::uint64_t> seed_from_env() {
  const char* raw = std::getenv("OSCILLAB_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  return std::stoull(raw);
}

int execute(oscillab::ExperimentConfig config, const std::optional<double>& dt,
            const std::string& out_override) {
  if (const auto seed = seed_from_env()) config.global_seed = *seed;
  if (dt) config.dt_override = *dt;
  if (!out_override.empty()) config.output_dir = out_override;

  const auto result = oscillab::run_experiment(config);
  std::cout << result.runs_executed << " runs, " << result.artifacts.size()
            << " artifacts -> " << result.manifest_path << "\n";
  for (const auto& failure : result.failures) std::cout << "FAIL " << failure << "\n";
  return result.all_checks_passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oscillab: discrete optimizers, their oscillator flows, and checks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<double> dt;

  auto* run_cmd = app.add_subcommand("run", "execute an experiment config");
  run_cmd->add_option("config", config_path, "experiment config JSON")->required();
  run_cmd->add_option("--out", out_dir, "output directory (overrides the config)");
  run_cmd->add_option("--dt", dt, "integrator step override");

  std::string preset_name;
  auto* preset_cmd = app.add_subcommand("preset", "run a built-in experiment");
  preset_cmd->add_option("name", preset_name, "preset name (figure2)")->required();
  preset_cmd->add_option("--out", out_dir, "output directory");
  preset_cmd->add_option("--dt", dt, "integrator step override");

  app.add_subcommand("list", "print objectives, algorithms, certificates and bounds");

  std::string manifest_path;
  auto* verify_cmd = app.add_subcommand("verify", "re-check a manifest's checksums");
  verify_cmd->add_option("manifest", manifest_path, "manifest JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      const fs::path path(config_path);
      auto config = oscillab::parse_experiment(oscillab::io::read_text_file(path),
                                               path.parent_path());
      return execute(std::move(config), dt, out_dir);
    }
    if (preset_cmd->parsed()) {
      if (preset_name != "figure2") {
        std::cerr << "unknown preset: " << preset_name << "\n";
        return 2;
      }
      return execute(oscillab::figure2_preset(), dt, out_dir);
    }
    if (app.get_subcommand("list")->parsed()) {
      std::cout << oscillab::list_settings();
      return 0;
    }
    if (verify_cmd->parsed()) {
      std::string diagnostics;
      const bool ok = oscillab::verify_manifest(manifest_path, &diagnostics);
      if (!diagnostics.empty()) std::cerr << diagnostics;
      std::cout << (ok ? "manifest ok" : "manifest verification failed") << "\n";
      return ok ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
