#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "cspapi/cli.hpp"
#include "cspapi/errors.hpp"
#include "cspapi/io.hpp"

namespace {

int guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const cspapi::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return cspapi::kExitIoError;
  } catch (const cspapi::DimensionError& e) {
    std::cerr << "dimension mismatch: " << e.what() << "\n";
    return cspapi::kExitDimensionMismatch;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cspapi::kExitFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structured compressed-sensing design, simulation and reconstruction "
               "for circular-array photoacoustic projection imaging"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string preset;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double noise = -1.0;
  int m0 = 0;
  long n_iter = 0;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config JSON");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--seed", seed, "master seed")->each([&](const std::string&) { seed_set = true; });
    cmd->add_option("--noise", noise, "relative data noise level");
    cmd->add_option("--preset", preset, "phantom preset (sparse | nonsparse)");
    cmd->add_option("--m0", m0, "measurements per group");
    cmd->add_option("--n-iter", n_iter, "design search iterations");
  };

  CLI::App* design = app.add_subcommand("design", "search for a measurement matrix");
  CLI::App* simulate = app.add_subcommand("simulate", "simulate pressure data and compress it");
  CLI::App* reconstruct = app.add_subcommand("reconstruct", "two-step reconstruction and error report");
  CLI::App* pipeline = app.add_subcommand("pipeline", "design + simulate + reconstruct + evaluate");
  for (CLI::App* cmd : {design, simulate, reconstruct, pipeline}) add_common(cmd);

  CLI::App* evaluate = app.add_subcommand("evaluate", "merge error reports into one table");
  std::vector<std::string> report_files;
  evaluate->add_option("reports", report_files, "report.json files");
  evaluate->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  return guarded([&]() -> int {
    if (app.got_subcommand(evaluate)) {
      std::vector<std::filesystem::path> paths(report_files.begin(), report_files.end());
      return cspapi::run_evaluate(paths, out_dir.empty() ? "." : out_dir);
    }

    cspapi::ExperimentConfig cfg =
        config_path.empty() ? cspapi::ExperimentConfig{} : cspapi::load_config(config_path);
    if (seed_set) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out = out_dir;
    if (noise >= 0.0) cfg.noise = noise;
    if (!preset.empty()) {
      cfg.phantom.preset = preset;
      cfg.phantom.discs.clear();
    }
    if (m0 > 0) cfg.design.spec.m0 = m0;
    if (n_iter > 0) cfg.design.n_iter = n_iter;

    if (app.got_subcommand(design)) return cspapi::run_design(cfg);
    if (app.got_subcommand(simulate)) return cspapi::run_simulate(cfg);
    if (app.got_subcommand(reconstruct)) return cspapi::run_reconstruct(cfg);
    return cspapi::run_pipeline(cfg);
  });
}
