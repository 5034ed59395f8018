#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "gridshift/experiment.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::vector<std::uint64_t>& seeds,
            const std::string& out_dir, const std::string& novelty,
            long injection_episode) {
  gridshift::ExperimentConfig cfg = gridshift::load_experiment_config(config_path);
  if (!seeds.empty()) cfg.seeds = seeds;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (!novelty.empty()) {
    cfg.novelty_name = novelty;
    cfg.novelty_params = nlohmann::json::object();  // defaults of the new novelty
  }
  if (injection_episode > 0) cfg.injection_episode = injection_episode;

  const gridshift::ValidationReport report = gridshift::validate_config(cfg);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  if (!report.ok()) {
    for (const auto& v : report.violations) std::cerr << "error: " << v << "\n";
    return 1;
  }

  const auto t0 = std::chrono::steady_clock::now();
  const gridshift::RunArtifacts artifacts = gridshift::run_experiment(cfg);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
  std::cerr << "run '" << cfg.run_id << "' finished in " << ms << " ms\n";

  for (const auto& r : artifacts.results) {
    std::cout << "seed " << r.seed << ": episodes=" << r.episodes
              << " steps=" << r.steps;
    if (r.injected)
      std::cout << " injection_timestep=" << r.injection_timestep
                << " resilience=" << gridshift::format_double(r.resilience_value)
                << " one_shot=" << gridshift::format_double(r.one_shot_value)
                << " asymptotic=" << gridshift::format_double(r.asymptotic.above_random)
                << " converged=" << (r.asymptotic.converged ? "true" : "false");
    else
      std::cout << " (novelty never injected)";
    std::cout << "\n";
  }
  std::cout << "artifacts written to " << artifacts.out_dir.string() << "\n";
  return 0;
}

int cmd_classify(const std::string& config_path) {
  const gridshift::ExperimentConfig cfg = gridshift::load_experiment_config(config_path);
  std::cout << gridshift::declaration_report_json(cfg).dump(2) << "\n";
  return 0;
}

int cmd_metrics(const std::string& log_path, std::size_t window, double tolerance) {
  std::ifstream in(log_path);
  if (!in) {
    std::cerr << "error: cannot read log '" << log_path << "'\n";
    return 1;
  }
  const gridshift::LogMetrics m = gridshift::recompute_metrics(in, window, tolerance);
  nlohmann::json out = {{"run_id", m.run_id},
                        {"novelty", m.novelty},
                        {"seed", m.seed},
                        {"injected", m.injected}};
  if (m.injected) {
    out["resilience"] = m.resilience_value;
    out["one_shot"] = m.one_shot_value;
    out["asymptotic"] = m.asymptotic.above_random;
    out["converged"] = m.asymptotic.converged;
    if (m.efficiency) out["adaptive_efficiency"] = *m.efficiency;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid-world engine for studying mid-training novelty adaptation"};
  app.require_subcommand(1);

  std::string config_path, out_dir, novelty, log_path;
  std::vector<std::uint64_t> seeds;
  long injection_episode = 0;
  std::size_t window = 100;
  double tolerance = 0.05;

  auto* run = app.add_subcommand("run", "train, inject, adapt, and log a run");
  run->add_option("--config", config_path, "experiment config (JSON)")->required();
  run->add_option("--seed", seeds, "seed override (repeatable)");
  run->add_option("--out-dir", out_dir, "output directory override");
  run->add_option("--novelty", novelty, "novelty name override (default params)");
  run->add_option("--injection-episode", injection_episode,
                  "injection episode override");

  auto* classify = app.add_subcommand("classify", "ontology classification only");
  classify->add_option("--config", config_path, "experiment config (JSON)")->required();

  auto* metrics = app.add_subcommand("metrics", "recompute metrics from a log");
  metrics->add_option("--log", log_path, "episode log (JSONL)")->required();
  metrics->add_option("--window", window, "convergence window (episodes)");
  metrics->add_option("--tolerance", tolerance, "convergence tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed())
      return cmd_run(config_path, seeds, out_dir, novelty, injection_episode);
    if (classify->parsed()) return cmd_classify(config_path);
    if (metrics->parsed()) return cmd_metrics(log_path, window, tolerance);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
