#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "gridshift/agents.hpp"
#include "gridshift/catalog.hpp"
#include "gridshift/injection.hpp"
#include "gridshift/layout.hpp"
#include "gridshift/metrics.hpp"

#include "json.hpp"

namespace gridshift {

// Verbosity is controlled by the GRIDSHIFT_LOG environment variable only:
// quiet (default), info, debug.
inline int log_level() {
  static const int level = [] {
    const char* v = std::getenv("GRIDSHIFT_LOG");
    if (!v) return 0;
    const std::string s(v);
    if (s == "debug") return 2;
    if (s == "info") return 1;
    return 0;
  }();
  return level;
}

inline void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[gridshift] " << msg << "\n";
}

struct EvalProtocol {
  long cadence_episodes = 50;
  long episodes = 20;
};

struct AgentConfig {
  std::string name = "qlearning";
  double alpha = 0.1;
  double gamma = 0.95;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.2;  // of total_timesteps
  bool rewarm_on_injection = true;
  double rewarm_epsilon = 0.5;
  double rewarm_decay_fraction = 0.2;  // of total_timesteps, from injection
};

struct ExperimentConfig {
  std::string run_id = "run";
  std::string layout_name;  // empty for inline layouts
  EnvironmentConfig layout;
  std::string novelty_name;
  nlohmann::json novelty_params = nlohmann::json::object();
  long injection_episode = 1;
  AgentConfig agent;
  long total_timesteps = 0;
  EvalProtocol eval;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "out";
  long smoothing_window = 100;
  std::size_t convergence_window = 100;
  double convergence_tolerance = 0.05;
};

// One completed episode, training or evaluation. Training budgets are counted
// in timesteps while injection is scheduled in episodes, so records carry
// both coordinates.
struct EpisodeRecord {
  long episode = 0;    // training episodes completed before this record's reset
  long timestep = 0;   // cumulative training timesteps at that reset
  double ret = 0.0;
  long steps = 0;
  bool post_novelty = false;
  bool evaluation = false;
  std::uint64_t seed = 0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<EpisodeRecord> records;  // chronological, training + evaluation
  PerformanceCurve training_curve;
  PerformanceCurve eval_curve;  // one point per evaluation block
  bool injected = false;
  long injection_timestep = -1;
  long episodes = 0;
  long steps = 0;
  EvalSummary random_post{0.0, 0.0, 1};
  double pre_final_mean = 0.0;
  double post_frozen_mean = 0.0;
  double one_shot_mean = 0.0;
  double final_mean = 0.0;
  double resilience_value = 0.0;
  double one_shot_value = 0.0;
  AsymptoticResult asymptotic;
  std::optional<long> efficiency;
  std::optional<long> convergence_episode;
};

struct ValidationReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  bool ok() const { return violations.empty(); }
};

// ---- Config file parsing ---------------------------------------------------

inline DynamicsParams parse_dynamics(const nlohmann::json& j) {
  DynamicsParams dyn;
  for (const auto& [key, value] : j.items()) {
    if (key == "forward_step") dyn.forward_step = value.get<int>();
    else if (key == "action_radius") dyn.action_radius = value.get<int>();
    else if (key == "determinism_p") dyn.determinism_p = value.get<double>();
    else if (key == "lava_harmful") dyn.lava_harmful = value.get<bool>();
    else if (key == "inventory_capacity") dyn.inventory_capacity = value.get<int>();
    else if (key == "color_allowlist") {
      std::set<Color> allowed;
      for (const auto& c : value) allowed.insert(parse_color_name(c.get<std::string>()));
      dyn.color_allowlist = std::move(allowed);
    } else if (key == "action_repetition") {
      for (const auto& [action, count] : value.items())
        dyn.action_repetition[static_cast<int>(parse_action_name(action))] =
            count.get<int>();
    } else if (key == "burdening") {
      dyn.burdening = BurdeningProfile{value.at("empty_forward_step").get<int>(),
                                       value.at("laden_repetition").get<int>()};
    } else {
      throw ConfigError("unknown dynamics field '" + key + "'");
    }
  }
  return dyn;
}

namespace detail {
inline void reject_unknown_keys(const nlohmann::json& j, const char* where,
                                std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::find_if(known.begin(), known.end(),
                     [&key](const char* k) { return key == k; }) == known.end())
      throw ConfigError(std::string(where) + ": unknown field '" + key + "'");
  }
}
}  // namespace detail

inline EnvironmentConfig parse_layout_json(const nlohmann::json& j,
                                           std::string* name_out) {
  if (j.is_string()) {
    if (name_out) *name_out = j.get<std::string>();
    return builtin_layout(j.get<std::string>());
  }
  if (!j.is_object() || !j.contains("map"))
    throw ConfigError("layout must be a builtin name or an object with a map");
  detail::reject_unknown_keys(j, "layout",
                              {"map", "doors", "max_steps", "layout_seed_policy",
                               "egocentric_view", "egocentric_size", "dynamics"});
  EnvironmentConfig cfg = parse_layout(j["map"].get<std::vector<std::string>>());
  if (j.contains("doors")) {
    for (const auto& [id, req] : j["doors"].items()) {
      DoorRequirement r;
      if (req.contains("required_color"))
        r.required_color = parse_color_name(req["required_color"].get<std::string>());
      if (req.contains("keys_required")) r.keys_required = req["keys_required"].get<int>();
      if (req.contains("locked")) r.locked = req["locked"].get<bool>();
      cfg.door_requirements[id] = r;
    }
  }
  if (j.contains("max_steps")) cfg.max_steps = j["max_steps"].get<int>();
  if (j.contains("layout_seed_policy"))
    cfg.layout_seed_policy = j["layout_seed_policy"] == "per_episode_random"
                                 ? LayoutSeedPolicy::per_episode_random
                                 : LayoutSeedPolicy::fixed;
  if (j.contains("egocentric_view")) cfg.egocentric_view = j["egocentric_view"].get<bool>();
  if (j.contains("egocentric_size")) cfg.egocentric_size = j["egocentric_size"].get<int>();
  if (j.contains("dynamics")) {
    DynamicsParams dyn = parse_dynamics(j["dynamics"]);
    cfg.dynamics = dyn;
  }
  cfg.validate();
  return cfg;
}

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  ExperimentConfig cfg;
  detail::reject_unknown_keys(
      j, "config",
      {"run_id", "layout", "novelty", "injection_episode", "agent",
       "total_timesteps", "evaluation", "seeds", "out_dir", "smoothing_window",
       "convergence_window", "convergence_tolerance"});
  if (j.contains("run_id")) cfg.run_id = j["run_id"].get<std::string>();
  if (!j.contains("layout")) throw ConfigError("config needs a layout");
  cfg.layout = parse_layout_json(j["layout"], &cfg.layout_name);
  if (!j.contains("novelty") || !j["novelty"].contains("name"))
    throw ConfigError("config needs a novelty name");
  detail::reject_unknown_keys(j["novelty"], "novelty", {"name", "params"});
  cfg.novelty_name = j["novelty"]["name"].get<std::string>();
  if (j["novelty"].contains("params")) cfg.novelty_params = j["novelty"]["params"];
  if (j.contains("injection_episode"))
    cfg.injection_episode = j["injection_episode"].get<long>();
  if (j.contains("total_timesteps"))
    cfg.total_timesteps = j["total_timesteps"].get<long>();
  if (j.contains("agent")) {
    const auto& a = j["agent"];
    detail::reject_unknown_keys(
        a, "agent",
        {"name", "alpha", "gamma", "epsilon_start", "epsilon_end",
         "epsilon_decay_fraction", "rewarm_on_injection", "rewarm_epsilon",
         "rewarm_decay_fraction"});
    if (a.contains("name")) cfg.agent.name = a["name"].get<std::string>();
    if (a.contains("alpha")) cfg.agent.alpha = a["alpha"].get<double>();
    if (a.contains("gamma")) cfg.agent.gamma = a["gamma"].get<double>();
    if (a.contains("epsilon_start")) cfg.agent.epsilon_start = a["epsilon_start"].get<double>();
    if (a.contains("epsilon_end")) cfg.agent.epsilon_end = a["epsilon_end"].get<double>();
    if (a.contains("epsilon_decay_fraction"))
      cfg.agent.epsilon_decay_fraction = a["epsilon_decay_fraction"].get<double>();
    if (a.contains("rewarm_on_injection"))
      cfg.agent.rewarm_on_injection = a["rewarm_on_injection"].get<bool>();
    if (a.contains("rewarm_epsilon")) cfg.agent.rewarm_epsilon = a["rewarm_epsilon"].get<double>();
    if (a.contains("rewarm_decay_fraction"))
      cfg.agent.rewarm_decay_fraction = a["rewarm_decay_fraction"].get<double>();
  }
  if (j.contains("evaluation")) {
    const auto& e = j["evaluation"];
    detail::reject_unknown_keys(e, "evaluation", {"cadence_episodes", "episodes"});
    if (e.contains("cadence_episodes")) cfg.eval.cadence_episodes = e["cadence_episodes"].get<long>();
    if (e.contains("episodes")) cfg.eval.episodes = e["episodes"].get<long>();
  }
  if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  if (j.contains("smoothing_window")) cfg.smoothing_window = j["smoothing_window"].get<long>();
  if (j.contains("convergence_window"))
    cfg.convergence_window = j["convergence_window"].get<std::size_t>();
  if (j.contains("convergence_tolerance"))
    cfg.convergence_tolerance = j["convergence_tolerance"].get<double>();
  return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_experiment_config(j);
}

// All cross-field checks, reported before any training runs.
inline ValidationReport validate_config(const ExperimentConfig& cfg) {
  ValidationReport report;
  try {
    cfg.layout.validate();
  } catch (const ConfigError& e) {
    report.violations.push_back(std::string("layout: ") + e.what());
  }
  const CatalogEntry* entry = find_catalog_entry(cfg.novelty_name);
  if (!entry) {
    report.violations.push_back("unknown novelty '" + cfg.novelty_name +
                                "'; nearest catalog name is '" +
                                nearest_novelty_name(cfg.novelty_name) + "'");
  } else {
    try {
      const NoveltyDescriptor d = make_descriptor(cfg.novelty_name, cfg.novelty_params);
      const EnvironmentConfig post = d.apply(cfg.layout);
      post.validate();
    } catch (const TransformError& e) {
      report.violations.push_back(std::string("novelty: ") + e.what());
    } catch (const ConfigError& e) {
      report.violations.push_back(std::string("post-novelty layout: ") + e.what());
    }
  }
  if (cfg.total_timesteps <= 0)
    report.violations.push_back("total_timesteps must be positive");
  if (cfg.injection_episode < 1)
    report.violations.push_back("injection_episode must be >= 1");
  if (cfg.seeds.empty())
    report.violations.push_back("at least one seed is required");
  if (std::set<std::uint64_t>(cfg.seeds.begin(), cfg.seeds.end()).size() !=
      cfg.seeds.size())
    report.violations.push_back("seeds must be distinct");
  if (cfg.eval.episodes < 1 || cfg.eval.cadence_episodes < 1)
    report.violations.push_back("evaluation cadence and episode count must be >= 1");
  if (cfg.agent.name != "qlearning" && cfg.agent.name != "random")
    report.violations.push_back("unknown agent '" + cfg.agent.name + "'");
  if (cfg.convergence_window < 1 || !(cfg.convergence_tolerance > 0.0) ||
      cfg.smoothing_window < 1)
    report.violations.push_back("analysis windows must be >= 1 and tolerance > 0");

  if (cfg.total_timesteps > 0 && cfg.injection_episode > cfg.total_timesteps)
    report.violations.push_back(
        "injection_episode exceeds the maximum possible episode count");
  else if (cfg.total_timesteps > 0) {
    const long guaranteed =
        cfg.total_timesteps / std::max(1, cfg.layout.resolved_max_steps());
    if (cfg.injection_episode > guaranteed)
      report.warnings.push_back(
          "injection_episode " + std::to_string(cfg.injection_episode) +
          " is only reached if episodes average fewer than " +
          std::to_string(cfg.layout.resolved_max_steps()) + " steps (" +
          std::to_string(guaranteed) + " episodes are guaranteed)");
  }
  return report;
}

// ---- Per-seed training ------------------------------------------------------

namespace detail {

inline double run_frozen_episode(GridWorld& env, const FrozenPolicy& policy,
                                 Rng& rng, long* steps_out) {
  Observation obs = env.observe();
  double ret = 0.0;
  long steps = 0;
  while (true) {
    const StepResult r = env.step(policy.act(obs, rng));
    ret += r.reward;
    ++steps;
    obs = r.observation;
    if (r.terminated || r.truncated) break;
  }
  if (steps_out) *steps_out = steps;
  return ret;
}

}  // namespace detail

inline SeedResult run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedResult result;
  result.seed = seed;

  const NoveltyDescriptor descriptor =
      make_descriptor(cfg.novelty_name, cfg.novelty_params);
  WrappedEnvironment env(cfg.layout, descriptor,
                         NoveltySchedule{cfg.injection_episode},
                         Rng::derive(seed, 21));
  Rng agent_rng(Rng::derive(seed, 22));

  const long decay_horizon = std::max<long>(
      1, static_cast<long>(cfg.agent.epsilon_decay_fraction * cfg.total_timesteps));
  std::unique_ptr<AgentPolicy> agent;
  QLearningAgent* learner = nullptr;
  if (cfg.agent.name == "random") {
    agent = std::make_unique<RandomAgent>();
  } else {
    auto q = std::make_unique<QLearningAgent>(
        cfg.agent.alpha, cfg.agent.gamma,
        EpsilonSchedule{cfg.agent.epsilon_start, cfg.agent.epsilon_end, 0,
                        decay_horizon});
    learner = q.get();
    agent = std::move(q);
  }

  long episode = 0;
  long steps_total = 0;
  int eval_index = 0;

  // Frozen-policy evaluation on a cloned environment with dedicated seeds;
  // never advances the wrapper's episode counter. When asked, runs the random
  // baseline over the identical environment sequence.
  auto eval_block = [&](const EnvironmentConfig& phase_cfg, bool post_flag,
                        EvalSummary* random_out) {
    const int block = eval_index++;
    const auto frozen = agent->freeze();
    std::vector<double> returns;
    returns.reserve(cfg.eval.episodes);
    for (long i = 0; i < cfg.eval.episodes; ++i) {
      const std::uint64_t eval_seed =
          Rng::derive(Rng::derive(seed, 31), block * 100003 + i);
      GridWorld eval_env(phase_cfg, eval_seed);
      Rng eval_rng(Rng::derive(eval_seed, 7));
      long steps = 0;
      const double ret =
          detail::run_frozen_episode(eval_env, *frozen, eval_rng, &steps);
      returns.push_back(ret);
      result.records.push_back(
          {episode, steps_total, ret, steps, post_flag, true, seed});
    }
    if (random_out) {
      const RandomAgent random_agent;
      const auto frozen_random = random_agent.freeze();
      std::vector<double> random_returns;
      random_returns.reserve(cfg.eval.episodes);
      for (long i = 0; i < cfg.eval.episodes; ++i) {
        const std::uint64_t eval_seed =
            Rng::derive(Rng::derive(seed, 31), block * 100003 + i);
        GridWorld eval_env(phase_cfg, eval_seed);
        Rng eval_rng(Rng::derive(eval_seed, 9));
        random_returns.push_back(
            detail::run_frozen_episode(eval_env, *frozen_random, eval_rng, nullptr));
      }
      *random_out = summarize(random_returns);
    }
    const EvalSummary summary = summarize(returns);
    result.eval_curve.push_back({episode, steps_total, summary.mean, post_flag});
    return summary;
  };

  while (steps_total < cfg.total_timesteps) {
    if (episode + 1 == cfg.injection_episode) {
      result.pre_final_mean = eval_block(env.pre_config(), false, nullptr).mean;
      result.post_frozen_mean =
          eval_block(env.post_config(), true, &result.random_post).mean;
      result.injected = true;
      result.injection_timestep = steps_total;
      if (learner && cfg.agent.rewarm_on_injection)
        learner->rewarm(cfg.agent.rewarm_epsilon,
                        std::max<long>(1, static_cast<long>(
                                             cfg.agent.rewarm_decay_fraction *
                                             cfg.total_timesteps)));
    }

    const long episode_start = steps_total;
    Observation obs = env.reset();
    ++episode;
    agent->begin_episode();
    double ret = 0.0;
    long steps = 0;
    while (true) {
      const Action a = agent->act(obs, agent_rng);
      const StepResult r = env.step(a);
      agent->observe({obs, a, r.reward, r.observation, r.terminated});
      obs = r.observation;
      ret += r.reward;
      ++steps;
      if (r.terminated || r.truncated) break;
    }
    steps_total += steps;
    const bool post = env.is_post_novelty();
    result.records.push_back({episode, episode_start, ret, steps, post, false, seed});
    result.training_curve.push_back({episode, episode_start, ret, post});

    if (episode == cfg.injection_episode)
      result.one_shot_mean = eval_block(env.post_config(), true, nullptr).mean;
    else if (episode % cfg.eval.cadence_episodes == 0)
      eval_block(post ? env.post_config() : env.pre_config(), post, nullptr);
  }

  const bool post_now = env.is_post_novelty();
  EvalSummary* random_out = result.injected ? nullptr : &result.random_post;
  result.final_mean =
      eval_block(post_now ? env.post_config() : env.pre_config(), post_now,
                 random_out)
          .mean;
  result.episodes = episode;
  result.steps = steps_total;

  if (result.injected) {
    result.resilience_value = resilience(
        EvalSummary{result.post_frozen_mean, 0.0, cfg.eval.episodes},
        result.random_post);
    result.one_shot_value = one_shot_adaptive_performance(result.eval_curve);
    const PerformanceCurve post_part = post_novelty_part(result.training_curve);
    if (post_part.size() >= cfg.convergence_window) {
      result.asymptotic = asymptotic_adaptive_performance(
          result.training_curve, result.random_post, cfg.convergence_window,
          cfg.convergence_tolerance);
      result.efficiency = adaptive_efficiency(
          result.training_curve, cfg.convergence_window, cfg.convergence_tolerance);
      const auto idx = detect_convergence(post_part, cfg.convergence_window,
                                          cfg.convergence_tolerance);
      if (idx) result.convergence_episode = post_part[*idx].episode;
    } else {
      // Too little post-novelty data for the window: report the plain tail
      // mean and leave the run flagged as not converged.
      double sum = 0.0;
      for (const auto& p : post_part) sum += p.ret;
      result.asymptotic = {false, post_part.empty()
                                      ? -result.random_post.mean
                                      : sum / post_part.size() - result.random_post.mean};
    }
  }
  return result;
}

// ---- Artifact writers --------------------------------------------------------

inline std::string format_double(double v) {
  nlohmann::json j = v;
  return j.dump();
}

inline void write_episode_log(std::ostream& out, const ExperimentConfig& cfg,
                              const SeedResult& r) {
  using nlohmann::json;
  for (const auto& rec : r.records) {
    json line = {{"type", "episode"},       {"episode", rec.episode},
                 {"timestep", rec.timestep}, {"return", rec.ret},
                 {"steps", rec.steps},       {"post_novelty", rec.post_novelty},
                 {"eval", rec.evaluation},   {"seed", rec.seed}};
    out << line.dump() << "\n";
  }
  json meta = {{"type", "run_meta"},
               {"run_id", cfg.run_id},
               {"layout", cfg.layout_name.empty() ? "inline" : cfg.layout_name},
               {"novelty", cfg.novelty_name},
               {"seed", r.seed},
               {"injection_episode", cfg.injection_episode},
               {"injected", r.injected},
               {"injection_timestep", r.injection_timestep},
               {"random_post_mean", r.random_post.mean},
               {"random_post_episodes", r.random_post.episodes},
               {"eval_cadence", cfg.eval.cadence_episodes},
               {"eval_episodes", cfg.eval.episodes},
               {"total_timesteps", cfg.total_timesteps},
               {"convergence_window", cfg.convergence_window},
               {"convergence_tolerance", cfg.convergence_tolerance}};
  out << meta.dump() << "\n";
}

inline void write_metrics_csv(std::ostream& out, const ExperimentConfig& cfg,
                              const std::vector<SeedResult>& results) {
  out << "run_id,novelty,seed,resilience,one_shot,asymptotic,adaptive_efficiency,"
         "converged\n";
  for (const auto& r : results) {
    out << cfg.run_id << ',' << cfg.novelty_name << ',' << r.seed << ','
        << format_double(r.resilience_value) << ','
        << format_double(r.one_shot_value) << ','
        << format_double(r.asymptotic.above_random) << ',';
    if (r.efficiency) out << *r.efficiency;
    out << ',' << (r.asymptotic.converged ? "true" : "false") << "\n";
  }
}

// Per-seed and seed-averaged smoothed training returns against timesteps,
// with the injection timestep in a dedicated column. Rows cover the episode
// range every seed reached.
inline void emit_plot_data(std::ostream& out, const ExperimentConfig& cfg,
                           const std::vector<SeedResult>& results) {
  if (results.empty()) throw std::invalid_argument("no logs to plot");
  std::size_t rows = SIZE_MAX;
  for (const auto& r : results)
    rows = std::min(rows, r.training_curve.size());
  if (rows == 0 || rows == SIZE_MAX)
    throw std::invalid_argument("no training episodes to plot");

  double injection_mean = 0.0;
  long injected = 0;
  for (const auto& r : results)
    if (r.injected) {
      injection_mean += static_cast<double>(r.injection_timestep);
      ++injected;
    }
  injection_mean = injected ? injection_mean / injected : -1.0;

  out << "episode,timestep_mean";
  for (const auto& r : results) out << ",return_s" << r.seed;
  out << ",return_mean,post_novelty,injection_timestep_mean\n";

  std::vector<double> window_sums(results.size(), 0.0);
  std::vector<std::vector<double>> smoothed(results.size());
  for (std::size_t s = 0; s < results.size(); ++s) {
    const auto& curve = results[s].training_curve;
    smoothed[s].resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      window_sums[s] += curve[i].ret;
      if (i >= static_cast<std::size_t>(cfg.smoothing_window))
        window_sums[s] -= curve[i - cfg.smoothing_window].ret;
      const std::size_t span = std::min<std::size_t>(i + 1, cfg.smoothing_window);
      smoothed[s][i] = window_sums[s] / span;
    }
  }

  for (std::size_t i = 0; i < rows; ++i) {
    double ts = 0.0, mean = 0.0;
    bool post = true;
    for (std::size_t s = 0; s < results.size(); ++s) {
      ts += static_cast<double>(results[s].training_curve[i].timestep);
      mean += smoothed[s][i];
      post = post && results[s].training_curve[i].post_novelty;
    }
    out << (i + 1) << ',' << format_double(ts / results.size());
    for (std::size_t s = 0; s < results.size(); ++s)
      out << ',' << format_double(smoothed[s][i]);
    out << ',' << format_double(mean / results.size()) << ',' << (post ? 1 : 0)
        << ',' << format_double(injection_mean) << "\n";
  }
}

inline nlohmann::json declaration_report_json(const ExperimentConfig& cfg) {
  using nlohmann::json;
  json report;
  report["novelty"] = canonical_novelty_name(cfg.novelty_name);
  try {
    const NoveltyDescriptor d = make_descriptor(cfg.novelty_name, cfg.novelty_params);
    report["parameters"] = d.parameters;
    report["declared"] = {{"target", to_string(d.declared_cell.target)},
                          {"arity", to_string(d.declared_cell.arity)},
                          {"solution_effect", to_string(d.declared_cell.solution_effect)}};
    const DeclarationReport r = validate_declaration(d, cfg.layout);
    report["verdict"] = to_string(r.verdict);
    if (r.oracle_effect) report["oracle_effect"] = to_string(*r.oracle_effect);
    if (r.pre_length) report["pre_plan_length"] = *r.pre_length;
    if (r.post_length)
      report["post_plan_length"] = *r.post_length;
    else if (r.pre_length)
      report["post_plan_length"] = "unreachable";
  } catch (const std::exception& e) {
    report["verdict"] = "unverifiable";
    report["error"] = e.what();
  }
  return report;
}

struct RunArtifacts {
  std::vector<SeedResult> results;
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> episode_logs;
};

// Full protocol: for each seed, train on the wrapped environment until the
// timestep budget is consumed, evaluating on cadence plus the mandatory
// points around the injection; then write logs, metric summary, plot data,
// and the classification report. Seeds run in parallel workers; every
// emitted byte is a function of (config, seed).
inline RunArtifacts run_experiment(const ExperimentConfig& cfg) {
  const ValidationReport report = validate_config(cfg);
  if (!report.ok()) {
    std::string msg = "invalid experiment config:";
    for (const auto& v : report.violations) msg += "\n  - " + v;
    throw ConfigError(msg);
  }
  for (const auto& w : report.warnings) log_info("warning: " + w);

  RunArtifacts artifacts;
  artifacts.results.resize(cfg.seeds.size());
  std::vector<std::exception_ptr> errors(cfg.seeds.size());
  std::vector<std::thread> workers;
  workers.reserve(cfg.seeds.size());
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    workers.emplace_back([&cfg, &artifacts, &errors, i] {
      try {
        artifacts.results[i] = run_seed(cfg, cfg.seeds[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  const std::filesystem::path out_dir(cfg.out_dir);
  std::filesystem::create_directories(out_dir);
  artifacts.out_dir = out_dir;

  for (const auto& r : artifacts.results) {
    const auto path = out_dir / ("episodes_seed" + std::to_string(r.seed) + ".jsonl");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_episode_log(out, cfg, r);
    artifacts.episode_logs.push_back(path);
    log_info("seed " + std::to_string(r.seed) + ": " +
             std::to_string(r.episodes) + " episodes, " + std::to_string(r.steps) +
             " steps, final eval mean " + format_double(r.final_mean));
  }
  {
    std::ofstream out(out_dir / "metrics.csv", std::ios::binary);
    write_metrics_csv(out, cfg, artifacts.results);
  }
  {
    std::ofstream out(out_dir / "curve.csv", std::ios::binary);
    emit_plot_data(out, cfg, artifacts.results);
  }
  {
    std::ofstream out(out_dir / "classification.json", std::ios::binary);
    out << declaration_report_json(cfg).dump(2) << "\n";
  }
  {
    using nlohmann::json;
    json summary;
    summary["run_id"] = cfg.run_id;
    summary["layout"] = cfg.layout_name.empty() ? "inline" : cfg.layout_name;
    summary["novelty"] = canonical_novelty_name(cfg.novelty_name);
    summary["injection_episode"] = cfg.injection_episode;
    summary["total_timesteps"] = cfg.total_timesteps;
    json per_seed = json::array();
    for (const auto& r : artifacts.results) {
      json s = {{"seed", r.seed},
                {"episodes", r.episodes},
                {"steps", r.steps},
                {"injected", r.injected},
                {"injection_timestep", r.injection_timestep},
                {"pre_final_mean", r.pre_final_mean},
                {"post_frozen_mean", r.post_frozen_mean},
                {"one_shot_mean", r.one_shot_mean},
                {"final_mean", r.final_mean},
                {"random_post_mean", r.random_post.mean},
                {"resilience", r.resilience_value},
                {"one_shot", r.one_shot_value},
                {"asymptotic", r.asymptotic.above_random},
                {"converged", r.asymptotic.converged}};
      if (r.efficiency) s["adaptive_efficiency"] = *r.efficiency;
      if (r.convergence_episode) s["convergence_episode"] = *r.convergence_episode;
      per_seed.push_back(std::move(s));
    }
    summary["seeds"] = std::move(per_seed);
    std::ofstream out(out_dir / "summary.json", std::ios::binary);
    out << summary.dump(2) << "\n";
  }
  return artifacts;
}

// ---- Metric recomputation from an existing log -------------------------------

struct LogMetrics {
  std::uint64_t seed = 0;
  std::string run_id;
  std::string novelty;
  bool injected = false;
  double resilience_value = 0.0;
  double one_shot_value = 0.0;
  AsymptoticResult asymptotic;
  std::optional<long> efficiency;
  bool has_eval_metrics = false;
};

inline LogMetrics recompute_metrics(std::istream& in,
                                    std::size_t convergence_window = 100,
                                    double convergence_tolerance = 0.05) {
  using nlohmann::json;
  PerformanceCurve training;
  PerformanceCurve eval_points;
  std::optional<json> meta;
  // Consecutive eval records sharing (episode, timestep, flag) form one block.
  double block_sum = 0.0;
  long block_n = 0;
  CurvePoint block_head;
  auto flush_block = [&] {
    if (block_n > 0)
      eval_points.push_back(
          {block_head.episode, block_head.timestep, block_sum / block_n,
           block_head.post_novelty});
    block_n = 0;
    block_sum = 0.0;
  };

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    const std::string type = j.value("type", "");
    if (type == "run_meta") {
      meta = j;
      continue;
    }
    if (type != "episode") continue;
    CurvePoint p{j.at("episode").get<long>(), j.at("timestep").get<long>(),
                 j.at("return").get<double>(), j.at("post_novelty").get<bool>()};
    if (j.at("eval").get<bool>()) {
      if (block_n > 0 && (p.episode != block_head.episode ||
                          p.timestep != block_head.timestep ||
                          p.post_novelty != block_head.post_novelty))
        flush_block();
      if (block_n == 0) block_head = p;
      block_sum += p.ret;
      ++block_n;
    } else {
      flush_block();
      training.push_back(p);
    }
  }
  flush_block();
  if (!meta) throw ConfigError("log has no run_meta record");

  LogMetrics m;
  m.seed = meta->value("seed", std::uint64_t{0});
  m.run_id = meta->value("run_id", "");
  m.novelty = meta->value("novelty", "");
  m.injected = meta->value("injected", false);
  if (!m.injected) return m;

  const EvalSummary random_post{meta->value("random_post_mean", 0.0), 0.0,
                                meta->value("random_post_episodes", 1L)};
  const PerformanceCurve post_evals = post_novelty_part(eval_points);
  if (!post_evals.empty()) {
    m.resilience_value =
        resilience(EvalSummary{post_evals.front().ret, 0.0, 1}, random_post);
    if (post_evals.size() >= 2) {
      m.one_shot_value = one_shot_adaptive_performance(eval_points);
      m.has_eval_metrics = true;
    }
  }
  const PerformanceCurve post_train = post_novelty_part(training);
  if (post_train.size() >= convergence_window) {
    m.asymptotic = asymptotic_adaptive_performance(
        training, random_post, convergence_window, convergence_tolerance);
    m.efficiency =
        adaptive_efficiency(training, convergence_window, convergence_tolerance);
  }
  return m;
}

}  // namespace gridshift
