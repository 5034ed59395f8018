#pragma once

#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "gridshift/world.hpp"

#include "json.hpp"

namespace gridshift {

enum class NoveltyTarget : std::uint8_t { object, action };
enum class NoveltyArity : std::uint8_t { unary, non_unary };

// How a change moves the optimal solution length: longer, unchanged, shorter.
enum class SolutionEffect : std::uint8_t { barrier, delta, shortcut };

inline const char* to_string(SolutionEffect e) {
  switch (e) {
    case SolutionEffect::barrier: return "barrier";
    case SolutionEffect::delta: return "delta";
    case SolutionEffect::shortcut: return "shortcut";
  }
  return "?";
}

inline const char* to_string(NoveltyTarget t) {
  return t == NoveltyTarget::object ? "object" : "action";
}

inline const char* to_string(NoveltyArity a) {
  return a == NoveltyArity::unary ? "unary" : "non_unary";
}

// One cell of the novelty ontology: what is changed, the arity of the changed
// property, and the declared effect on the solution distribution.
struct OntologyCell {
  NoveltyTarget target = NoveltyTarget::object;
  NoveltyArity arity = NoveltyArity::unary;
  SolutionEffect solution_effect = SolutionEffect::delta;
  friend bool operator==(const OntologyCell&, const OntologyCell&) = default;
};

// A named world transform plus its declared ontology cell. The transform maps
// a pre-novelty config to the post-novelty config; parameters are a JSON
// object validated by the transform itself.
struct NoveltyDescriptor {
  std::string name;
  nlohmann::json parameters = nlohmann::json::object();
  OntologyCell declared_cell;
  std::function<EnvironmentConfig(const EnvironmentConfig&, const nlohmann::json&)>
      transform;

  EnvironmentConfig apply(const EnvironmentConfig& pre) const {
    return transform(pre, parameters);
  }
};

// Quotient search node for the planning oracle: everything that can change
// while an episode runs, and nothing else. The repetition ledger is included
// because command-count optima depend on it whenever an action needs more
// than one consecutive issuance.
struct SearchState {
  Position position;
  Orientation orientation = Orientation::east;
  std::vector<std::pair<Kind, Color>> inventory;           // sorted multiset
  std::vector<std::tuple<int, bool, bool>> doors;          // cell, locked, open
  std::vector<std::tuple<int, Kind, Color>> loose_objects; // carryables on grid
  int ledger_action = -1;  // -1 when no repetition is pending
  int ledger_count = 0;

  static SearchState from_world(const GridWorld& w) {
    SearchState s;
    s.position = w.agent().position;
    s.orientation = w.agent().orientation;
    for (const auto& obj : w.agent().inventory)
      s.inventory.emplace_back(obj.kind, obj.color);
    std::sort(s.inventory.begin(), s.inventory.end());
    const auto& cells = w.cells();
    for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
      if (!cells[i]) continue;
      if (cells[i]->kind == Kind::door)
        s.doors.emplace_back(i, cells[i]->locked, cells[i]->open);
      else if (cells[i]->carryable())
        s.loose_objects.emplace_back(i, cells[i]->kind, cells[i]->color);
    }
    auto [action, count] = w.repetition_ledger();
    if (count > 0) {
      s.ledger_action = static_cast<int>(action);
      s.ledger_count = count;
    }
    return s;
  }

  std::string key() const {
    std::string k;
    k.reserve(16 + 4 * (inventory.size() + doors.size() + loose_objects.size()));
    auto put = [&k](int v) {
      k.push_back(static_cast<char>(v & 0xff));
      k.push_back(static_cast<char>((v >> 8) & 0xff));
    };
    put(position.x);
    put(position.y);
    put(static_cast<int>(orientation));
    for (const auto& [kind, color] : inventory) {
      put(static_cast<int>(kind));
      put(static_cast<int>(color));
    }
    k.push_back('|');
    for (const auto& [cell, locked, open] : doors) {
      put(cell);
      put((locked ? 1 : 0) | (open ? 2 : 0));
    }
    k.push_back('|');
    for (const auto& [cell, kind, color] : loose_objects) {
      put(cell);
      put(static_cast<int>(kind));
      put(static_cast<int>(color));
    }
    k.push_back('|');
    put(ledger_action);
    put(ledger_count);
    return k;
  }
};

namespace detail {

inline void require_oracle_applicable(const EnvironmentConfig& config) {
  if (config.dynamics.determinism_p < 1.0)
    throw OracleError("planning oracle requires deterministic dynamics "
                      "(determinism_p = 1)");
  if (config.layout_seed_policy != LayoutSeedPolicy::fixed)
    throw OracleError("planning oracle requires the fixed layout policy");
  if (config.has_random_elements())
    throw OracleError("planning oracle requires fully fixed placements");
}

}  // namespace detail

// Exact minimum number of issued commands from the start state to the goal,
// by breadth-first search over SearchState. Turns and repetition padding
// count like any other command. Returns nullopt when the goal is unreachable.
//
// drop and done never appear in a shortest plan over this quotient (done has
// no effect; a dropped object could only re-enter a plan through a pickup
// that an undropped inventory already satisfies), so the search expands the
// five remaining commands.
inline std::optional<int> optimal_plan_length(const EnvironmentConfig& config) {
  detail::require_oracle_applicable(config);
  EnvironmentConfig probe = config;
  probe.max_steps = 1 << 30;  // never truncate while planning

  static constexpr Action kPlanActions[] = {Action::turn_left, Action::turn_right,
                                            Action::forward, Action::pickup,
                                            Action::toggle};

  GridWorld start(probe, 0);
  std::unordered_set<std::string> visited;
  visited.insert(SearchState::from_world(start).key());
  std::deque<std::pair<GridWorld, int>> frontier;
  frontier.emplace_back(std::move(start), 0);

  while (!frontier.empty()) {
    auto [world, depth] = std::move(frontier.front());
    frontier.pop_front();
    for (Action a : kPlanActions) {
      GridWorld next = world;
      const StepResult r = next.step(a);
      if (r.terminated) {
        if (r.reward > 0.0) return depth + 1;  // goal; lava ends non-plans
        continue;
      }
      auto key = SearchState::from_world(next).key();
      if (visited.insert(std::move(key)).second)
        frontier.emplace_back(std::move(next), depth + 1);
    }
  }
  return std::nullopt;
}

// Mechanical classification of a change by comparing optimal plan lengths.
// A post-novelty world with an unreachable goal counts as a barrier.
inline SolutionEffect classify_solution_effect(const EnvironmentConfig& pre,
                                               const EnvironmentConfig& post) {
  const auto pre_len = optimal_plan_length(pre);
  if (!pre_len)
    throw ConfigError("goal is unreachable before the change; nothing to classify");
  const auto post_len = optimal_plan_length(post);
  if (!post_len || *post_len > *pre_len) return SolutionEffect::barrier;
  if (*post_len < *pre_len) return SolutionEffect::shortcut;
  return SolutionEffect::delta;
}

enum class DeclarationVerdict : std::uint8_t { match, mismatch, unverifiable };

inline const char* to_string(DeclarationVerdict v) {
  switch (v) {
    case DeclarationVerdict::match: return "match";
    case DeclarationVerdict::mismatch: return "mismatch";
    case DeclarationVerdict::unverifiable: return "unverifiable";
  }
  return "?";
}

// Oracle cross-check of a declared solution effect on one concrete layout.
// A mismatch is a report, not an error: the realized effect depends on the
// layout the transform is applied to.
struct DeclarationReport {
  std::string novelty;
  OntologyCell declared;
  std::optional<SolutionEffect> oracle_effect;
  DeclarationVerdict verdict = DeclarationVerdict::unverifiable;
  std::optional<int> pre_length;
  std::optional<int> post_length;
};

inline DeclarationReport validate_declaration(const NoveltyDescriptor& descriptor,
                                              const EnvironmentConfig& pre) {
  DeclarationReport report;
  report.novelty = descriptor.name;
  report.declared = descriptor.declared_cell;
  const EnvironmentConfig post = descriptor.apply(pre);
  try {
    report.pre_length = optimal_plan_length(pre);
    report.post_length = optimal_plan_length(post);
    report.oracle_effect = classify_solution_effect(pre, post);
    report.verdict = *report.oracle_effect == descriptor.declared_cell.solution_effect
                         ? DeclarationVerdict::match
                         : DeclarationVerdict::mismatch;
  } catch (const OracleError&) {
    report.verdict = DeclarationVerdict::unverifiable;
  }
  return report;
}

}  // namespace gridshift
