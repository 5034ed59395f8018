#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gridshift/types.hpp"

namespace gridshift {

// Inventory-dependent movement: with an empty inventory `forward` covers
// empty_forward_step cells per firing; with a non-empty inventory it must be
// issued laden_repetition consecutive times per one-cell move.
struct BurdeningProfile {
  int empty_forward_step = 1;
  int laden_repetition = 1;
  friend bool operator==(const BurdeningProfile&, const BurdeningProfile&) = default;
};

// Every dynamics knob a novelty transform can touch.
struct DynamicsParams {
  int forward_step = 1;
  std::array<int, kActionCount> action_repetition = {1, 1, 1, 1, 1, 1, 1};
  int action_radius = 1;
  double determinism_p = 1.0;
  std::optional<std::set<Color>> color_allowlist;  // nullopt = every color
  bool lava_harmful = true;
  std::optional<BurdeningProfile> burdening;
  int inventory_capacity = 1;

  friend bool operator==(const DynamicsParams&, const DynamicsParams&) = default;

  int repetition_for(Action a) const {
    return action_repetition[static_cast<int>(a)];
  }

  bool color_allowed(Color c) const {
    return !color_allowlist || color_allowlist->count(c) > 0;
  }
};

// One object in the declarative layout. A missing position means "draw a free
// cell at generation time". Doors carry an id linking them to a requirement.
struct Placement {
  Kind kind = Kind::floor;
  Color color = Color::grey;
  std::optional<Position> position;
  std::string door_id;  // doors only

  friend bool operator==(const Placement&, const Placement&) = default;
};

// How a locked door opens: the agent must hold keys_required keys of
// required_color when toggling. Doors without an entry are plain unlocked
// doors.
struct DoorRequirement {
  Color required_color = Color::yellow;
  int keys_required = 1;
  bool locked = true;
  friend bool operator==(const DoorRequirement&, const DoorRequirement&) = default;
};

struct AgentStart {
  std::optional<Position> position;        // nullopt = random free cell
  std::optional<Orientation> orientation;  // nullopt = random
  friend bool operator==(const AgentStart&, const AgentStart&) = default;
};

enum class LayoutSeedPolicy : std::uint8_t { fixed, per_episode_random };

// The full declarative world + dynamics description. A pre-novelty config and
// the transformed post-novelty config are both instances of this type.
struct EnvironmentConfig {
  int width = 0;
  int height = 0;
  bool perimeter_walls = true;
  std::vector<Placement> placements;
  std::map<std::string, DoorRequirement> door_requirements;
  std::string mission = "reach_goal";
  int max_steps = 0;  // 0 resolves to 4 * width * height
  DynamicsParams dynamics;
  AgentStart agent_start;
  LayoutSeedPolicy layout_seed_policy = LayoutSeedPolicy::fixed;
  bool egocentric_view = false;
  int egocentric_size = 7;

  friend bool operator==(const EnvironmentConfig&, const EnvironmentConfig&) = default;

  int resolved_max_steps() const {
    return max_steps > 0 ? max_steps : 4 * width * height;
  }

  bool in_bounds(Position p) const {
    return p.x >= 0 && p.x < width && p.y >= 0 && p.y < height;
  }

  bool has_random_elements() const {
    if (!agent_start.position || !agent_start.orientation) return true;
    for (const auto& pl : placements)
      if (!pl.position) return true;
    return false;
  }

  int count_keys(Color c) const {
    int n = 0;
    for (const auto& pl : placements)
      if (pl.kind == Kind::key && pl.color == c) ++n;
    return n;
  }

  const Placement* find_door(const std::string& id) const {
    for (const auto& pl : placements)
      if (pl.kind == Kind::door && pl.door_id == id) return &pl;
    return nullptr;
  }

  // Structural invariants that do not depend on randomized positions.
  // Throws ConfigError naming the violation.
  void validate() const {
    if (width < 1 || height < 1)
      throw ConfigError("grid dimensions must be positive");
    if (max_steps < 0) throw ConfigError("max_steps must be positive");
    const auto& d = dynamics;
    if (d.forward_step < 1) throw ConfigError("forward_step must be >= 1");
    for (int r : d.action_repetition)
      if (r < 1) throw ConfigError("action_repetition counts must be >= 1");
    if (d.action_radius < 0) throw ConfigError("action_radius must be >= 0");
    if (!(d.determinism_p > 0.0 && d.determinism_p <= 1.0))
      throw ConfigError("determinism_p must be in (0, 1]");
    if (d.inventory_capacity < 1)
      throw ConfigError("inventory_capacity must be >= 1");
    if (d.color_allowlist && d.color_allowlist->empty())
      throw ConfigError("color_allowlist must not be empty");
    if (d.burdening) {
      if (d.burdening->empty_forward_step < 1 || d.burdening->laden_repetition < 1)
        throw ConfigError("burdening parameters must be >= 1");
    }

    int goals = 0;
    for (const auto& pl : placements) {
      if (pl.kind == Kind::goal) ++goals;
      if (pl.position && !in_bounds(*pl.position))
        throw ConfigError(std::string(to_string(pl.kind)) + " placement at (" +
                          std::to_string(pl.position->x) + "," +
                          std::to_string(pl.position->y) + ") is out of bounds");
      if (pl.kind == Kind::door && pl.door_id.empty())
        throw ConfigError("door placement without an id");
    }
    if (goals != 1)
      throw ConfigError("layout must contain exactly one goal, found " +
                        std::to_string(goals));
    if (agent_start.position && !in_bounds(*agent_start.position))
      throw ConfigError("agent start is out of bounds");

    for (const auto& [id, req] : door_requirements) {
      if (!find_door(id))
        throw ConfigError("door requirement refers to unknown door '" + id + "'");
      if (req.keys_required < 1)
        throw ConfigError("keys_required must be >= 1 for door '" + id + "'");
      if (req.locked && count_keys(req.required_color) < req.keys_required)
        throw ConfigError("locked door '" + id + "' needs " +
                          std::to_string(req.keys_required) + " " +
                          to_string(req.required_color) +
                          " key(s) but the layout has fewer");
    }
  }
};

}  // namespace gridshift
