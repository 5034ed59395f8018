#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gridshift/config.hpp"
#include "gridshift/rng.hpp"
#include "gridshift/types.hpp"

namespace gridshift {

// Symbolic observation: a (kind, color, state) code per cell, the agent's
// orientation, and carried-object counts. Dimensions are fixed for the
// lifetime of an experiment; only cell contents may change across a novelty.
struct Observation {
  int width = 0;
  int height = 0;
  std::vector<std::array<std::uint8_t, 3>> cells;  // row-major
  std::uint8_t orientation = 0;
  std::array<std::uint8_t, kKindCount * kColorCount> inventory{};

  friend bool operator==(const Observation&, const Observation&) = default;

  // FNV-1a over the canonical byte serialization.
  std::uint64_t hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint8_t b) {
      h ^= b;
      h *= 1099511628211ULL;
    };
    for (const auto& c : cells) {
      mix(c[0]);
      mix(c[1]);
      mix(c[2]);
    }
    mix(orientation);
    for (std::uint8_t b : inventory) mix(b);
    return h;
  }
};

// Cell codes used in observations. 0 is an empty cell; the agent's own cell
// is reported as kAgentCode in the full-grid view.
inline constexpr std::uint8_t kAgentCode = 7;

inline std::uint8_t kind_code(Kind k) {
  switch (k) {
    case Kind::floor: return 0;
    case Kind::wall: return 1;
    case Kind::door: return 2;
    case Kind::key: return 3;
    case Kind::goal: return 4;
    case Kind::lava: return 5;
    case Kind::ball: return 6;
  }
  return 0;
}

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

// Live simulation state realized from an EnvironmentConfig. Deterministic for
// determinism_p = 1 and a fixed layout; all randomness flows from the seed
// given at construction. Single-threaded per instance.
class GridWorld {
 public:
  GridWorld(EnvironmentConfig config, std::uint64_t seed)
      : config_(std::move(config)),
        fixed_gen_seed_(Rng::derive(seed, 1)),
        stream_(Rng::derive(seed, 2)) {
    config_.validate();
    regenerate();
  }

  // Regenerates the grid per the layout seed policy and returns the initial
  // observation. Under the fixed policy every episode realizes the identical
  // grid; under per_episode_random each reset redraws the random placements.
  Observation reset() {
    regenerate();
    return observe();
  }

  StepResult step(Action commanded) {
    if (terminated_ || truncated_)
      throw std::logic_error("step() called on a finished episode");
    ++step_count_;

    Action executed = commanded;
    const auto& dyn = config_.dynamics;
    if (dyn.determinism_p < 1.0) {
      if (stream_.next_double() >= dyn.determinism_p) {
        // Slips resample among the movement actions only, so object
        // interactions stay intentional.
        static constexpr Action movement[3] = {Action::turn_left,
                                               Action::turn_right,
                                               Action::forward};
        executed = movement[stream_.next_below(3)];
      }
    }

    // Repetition gating: the action fires on every k-th consecutive issuance.
    const int k = effective_repetition(executed);
    if (executed == ledger_action_ && ledger_count_ > 0)
      ++ledger_count_;
    else {
      ledger_action_ = executed;
      ledger_count_ = 1;
    }
    double reward = 0.0;
    if (ledger_count_ >= k) {
      ledger_count_ = 0;
      reward = apply(executed);
    }

    if (!terminated_ && step_count_ >= config_.resolved_max_steps())
      truncated_ = true;
    return {observe(), reward, terminated_, truncated_};
  }

  // Pure function of the world state (ignores rng and ledgers).
  Observation observe() const {
    return config_.egocentric_view ? observe_egocentric() : observe_full();
  }

  const EnvironmentConfig& config() const { return config_; }
  const AgentState& agent() const { return agent_; }
  int step_count() const { return step_count_; }
  bool terminated() const { return terminated_; }
  bool truncated() const { return truncated_; }
  bool episode_over() const { return terminated_ || truncated_; }

  const std::optional<WorldObject>& cell(Position p) const {
    return cells_[index(p)];
  }
  const std::vector<std::optional<WorldObject>>& cells() const { return cells_; }

  // (last executed action, consecutive count since the last firing).
  std::pair<Action, int> repetition_ledger() const {
    return {ledger_action_, ledger_count_};
  }

  const std::string& door_id_at(Position p) const {
    static const std::string empty;
    auto it = door_ids_.find(index(p));
    return it == door_ids_.end() ? empty : it->second;
  }

  bool laden() const { return !agent_.inventory.empty(); }

 private:
  int index(Position p) const { return p.y * config_.width + p.x; }

  bool in_bounds(Position p) const { return config_.in_bounds(p); }

  int effective_repetition(Action a) const {
    const auto& dyn = config_.dynamics;
    if (a == Action::forward && dyn.burdening && laden())
      return dyn.burdening->laden_repetition;
    return dyn.repetition_for(a);
  }

  int effective_forward_step() const {
    const auto& dyn = config_.dynamics;
    if (dyn.burdening && !laden()) return dyn.burdening->empty_forward_step;
    return dyn.forward_step;
  }

  double apply(Action a) {
    switch (a) {
      case Action::turn_left:
        agent_.orientation = rotate_left(agent_.orientation);
        return 0.0;
      case Action::turn_right:
        agent_.orientation = rotate_right(agent_.orientation);
        return 0.0;
      case Action::forward:
        return move_forward();
      case Action::pickup:
        do_pickup();
        return 0.0;
      case Action::drop:
        do_drop();
        return 0.0;
      case Action::toggle:
        do_toggle();
        return 0.0;
      case Action::done:
        return 0.0;  // explicit no-op, pure step cost
    }
    return 0.0;
  }

  // Moves up to effective_forward_step cells, one cell at a time, stopping
  // before the first blocking cell. Entering the goal or harmful lava ends
  // the episode mid-motion.
  double move_forward() {
    const int span = effective_forward_step();
    for (int i = 0; i < span; ++i) {
      const Position next = step_toward(agent_.position, agent_.orientation);
      if (!in_bounds(next)) break;
      const auto& obj = cells_[index(next)];
      if (obj && !obj->traversable()) break;
      agent_.position = next;
      if (obj && obj->kind == Kind::goal) {
        terminated_ = true;
        return 1.0 - 0.9 * (static_cast<double>(step_count_) /
                            config_.resolved_max_steps());
      }
      if (obj && obj->kind == Kind::lava && config_.dynamics.lava_harmful) {
        terminated_ = true;
        return 0.0;
      }
    }
    return 0.0;
  }

  // Half-plane the agent faces: strictly ahead of its own row/column.
  bool in_facing_half_plane(Position c) const {
    const Position a = agent_.position;
    switch (agent_.orientation) {
      case Orientation::north: return c.y < a.y;
      case Orientation::east: return c.x > a.x;
      case Orientation::south: return c.y > a.y;
      case Orientation::west: return c.x < a.x;
    }
    return false;
  }

  static int chebyshev(Position a, Position b) {
    return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
  }

  // Nearest eligible cell by Chebyshev distance within action_radius in the
  // facing half-plane; ties resolved by row-major scan order.
  template <typename Pred>
  std::optional<Position> find_target(Pred eligible) const {
    const int radius = config_.dynamics.action_radius;
    std::optional<Position> best;
    int best_dist = radius + 1;
    for (int y = 0; y < config_.height; ++y) {
      for (int x = 0; x < config_.width; ++x) {
        const Position p{x, y};
        const int d = chebyshev(p, agent_.position);
        if (d == 0 || d > radius || !in_facing_half_plane(p)) continue;
        const auto& obj = cells_[index(p)];
        if (!obj || !eligible(*obj)) continue;
        if (d < best_dist) {
          best_dist = d;
          best = p;
        }
      }
    }
    return best;
  }

  void do_pickup() {
    const auto& dyn = config_.dynamics;
    if (static_cast<int>(agent_.inventory.size()) >= dyn.inventory_capacity)
      return;
    auto target = find_target([&dyn](const WorldObject& o) {
      return o.carryable() && dyn.color_allowed(o.color);
    });
    if (!target) return;
    agent_.inventory.push_back(*cells_[index(*target)]);
    cells_[index(*target)].reset();
  }

  void do_drop() {
    if (agent_.inventory.empty()) return;
    const Position faced = step_toward(agent_.position, agent_.orientation);
    if (!in_bounds(faced) || cells_[index(faced)]) return;
    cells_[index(faced)] = agent_.inventory.back();
    agent_.inventory.pop_back();
  }

  void do_toggle() {
    const auto& dyn = config_.dynamics;
    auto target = find_target([&dyn](const WorldObject& o) {
      return o.kind == Kind::door && dyn.color_allowed(o.color);
    });
    if (!target) return;
    WorldObject& door = *cells_[index(*target)];
    if (door.open) {
      door.open = false;
      return;
    }
    if (!door.locked) {
      door.open = true;
      return;
    }
    const auto& id = door_id_at(*target);
    auto req_it = config_.door_requirements.find(id);
    if (req_it == config_.door_requirements.end()) return;
    const DoorRequirement& req = req_it->second;
    int held = 0;
    for (const auto& obj : agent_.inventory)
      if (obj.kind == Kind::key && obj.color == req.required_color) ++held;
    if (held >= req.keys_required) {
      door.locked = false;  // unlocking is permanent; keys are not consumed
      door.open = true;
    }
  }

  Observation observe_full() const {
    Observation obs;
    obs.width = config_.width;
    obs.height = config_.height;
    obs.cells.resize(static_cast<std::size_t>(config_.width) * config_.height,
                     {0, 0, 0});
    for (int y = 0; y < config_.height; ++y)
      for (int x = 0; x < config_.width; ++x)
        obs.cells[index({x, y})] = encode_cell({x, y});
    obs.cells[index(agent_.position)] = {
        kAgentCode, 0, static_cast<std::uint8_t>(agent_.orientation)};
    obs.orientation = static_cast<std::uint8_t>(agent_.orientation);
    encode_inventory(obs);
    return obs;
  }

  // Agent-centric window: the agent sits at the bottom-center cell facing the
  // top of the view. Cells outside the grid read as walls. No occlusion.
  Observation observe_egocentric() const {
    const int v = config_.egocentric_size;
    Observation obs;
    obs.width = v;
    obs.height = v;
    obs.cells.resize(static_cast<std::size_t>(v) * v, {kind_code(Kind::wall), 0, 0});
    const Orientation fwd = agent_.orientation;
    const Orientation right = rotate_right(fwd);
    for (int vy = 0; vy < v; ++vy) {
      for (int vx = 0; vx < v; ++vx) {
        const int ahead = (v - 1) - vy;
        const int side = vx - v / 2;
        Position p = agent_.position;
        for (int i = 0; i < ahead; ++i) p = step_toward(p, fwd);
        for (int i = 0; i < std::abs(side); ++i)
          p = step_toward(p, side >= 0 ? right : rotate_left(rotate_left(right)));
        if (in_bounds(p)) obs.cells[vy * v + vx] = encode_cell(p);
      }
    }
    obs.orientation = 0;
    encode_inventory(obs);
    return obs;
  }

  std::array<std::uint8_t, 3> encode_cell(Position p) const {
    const auto& obj = cells_[index(p)];
    if (!obj) return {0, 0, 0};
    std::uint8_t state = 0;
    if (obj->kind == Kind::door)
      state = obj->open ? 0 : (obj->locked ? 2 : 1);
    return {kind_code(obj->kind), static_cast<std::uint8_t>(obj->color), state};
  }

  void encode_inventory(Observation& obs) const {
    for (const auto& obj : agent_.inventory) {
      const int slot = kind_code(obj.kind) * kColorCount + static_cast<int>(obj.color);
      if (obs.inventory[slot] < 255) ++obs.inventory[slot];
    }
  }

  void regenerate() {
    Rng gen(config_.layout_seed_policy == LayoutSeedPolicy::fixed
                ? fixed_gen_seed_
                : stream_.next_u64());
    cells_.assign(static_cast<std::size_t>(config_.width) * config_.height,
                  std::nullopt);
    door_ids_.clear();
    agent_ = AgentState{};
    step_count_ = 0;
    terminated_ = false;
    truncated_ = false;
    ledger_action_ = Action::done;
    ledger_count_ = 0;

    if (config_.perimeter_walls) {
      for (int x = 0; x < config_.width; ++x) {
        place_wall({x, 0});
        place_wall({x, config_.height - 1});
      }
      for (int y = 0; y < config_.height; ++y) {
        place_wall({0, y});
        place_wall({config_.width - 1, y});
      }
    }

    for (const auto& pl : config_.placements) {
      Position p = pl.position ? *pl.position : draw_free_cell(gen, pl);
      if (cells_[index(p)])
        throw ConfigError(std::string(to_string(pl.kind)) + " placement at (" +
                          std::to_string(p.x) + "," + std::to_string(p.y) +
                          ") overlaps an existing " +
                          to_string(cells_[index(p)]->kind));
      WorldObject obj;
      obj.kind = pl.kind;
      obj.color = pl.color;
      if (pl.kind == Kind::door) {
        auto it = config_.door_requirements.find(pl.door_id);
        obj.locked = it != config_.door_requirements.end() && it->second.locked;
        obj.open = false;
        door_ids_[index(p)] = pl.door_id;
      }
      cells_[index(p)] = obj;
    }

    if (config_.agent_start.position) {
      const Position p = *config_.agent_start.position;
      if (cells_[index(p)])
        throw ConfigError("agent start at (" + std::to_string(p.x) + "," +
                          std::to_string(p.y) + ") overlaps a " +
                          to_string(cells_[index(p)]->kind));
      agent_.position = p;
    } else {
      agent_.position = draw_free_cell(gen, std::nullopt);
    }
    agent_.orientation = config_.agent_start.orientation
                             ? *config_.agent_start.orientation
                             : static_cast<Orientation>(gen.next_below(4));
  }

  Position draw_free_cell(Rng& gen, const std::optional<Placement>& pl) {
    std::vector<Position> free;
    for (int y = 0; y < config_.height; ++y)
      for (int x = 0; x < config_.width; ++x) {
        const Position p{x, y};
        if (cells_[index(p)]) continue;
        if (pl && config_.agent_start.position && p == *config_.agent_start.position)
          continue;  // keep the agent's reserved start cell clear
        free.push_back(p);
      }
    if (free.empty())
      throw ConfigError("no free cell left for " +
                        std::string(pl ? to_string(pl->kind) : "agent"));
    return free[gen.next_below(free.size())];
  }

  void place_wall(Position p) {
    cells_[index(p)] = WorldObject{Kind::wall, Color::grey, false, false};
  }

  EnvironmentConfig config_;
  std::uint64_t fixed_gen_seed_;
  Rng stream_;
  std::vector<std::optional<WorldObject>> cells_;
  std::map<int, std::string> door_ids_;
  AgentState agent_;
  int step_count_ = 0;
  bool terminated_ = false;
  bool truncated_ = false;
  Action ledger_action_ = Action::done;
  int ledger_count_ = 0;
};

}  // namespace gridshift
