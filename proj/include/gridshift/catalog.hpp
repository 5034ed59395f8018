#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gridshift/ontology.hpp"

#include "json.hpp"

namespace gridshift {

inline Color parse_color_name(const std::string& name) {
  for (int i = 0; i < kColorCount; ++i) {
    const Color c = static_cast<Color>(i);
    if (name == to_string(c)) return c;
  }
  throw TransformError("unknown color '" + name + "'");
}

inline Action parse_action_name(const std::string& name) {
  for (Action a : all_actions())
    if (name == to_string(a)) return a;
  throw TransformError("unknown action '" + name + "'");
}

namespace detail {

inline void check_param_keys(const nlohmann::json& params,
                             const std::string& novelty,
                             std::initializer_list<const char*> allowed) {
  if (!params.is_object())
    throw TransformError(novelty + ": parameters must be a JSON object");
  for (const auto& [key, value] : params.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(), [&key](const char* a) {
          return key == a;
        }) == allowed.end())
      throw TransformError(novelty + ": unknown parameter '" + key + "'");
  }
}

inline std::string param_string(const nlohmann::json& params,
                                const std::string& novelty, const char* key) {
  if (!params.contains(key) || !params[key].is_string())
    throw TransformError(novelty + ": missing string parameter '" + key + "'");
  return params[key].get<std::string>();
}

inline long param_int(const nlohmann::json& params, const std::string& novelty,
                      const char* key) {
  if (!params.contains(key) || !params[key].is_number_integer())
    throw TransformError(novelty + ": missing integer parameter '" + key + "'");
  return params[key].get<long>();
}

inline double param_number(const nlohmann::json& params,
                           const std::string& novelty, const char* key) {
  if (!params.contains(key) || !params[key].is_number())
    throw TransformError(novelty + ": missing numeric parameter '" + key + "'");
  return params[key].get<double>();
}

inline const Placement& named_door(const EnvironmentConfig& cfg,
                                   const std::string& novelty,
                                   const std::string& id) {
  const Placement* door = cfg.find_door(id);
  if (!door) throw TransformError(novelty + ": no door '" + id + "' in the layout");
  return *door;
}

inline bool cell_occupied(const EnvironmentConfig& cfg, Position p) {
  if (cfg.perimeter_walls && (p.x == 0 || p.y == 0 || p.x == cfg.width - 1 ||
                              p.y == cfg.height - 1))
    return true;
  if (cfg.agent_start.position && *cfg.agent_start.position == p) return true;
  for (const auto& pl : cfg.placements)
    if (pl.position && *pl.position == p) return true;
  return false;
}

inline Position first_free_cell(const EnvironmentConfig& cfg,
                                const std::string& novelty) {
  for (int y = 0; y < cfg.height; ++y)
    for (int x = 0; x < cfg.width; ++x)
      if (!cell_occupied(cfg, {x, y})) return {x, y};
  throw TransformError(novelty + ": layout has no free cell");
}

}  // namespace detail

// ---- The exemplar transforms ----------------------------------------------
// Each is a pure function of (pre, parameters); the input config is never
// modified and the output differs from it only in the fields the transform
// is about.

inline EnvironmentConfig goal_location_change(const EnvironmentConfig& pre,
                                              const nlohmann::json& params) {
  detail::check_param_keys(params, "GoalLocationChange", {"new_location"});
  EnvironmentConfig post = pre;
  auto goal = std::find_if(post.placements.begin(), post.placements.end(),
                           [](const Placement& p) { return p.kind == Kind::goal; });
  if (goal == post.placements.end())
    throw TransformError("GoalLocationChange: layout has no goal");
  if (params.contains("new_location") && params["new_location"].is_string()) {
    if (params["new_location"].get<std::string>() != "resample")
      throw TransformError("GoalLocationChange: new_location must be [x, y] or "
                           "\"resample\"");
    goal->position.reset();
    return post;
  }
  if (!params.contains("new_location") || !params["new_location"].is_array() ||
      params["new_location"].size() != 2)
    throw TransformError("GoalLocationChange: new_location must be [x, y] or "
                         "\"resample\"");
  const Position target{params["new_location"][0].get<int>(),
                        params["new_location"][1].get<int>()};
  if (!pre.in_bounds(target))
    throw TransformError("GoalLocationChange: new location is out of bounds");
  if (detail::cell_occupied(pre, target))
    throw TransformError("GoalLocationChange: new location is occupied");
  goal->position = target;
  return post;
}

inline EnvironmentConfig door_lock_toggle(const EnvironmentConfig& pre,
                                          const nlohmann::json& params) {
  detail::check_param_keys(params, "DoorLockToggle", {"door", "direction"});
  const std::string id = detail::param_string(params, "DoorLockToggle", "door");
  const std::string direction =
      detail::param_string(params, "DoorLockToggle", "direction");
  if (direction != "lock" && direction != "unlock")
    throw TransformError("DoorLockToggle: direction must be 'lock' or 'unlock'");
  const Placement& door = detail::named_door(pre, "DoorLockToggle", id);

  EnvironmentConfig post = pre;
  auto req_it = post.door_requirements.find(id);
  const bool currently_locked =
      req_it != post.door_requirements.end() && req_it->second.locked;
  if (direction == "lock") {
    if (currently_locked)
      throw TransformError("DoorLockToggle: door '" + id + "' is already locked");
    DoorRequirement req = req_it != post.door_requirements.end()
                              ? req_it->second
                              : DoorRequirement{door.color, 1, true};
    req.locked = true;
    if (pre.count_keys(req.required_color) < req.keys_required)
      throw TransformError("DoorLockToggle: no " +
                           std::string(to_string(req.required_color)) +
                           " key in the layout to open locked door '" + id + "'");
    post.door_requirements[id] = req;
  } else {
    if (!currently_locked)
      throw TransformError("DoorLockToggle: door '" + id + "' is already unlocked");
    req_it->second.locked = false;
  }
  return post;
}

inline EnvironmentConfig door_key_change(const EnvironmentConfig& pre,
                                         const nlohmann::json& params) {
  detail::check_param_keys(params, "DoorKeyChange", {"door", "new_color"});
  const std::string id = detail::param_string(params, "DoorKeyChange", "door");
  const Color color =
      parse_color_name(detail::param_string(params, "DoorKeyChange", "new_color"));
  detail::named_door(pre, "DoorKeyChange", id);

  EnvironmentConfig post = pre;
  auto req_it = post.door_requirements.find(id);
  if (req_it == post.door_requirements.end() || !req_it->second.locked)
    throw TransformError("DoorKeyChange: door '" + id + "' is not locked");
  if (pre.count_keys(color) < req_it->second.keys_required)
    throw TransformError("DoorKeyChange: layout has no " +
                         std::string(to_string(color)) + " key to open door '" +
                         id + "'");
  req_it->second.required_color = color;
  return post;
}

inline EnvironmentConfig door_num_keys(const EnvironmentConfig& pre,
                                       const nlohmann::json& params) {
  detail::check_param_keys(params, "DoorNumKeys", {"door", "keys"});
  const std::string id = detail::param_string(params, "DoorNumKeys", "door");
  const long n = detail::param_int(params, "DoorNumKeys", "keys");
  if (n < 1) throw TransformError("DoorNumKeys: keys must be >= 1");
  detail::named_door(pre, "DoorNumKeys", id);

  EnvironmentConfig post = pre;
  auto req_it = post.door_requirements.find(id);
  if (req_it == post.door_requirements.end() || !req_it->second.locked)
    throw TransformError("DoorNumKeys: door '" + id + "' is not locked");
  req_it->second.keys_required = static_cast<int>(n);
  // Keep the post-world solvable: top up missing keys at the first free
  // cells in row-major order, and make the inventory big enough to carry
  // them all at once.
  while (post.count_keys(req_it->second.required_color) < n) {
    const Position p = detail::first_free_cell(post, "DoorNumKeys");
    post.placements.push_back({Kind::key, req_it->second.required_color, p, {}});
  }
  post.dynamics.inventory_capacity =
      std::max(post.dynamics.inventory_capacity, static_cast<int>(n));
  return post;
}

inline EnvironmentConfig impervious_to_lava(const EnvironmentConfig& pre,
                                            const nlohmann::json& params) {
  detail::check_param_keys(params, "ImperviousToLava", {});
  EnvironmentConfig post = pre;
  post.dynamics.lava_harmful = false;
  return post;
}

inline EnvironmentConfig action_repetition(const EnvironmentConfig& pre,
                                           const nlohmann::json& params) {
  detail::check_param_keys(params, "ActionRepetition", {"action", "count"});
  const Action action =
      parse_action_name(detail::param_string(params, "ActionRepetition", "action"));
  const long k = detail::param_int(params, "ActionRepetition", "count");
  if (k < 1) throw TransformError("ActionRepetition: count must be >= 1");
  EnvironmentConfig post = pre;
  post.dynamics.action_repetition[static_cast<int>(action)] = static_cast<int>(k);
  return post;
}

inline EnvironmentConfig forward_movement_speed(const EnvironmentConfig& pre,
                                                const nlohmann::json& params) {
  detail::check_param_keys(params, "ForwardMovementSpeed", {"step"});
  const long s = detail::param_int(params, "ForwardMovementSpeed", "step");
  if (s < 1) throw TransformError("ForwardMovementSpeed: step must be >= 1");
  EnvironmentConfig post = pre;
  post.dynamics.forward_step = static_cast<int>(s);
  return post;
}

inline EnvironmentConfig action_radius(const EnvironmentConfig& pre,
                                       const nlohmann::json& params) {
  detail::check_param_keys(params, "ActionRadius", {"radius"});
  const long r = detail::param_int(params, "ActionRadius", "radius");
  if (r < 0) throw TransformError("ActionRadius: radius must be >= 0");
  EnvironmentConfig post = pre;
  post.dynamics.action_radius = static_cast<int>(r);
  return post;
}

inline EnvironmentConfig color_restriction(const EnvironmentConfig& pre,
                                           const nlohmann::json& params) {
  detail::check_param_keys(params, "ColorRestriction", {"colors"});
  if (!params.contains("colors") || !params["colors"].is_array() ||
      params["colors"].empty())
    throw TransformError("ColorRestriction: colors must be a non-empty array");
  std::set<Color> allowed;
  for (const auto& c : params["colors"]) {
    if (!c.is_string())
      throw TransformError("ColorRestriction: colors must be color names");
    allowed.insert(parse_color_name(c.get<std::string>()));
  }
  EnvironmentConfig post = pre;
  if (static_cast<int>(allowed.size()) == kColorCount)
    post.dynamics.color_allowlist.reset();  // allowing everything = no restriction
  else
    post.dynamics.color_allowlist = std::move(allowed);
  return post;
}

inline EnvironmentConfig burdening(const EnvironmentConfig& pre,
                                   const nlohmann::json& params) {
  detail::check_param_keys(params, "Burdening",
                           {"empty_forward_step", "laden_repetition"});
  const long fast = detail::param_int(params, "Burdening", "empty_forward_step");
  const long slow = detail::param_int(params, "Burdening", "laden_repetition");
  if (fast < 1 || slow < 1)
    throw TransformError("Burdening: parameters must be >= 1");
  EnvironmentConfig post = pre;
  if (fast == 1 && slow == 1)
    post.dynamics.burdening.reset();  // no-op profile
  else
    post.dynamics.burdening =
        BurdeningProfile{static_cast<int>(fast), static_cast<int>(slow)};
  return post;
}

inline EnvironmentConfig transition_determinism(const EnvironmentConfig& pre,
                                                const nlohmann::json& params) {
  detail::check_param_keys(params, "TransitionDeterminism", {"p"});
  const double p = detail::param_number(params, "TransitionDeterminism", "p");
  if (!(p > 0.0 && p <= 1.0))
    throw TransformError("TransitionDeterminism: p must be in (0, 1]");
  EnvironmentConfig post = pre;
  post.dynamics.determinism_p = p;
  return post;
}

// ---- Catalog ---------------------------------------------------------------

struct CatalogEntry {
  NoveltyDescriptor descriptor;      // with default parameters
  std::string reference_layout;      // layout its declared cell is checked on
  std::string required_features;     // what a compatible layout must provide
};

inline const std::vector<CatalogEntry>& catalog_entries() {
  using json = nlohmann::json;
  static const std::vector<CatalogEntry> entries = [] {
    std::vector<CatalogEntry> v;
    auto add = [&v](std::string name, json defaults, OntologyCell cell,
                    auto transform, std::string layout, std::string features) {
      v.push_back({{std::move(name), std::move(defaults), cell, transform},
                   std::move(layout), std::move(features)});
    };
    add("GoalLocationChange", json{{"new_location", {2, 4}}},
        {NoveltyTarget::object, NoveltyArity::unary, SolutionEffect::delta},
        goal_location_change, "open_6x6", "a goal and a free target cell");
    add("DoorLockToggle", json{{"door", "d0"}, {"direction", "unlock"}},
        {NoveltyTarget::object, NoveltyArity::unary, SolutionEffect::shortcut},
        door_lock_toggle, "doorkey_6x6",
        "a door in the opposite lock state, with a matching key when locking");
    add("DoorKeyChange", json{{"door", "d0"}, {"new_color", "blue"}},
        {NoveltyTarget::object, NoveltyArity::non_unary, SolutionEffect::delta},
        door_key_change, "doorkey_6x6",
        "a locked door and a key of the new color");
    add("DoorNumKeys", json{{"door", "d0"}, {"keys", 2}},
        {NoveltyTarget::object, NoveltyArity::non_unary, SolutionEffect::barrier},
        door_num_keys, "doorkey_6x6", "a locked door");
    add("ImperviousToLava", json::object(),
        {NoveltyTarget::object, NoveltyArity::non_unary, SolutionEffect::shortcut},
        impervious_to_lava, "lava_bridge_6x6", "none (lava makes it observable)");
    add("ActionRepetition", json{{"action", "pickup"}, {"count", 2}},
        {NoveltyTarget::action, NoveltyArity::unary, SolutionEffect::barrier},
        action_repetition, "doorkey_6x6", "none");
    add("ForwardMovementSpeed", json{{"step", 2}},
        {NoveltyTarget::action, NoveltyArity::non_unary, SolutionEffect::shortcut},
        forward_movement_speed, "open_6x6", "none");
    add("ActionRadius", json{{"radius", 2}},
        {NoveltyTarget::action, NoveltyArity::unary, SolutionEffect::shortcut},
        action_radius, "pocket_7x5", "none");
    add("ColorRestriction", json{{"colors", {"blue"}}},
        {NoveltyTarget::action, NoveltyArity::unary, SolutionEffect::delta},
        color_restriction, "tworoutes_6x6",
        "interactable objects in the allowed colors");
    add("Burdening", json{{"empty_forward_step", 2}, {"laden_repetition", 2}},
        {NoveltyTarget::action, NoveltyArity::non_unary, SolutionEffect::delta},
        burdening, "burden_12x3", "none");
    add("TransitionDeterminism", json{{"p", 0.9}},
        {NoveltyTarget::action, NoveltyArity::non_unary, SolutionEffect::barrier},
        transition_determinism, "doorkey_6x6", "none");
    return v;
  }();
  return entries;
}

// Canonical name resolution; "ForwardMoveSpeed" is accepted as an alias.
inline std::string canonical_novelty_name(const std::string& name) {
  return name == "ForwardMoveSpeed" ? "ForwardMovementSpeed" : name;
}

inline const CatalogEntry* find_catalog_entry(const std::string& name) {
  const std::string canonical = canonical_novelty_name(name);
  for (const auto& entry : catalog_entries())
    if (entry.descriptor.name == canonical) return &entry;
  return nullptr;
}

// Descriptor with defaults merged under the given parameters. DoorLockToggle
// occupies two ontology cells, one per direction, so its declared cell is
// resolved from the parameters.
inline NoveltyDescriptor make_descriptor(const std::string& name,
                                         const nlohmann::json& params) {
  const CatalogEntry* entry = find_catalog_entry(name);
  if (!entry) throw TransformError("unknown novelty '" + name + "'");
  NoveltyDescriptor d = entry->descriptor;
  if (!params.is_null()) {
    if (!params.is_object())
      throw TransformError(d.name + ": parameters must be a JSON object");
    for (const auto& [key, value] : params.items()) d.parameters[key] = value;
  }
  if (d.name == "DoorLockToggle" && d.parameters.contains("direction") &&
      d.parameters["direction"] == "lock")
    d.declared_cell.solution_effect = SolutionEffect::barrier;
  return d;
}

// Catalog name closest to `name` by edit distance, for error messages.
inline std::string nearest_novelty_name(const std::string& name) {
  auto distance = [](const std::string& a, const std::string& b) {
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
      std::size_t prev = row[0]++;
      for (std::size_t j = 1; j <= b.size(); ++j) {
        const std::size_t cur = row[j];
        row[j] = std::min({row[j] + 1, row[j - 1] + 1,
                           prev + (a[i - 1] == b[j - 1] ? 0 : 1)});
        prev = cur;
      }
    }
    return row[b.size()];
  };
  std::string best;
  std::size_t best_dist = SIZE_MAX;
  for (const auto& entry : catalog_entries()) {
    const std::size_t d = distance(name, entry.descriptor.name);
    if (d < best_dist) {
      best_dist = d;
      best = entry.descriptor.name;
    }
  }
  return best;
}

}  // namespace gridshift
