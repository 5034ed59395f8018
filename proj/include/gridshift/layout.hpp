#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gridshift/config.hpp"

namespace gridshift {

// Character-map layouts. One whitespace-separated token per cell:
//
//   #        wall                      .   floor
//   G        goal                      L   lava
//   @<o>     agent start, o in {n,e,s,w}
//   K<c>     key of color c            B<c>  ball of color c
//   D<c>     locked door               d<c>  unlocked (closed) door
//
// with c in {r,g,b,p,y,e} for red, green, blue, purple, yellow, grey.
// Doors are assigned ids d0, d1, ... in row-major order; a locked door
// defaults to requiring one key of its own color.
inline Color parse_color(char c) {
  switch (c) {
    case 'r': return Color::red;
    case 'g': return Color::green;
    case 'b': return Color::blue;
    case 'p': return Color::purple;
    case 'y': return Color::yellow;
    case 'e': return Color::grey;
    default:
      throw ConfigError(std::string("unknown color suffix '") + c + "'");
  }
}

inline Orientation parse_orientation(char c) {
  switch (c) {
    case 'n': return Orientation::north;
    case 'e': return Orientation::east;
    case 's': return Orientation::south;
    case 'w': return Orientation::west;
    default:
      throw ConfigError(std::string("unknown orientation suffix '") + c + "'");
  }
}

inline EnvironmentConfig parse_layout(const std::vector<std::string>& rows) {
  if (rows.empty()) throw ConfigError("layout map has no rows");
  EnvironmentConfig cfg;
  cfg.perimeter_walls = false;  // the map spells out its own walls
  cfg.height = static_cast<int>(rows.size());
  int door_count = 0;
  bool agent_seen = false;

  for (int y = 0; y < cfg.height; ++y) {
    std::istringstream line(rows[y]);
    std::string token;
    int x = 0;
    while (line >> token) {
      const Position here{x, y};
      const char head = token[0];
      const char suffix = token.size() > 1 ? token[1] : '\0';
      switch (head) {
        case '.':
          break;
        case '#':
          cfg.placements.push_back({Kind::wall, Color::grey, here, {}});
          break;
        case 'G':
          cfg.placements.push_back({Kind::goal, Color::green, here, {}});
          break;
        case 'L':
          cfg.placements.push_back({Kind::lava, Color::red, here, {}});
          break;
        case 'K':
          cfg.placements.push_back({Kind::key, parse_color(suffix), here, {}});
          break;
        case 'B':
          cfg.placements.push_back({Kind::ball, parse_color(suffix), here, {}});
          break;
        case 'D':
        case 'd': {
          const std::string id = "d" + std::to_string(door_count++);
          const Color color = parse_color(suffix);
          cfg.placements.push_back({Kind::door, color, here, id});
          if (head == 'D') cfg.door_requirements[id] = {color, 1, true};
          break;
        }
        case '@':
          if (agent_seen) throw ConfigError("layout map has two agent cells");
          agent_seen = true;
          cfg.agent_start.position = here;
          cfg.agent_start.orientation = parse_orientation(suffix);
          break;
        default:
          throw ConfigError("unknown layout token '" + token + "'");
      }
      ++x;
    }
    if (y == 0)
      cfg.width = x;
    else if (x != cfg.width)
      throw ConfigError("layout row " + std::to_string(y) + " has " +
                        std::to_string(x) + " cells, expected " +
                        std::to_string(cfg.width));
  }
  if (!agent_seen) throw ConfigError("layout map has no agent cell");
  cfg.validate();
  return cfg;
}

// ---- Shipped reference layouts -------------------------------------------

// Two keys (yellow above the start, blue below, same command distance to
// either) and one yellow-locked door in front of the goal. This is the
// doorkey benchmark grid used by the shipped experiment config. The step cap
// is tight enough that a random walk essentially never finishes the
// key-door-goal chain, which the adaptation metrics assume; the single
// inventory slot means a policy that swears by the wrong key has to drop it
// before the other one helps.
inline EnvironmentConfig layout_doorkey_6x6() {
  auto cfg = parse_layout({
      "#  #  #  #  #  #",
      "#  Ky .  #  .  #",
      "#  @e .  Dy G  #",
      "#  Kb .  #  .  #",
      "#  .  .  #  .  #",
      "#  #  #  #  #  #",
  });
  cfg.max_steps = 48;
  return cfg;
}

// Same geometry with the door unlocked; the reference case for locking a
// previously unlocked door.
inline EnvironmentConfig layout_door_unlocked_6x6() {
  return parse_layout({
      "#  #  #  #  #  #",
      "#  Ky .  #  .  #",
      "#  @e .  dy G  #",
      "#  Kb .  #  .  #",
      "#  .  .  #  .  #",
      "#  #  #  #  #  #",
  });
}

// Empty room. Goal placed so that a relocation to (2,4) keeps the shortest
// command count unchanged.
inline EnvironmentConfig layout_open_6x6() {
  return parse_layout({
      "#  #  #  #  #  #",
      "#  @e .  .  .  #",
      "#  .  .  .  G  #",
      "#  .  .  .  .  #",
      "#  .  .  .  .  #",
      "#  #  #  #  #  #",
  });
}

// A lava strip spans the direct corridor to the goal; the safe route detours
// through a keyed door.
inline EnvironmentConfig layout_lava_bridge_6x6() {
  return parse_layout({
      "#  #  #  #  #  #",
      "#  .  Ky Dy .  #",
      "#  @e L  L  G  #",
      "#  .  .  #  .  #",
      "#  .  .  #  .  #",
      "#  #  #  #  #  #",
  });
}

// Two color-gated routes of equal command length: yellow key and door above,
// blue key and door below. Ships with interactions restricted to yellow.
inline EnvironmentConfig layout_tworoutes_6x6() {
  auto cfg = parse_layout({
      "#  #  #  #  #  #",
      "#  .  Ky Dy .  #",
      "#  @e .  #  .  #",
      "#  .  .  #  G  #",
      "#  .  Kb Db .  #",
      "#  #  #  #  #  #",
  });
  cfg.dynamics.color_allowlist = {Color::yellow};
  cfg.max_steps = 72;
  return cfg;
}

// The key sits in a walled pocket reachable only by a detour, two cells away
// from the main corridor.
inline EnvironmentConfig layout_pocket_7x5() {
  return parse_layout({
      "#  #  #  #  #  #  #",
      "#  #  #  Ky #  #  #",
      "#  #  #  .  #  #  #",
      "#  @e .  .  Dy G  #",
      "#  #  #  #  #  #  #",
  });
}

// Long corridor split by a keyed door: six empty cells of approach, then a
// three-cell carry to the goal.
inline EnvironmentConfig layout_burden_12x3() {
  return parse_layout({
      "#  #  #  #  #  #  #  #  #  #  #  #",
      "#  @e .  .  .  .  .  .  Ky Dy G  #",
      "#  #  #  #  #  #  #  #  #  #  #  #",
  });
}

// 16-cell doorkey instance without perimeter walls: key beside the start,
// goal behind a yellow-locked door. Small enough for exhaustive
// action-sequence enumeration.
inline EnvironmentConfig layout_doorkey_4x4() {
  return parse_layout({
      "@s .  #  .",
      "Ky .  Dy G",
      ".  .  #  .",
      ".  .  #  .",
  });
}

// 16-cell empty room.
inline EnvironmentConfig layout_open_4x4() {
  return parse_layout({
      "#  #  #  #",
      "#  @e .  #",
      "#  .  G  #",
      "#  #  #  #",
  });
}

// Straight-line sanity layout.
inline EnvironmentConfig layout_open_5x5() {
  return parse_layout({
      "#  #  #  #  #",
      "#  @e .  G  #",
      "#  .  .  .  #",
      "#  .  .  .  #",
      "#  #  #  #  #",
  });
}

inline const std::map<std::string, EnvironmentConfig (*)()>& builtin_layouts() {
  static const std::map<std::string, EnvironmentConfig (*)()> layouts = {
      {"doorkey_6x6", layout_doorkey_6x6},
      {"door_unlocked_6x6", layout_door_unlocked_6x6},
      {"open_6x6", layout_open_6x6},
      {"lava_bridge_6x6", layout_lava_bridge_6x6},
      {"tworoutes_6x6", layout_tworoutes_6x6},
      {"pocket_7x5", layout_pocket_7x5},
      {"burden_12x3", layout_burden_12x3},
      {"doorkey_4x4", layout_doorkey_4x4},
      {"open_4x4", layout_open_4x4},
      {"open_5x5", layout_open_5x5},
  };
  return layouts;
}

inline EnvironmentConfig builtin_layout(const std::string& name) {
  auto it = builtin_layouts().find(name);
  if (it == builtin_layouts().end())
    throw ConfigError("unknown layout '" + name + "'");
  return it->second();
}

}  // namespace gridshift
