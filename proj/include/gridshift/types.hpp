#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridshift {

// Thrown when a world description violates its own constraints.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when a catalog transform rejects its parameters or target.
struct TransformError : std::runtime_error {
  explicit TransformError(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when the planning oracle cannot be applied (stochastic or
// randomized-layout dynamics).
struct OracleError : std::runtime_error {
  explicit OracleError(const std::string& what) : std::runtime_error(what) {}
};

enum class Kind : std::uint8_t { wall, floor, door, key, goal, lava, ball };
enum class Color : std::uint8_t { red, green, blue, purple, yellow, grey };
enum class Orientation : std::uint8_t { north, east, south, west };

// The fixed 7-action command set. Never grows or shrinks, including across a
// novelty injection.
enum class Action : std::uint8_t {
  turn_left = 0,
  turn_right = 1,
  forward = 2,
  pickup = 3,
  drop = 4,
  toggle = 5,
  done = 6,
};

inline constexpr int kActionCount = 7;
inline constexpr int kKindCount = 7;
inline constexpr int kColorCount = 6;

inline constexpr std::array<Action, kActionCount> all_actions() {
  return {Action::turn_left, Action::turn_right, Action::forward,
          Action::pickup,    Action::drop,       Action::toggle,
          Action::done};
}

inline const char* to_string(Action a) {
  switch (a) {
    case Action::turn_left: return "turn_left";
    case Action::turn_right: return "turn_right";
    case Action::forward: return "forward";
    case Action::pickup: return "pickup";
    case Action::drop: return "drop";
    case Action::toggle: return "toggle";
    case Action::done: return "done";
  }
  return "?";
}

inline const char* to_string(Color c) {
  switch (c) {
    case Color::red: return "red";
    case Color::green: return "green";
    case Color::blue: return "blue";
    case Color::purple: return "purple";
    case Color::yellow: return "yellow";
    case Color::grey: return "grey";
  }
  return "?";
}

inline const char* to_string(Kind k) {
  switch (k) {
    case Kind::wall: return "wall";
    case Kind::floor: return "floor";
    case Kind::door: return "door";
    case Kind::key: return "key";
    case Kind::goal: return "goal";
    case Kind::lava: return "lava";
    case Kind::ball: return "ball";
  }
  return "?";
}

inline const char* to_string(Orientation o) {
  switch (o) {
    case Orientation::north: return "north";
    case Orientation::east: return "east";
    case Orientation::south: return "south";
    case Orientation::west: return "west";
  }
  return "?";
}

struct Position {
  int x = 0;
  int y = 0;
  friend bool operator==(const Position&, const Position&) = default;
};

inline Position step_toward(Position p, Orientation o) {
  switch (o) {
    case Orientation::north: return {p.x, p.y - 1};
    case Orientation::east: return {p.x + 1, p.y};
    case Orientation::south: return {p.x, p.y + 1};
    case Orientation::west: return {p.x - 1, p.y};
  }
  return p;
}

inline Orientation rotate_left(Orientation o) {
  return static_cast<Orientation>((static_cast<int>(o) + 3) % 4);
}

inline Orientation rotate_right(Orientation o) {
  return static_cast<Orientation>((static_cast<int>(o) + 1) % 4);
}

// A thing occupying one cell. Doors carry (locked, open); an open door is
// traversable, a closed one blocks regardless of locking.
struct WorldObject {
  Kind kind = Kind::floor;
  Color color = Color::grey;
  bool locked = false;
  bool open = false;

  friend bool operator==(const WorldObject&, const WorldObject&) = default;

  bool traversable() const {
    switch (kind) {
      case Kind::floor:
      case Kind::goal:
      case Kind::lava:
        return true;
      case Kind::door:
        return open;
      default:
        return false;
    }
  }

  bool carryable() const { return kind == Kind::key || kind == Kind::ball; }
};

struct AgentState {
  Position position;
  Orientation orientation = Orientation::east;
  std::vector<WorldObject> inventory;  // LIFO; capacity in DynamicsParams

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

}  // namespace gridshift
