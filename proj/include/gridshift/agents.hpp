#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <unordered_map>

#include "gridshift/rng.hpp"
#include "gridshift/world.hpp"

namespace gridshift {

struct Transition {
  Observation obs;
  Action action = Action::done;
  double reward = 0.0;
  Observation next_obs;
  bool terminal = false;
};

// Evaluation-time policy with fixed parameters. act() is deterministic given
// the observation and the rng state.
class FrozenPolicy {
 public:
  virtual ~FrozenPolicy() = default;
  virtual Action act(const Observation& obs, Rng& rng) const = 0;
};

class AgentPolicy {
 public:
  virtual ~AgentPolicy() = default;
  virtual Action act(const Observation& obs, Rng& rng) = 0;
  virtual void observe(const Transition& t) { (void)t; }
  virtual void begin_episode() {}
  virtual std::unique_ptr<FrozenPolicy> freeze() const = 0;
};

inline Action random_act(Rng& rng) {
  return static_cast<Action>(rng.next_below(kActionCount));
}

// Uniform-random baseline, the reference point of the adaptation metrics.
class RandomAgent final : public AgentPolicy {
 public:
  Action act(const Observation&, Rng& rng) override { return random_act(rng); }
  std::unique_ptr<FrozenPolicy> freeze() const override {
    struct FrozenRandom final : FrozenPolicy {
      Action act(const Observation&, Rng& rng) const override {
        return random_act(rng);
      }
    };
    return std::make_unique<FrozenRandom>();
  }
};

// Action values keyed by the observation hash. Unseen observations read as a
// row of zeros, so the initial greedy action is index 0 by the tie-break.
struct QTable {
  std::unordered_map<std::uint64_t, std::array<double, kActionCount>> values;
  double alpha = 0.1;
  double gamma = 0.95;

  const std::array<double, kActionCount>& row(std::uint64_t key) const {
    static constexpr std::array<double, kActionCount> zeros{};
    auto it = values.find(key);
    return it == values.end() ? zeros : it->second;
  }

  double max_value(std::uint64_t key) const {
    const auto& r = row(key);
    double best = r[0];
    for (double v : r) best = std::max(best, v);
    return best;
  }

  // Greedy action; ties resolve to the lowest action index.
  Action greedy(std::uint64_t key) const {
    const auto& r = row(key);
    int best = 0;
    for (int a = 1; a < kActionCount; ++a)
      if (r[a] > r[best]) best = a;
    return static_cast<Action>(best);
  }

  // One-step temporal-difference update; a terminal successor contributes no
  // bootstrap value. Touches exactly one entry.
  void update(std::uint64_t key, Action action, double reward,
              std::uint64_t next_key, bool terminal) {
    const double bootstrap = terminal ? 0.0 : max_value(next_key);
    double& q = values[key][static_cast<int>(action)];
    q += alpha * (reward + gamma * bootstrap - q);
  }
};

inline Action epsilon_greedy_act(const QTable& table, const Observation& obs,
                                 double epsilon, Rng& rng) {
  if (epsilon > 0.0 && rng.next_double() < epsilon) return random_act(rng);
  return table.greedy(obs.hash());
}

// Linear decay from `start` to `end` over `horizon` steps, measured from
// `begin_step`. rewarm() restarts the schedule mid-run.
struct EpsilonSchedule {
  double start = 1.0;
  double end = 0.05;
  long begin_step = 0;
  long horizon = 1;

  double at(long step) const {
    if (horizon <= 0) return end;
    const double t = static_cast<double>(step - begin_step) / horizon;
    if (t <= 0.0) return start;
    if (t >= 1.0) return end;
    return start + t * (end - start);
  }
};

// Tabular Q-learning over hashed full observations. With the default
// whole-grid view the hashed observation is a true state, so the update rule
// is sound.
class QLearningAgent final : public AgentPolicy {
 public:
  QLearningAgent(double alpha, double gamma, EpsilonSchedule schedule)
      : schedule_(schedule) {
    table_.alpha = alpha;
    table_.gamma = gamma;
  }

  Action act(const Observation& obs, Rng& rng) override {
    return epsilon_greedy_act(table_, obs, schedule_.at(steps_), rng);
  }

  void observe(const Transition& t) override {
    table_.update(t.obs.hash(), t.action, t.reward, t.next_obs.hash(),
                  t.terminal);
    ++steps_;
  }

  void rewarm(double epsilon, long horizon) {
    schedule_.start = epsilon;
    schedule_.begin_step = steps_;
    schedule_.horizon = horizon;
  }

  std::unique_ptr<FrozenPolicy> freeze() const override {
    struct FrozenGreedy final : FrozenPolicy {
      explicit FrozenGreedy(QTable table) : table(std::move(table)) {}
      Action act(const Observation& obs, Rng&) const override {
        return table.greedy(obs.hash());
      }
      QTable table;
    };
    return std::make_unique<FrozenGreedy>(table_);
  }

  const QTable& table() const { return table_; }
  long steps() const { return steps_; }
  double current_epsilon() const { return schedule_.at(steps_); }

 private:
  QTable table_;
  EpsilonSchedule schedule_;
  long steps_ = 0;
};

}  // namespace gridshift
