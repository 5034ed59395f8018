#pragma once

#include <cstdint>
#include <utility>

#include "gridshift/ontology.hpp"
#include "gridshift/world.hpp"

namespace gridshift {

// When the swap happens: the first reset whose episode number is >=
// injection_episode generates the post-novelty world. Episodes are numbered
// from 1, so exactly episodes [1, injection_episode) are pre-novelty.
struct NoveltySchedule {
  long injection_episode = 1;
};

// Environment wrapper that injects a novelty at an episode boundary. Before
// the injection episode, resets realize the pre-novelty config; at and after
// it, the transformed config, including its dynamics. Mid-episode state is
// never rewritten in place: the swap only ever happens inside reset().
class WrappedEnvironment {
 public:
  WrappedEnvironment(EnvironmentConfig pre, const NoveltyDescriptor& descriptor,
                     NoveltySchedule schedule, std::uint64_t seed)
      : pre_config_(std::move(pre)),
        post_config_(descriptor.apply(pre_config_)),  // fail before training starts
        schedule_(schedule),
        seed_(seed),
        inner_(pre_config_, Rng::derive(seed, 11)) {
    if (schedule_.injection_episode < 1)
      throw ConfigError("injection_episode must be >= 1");
    pre_config_.validate();
    post_config_.validate();
  }

  // Counts the reset, switches generation at the injection boundary, and
  // returns the initial observation of the new episode.
  Observation reset() {
    ++episode_counter_;
    if (!swapped_ && episode_counter_ >= schedule_.injection_episode) {
      inner_ = GridWorld(post_config_, Rng::derive(seed_, 13));
      swapped_ = true;
    }
    return inner_.reset();
  }

  StepResult step(Action a) { return inner_.step(a); }

  bool is_post_novelty() const {
    return episode_counter_ >= schedule_.injection_episode;
  }

  long episode_counter() const { return episode_counter_; }
  const NoveltySchedule& schedule() const { return schedule_; }
  const EnvironmentConfig& pre_config() const { return pre_config_; }
  const EnvironmentConfig& post_config() const { return post_config_; }
  const GridWorld& world() const { return inner_; }

 private:
  EnvironmentConfig pre_config_;
  EnvironmentConfig post_config_;
  NoveltySchedule schedule_;
  std::uint64_t seed_;
  GridWorld inner_;
  long episode_counter_ = 0;
  bool swapped_ = false;
};

inline WrappedEnvironment wrap(EnvironmentConfig pre,
                               const NoveltyDescriptor& descriptor,
                               NoveltySchedule schedule, std::uint64_t seed) {
  return WrappedEnvironment(std::move(pre), descriptor, schedule, seed);
}

}  // namespace gridshift
