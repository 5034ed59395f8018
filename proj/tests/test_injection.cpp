#include "doctest.h"

#include "gridshift/catalog.hpp"
#include "gridshift/injection.hpp"
#include "gridshift/layout.hpp"
#include "test_util.hpp"

using namespace gridshift;
using namespace testutil;

TEST_SUITE_BEGIN("injection");

TEST_CASE("wrapping computes the post config eagerly") {
  const auto descriptor = make_descriptor("DoorKeyChange", {});
  WrappedEnvironment env =
      wrap(layout_doorkey_6x6(), descriptor, NoveltySchedule{2000}, 1);
  CHECK(env.post_config().door_requirements.at("d0").required_color == Color::blue);
  CHECK(env.pre_config().door_requirements.at("d0").required_color == Color::yellow);
  CHECK(env.episode_counter() == 0);

  SUBCASE("a zero injection episode is a schedule error") {
    CHECK_THROWS_AS(
        wrap(layout_doorkey_6x6(), descriptor, NoveltySchedule{0}, 1),
        ConfigError);
  }
  SUBCASE("bad transform parameters surface at wrap time") {
    const auto broken = make_descriptor("DoorKeyChange", {{"door", "d9"}});
    CHECK_THROWS_AS(
        wrap(layout_doorkey_6x6(), broken, NoveltySchedule{10}, 1),
        TransformError);
  }
  SUBCASE("an identity transform yields identical configs") {
    const auto identity = make_descriptor("ForwardMovementSpeed", {{"step", 1}});
    WrappedEnvironment same =
        wrap(layout_doorkey_6x6(), identity, NoveltySchedule{5}, 1);
    CHECK(same.pre_config() == same.post_config());
  }
}

TEST_CASE("the swap happens exactly at the injection reset") {
  const auto descriptor = make_descriptor("GoalLocationChange", {});
  WrappedEnvironment env =
      wrap(layout_open_6x6(), descriptor, NoveltySchedule{3}, 7);
  std::vector<bool> post_flags;
  for (int episode = 1; episode <= 6; ++episode) {
    env.reset();
    post_flags.push_back(env.is_post_novelty());
    CHECK(env.world().config() ==
          (env.is_post_novelty() ? env.post_config() : env.pre_config()));
  }
  CHECK(post_flags == std::vector<bool>{false, false, true, true, true, true});
}

TEST_CASE("which key works flips at the boundary") {
  const auto descriptor = make_descriptor("DoorKeyChange", {});
  WrappedEnvironment env =
      wrap(layout_doorkey_6x6(), descriptor, NoveltySchedule{2}, 3);
  const std::vector<Action> yellow_route = {Action::turn_left, Action::pickup,
                                            Action::turn_right, Action::forward,
                                            Action::toggle};
  const std::vector<Action> blue_route = {Action::turn_right, Action::pickup,
                                          Action::turn_left, Action::forward,
                                          Action::toggle};

  env.reset();  // episode 1, pre-novelty: the yellow key opens the door
  for (Action a : yellow_route) env.step(a);
  CHECK(env.world().cell({3, 2})->open);

  env.reset();  // episode 2, post-novelty: yellow stops working
  for (Action a : yellow_route) env.step(a);
  CHECK_FALSE(env.world().cell({3, 2})->open);

  env.reset();  // still post-novelty: blue opens it now
  for (Action a : blue_route) env.step(a);
  CHECK(env.world().cell({3, 2})->open);
}

TEST_CASE("a half-finished episode is discarded at the boundary") {
  const auto descriptor = make_descriptor("GoalLocationChange", {});
  WrappedEnvironment env =
      wrap(layout_open_6x6(), descriptor, NoveltySchedule{2}, 5);
  env.reset();
  env.step(Action::forward);
  env.step(Action::forward);
  CHECK(env.world().step_count() == 2);

  env.reset();  // injection: fresh post-novelty grid, nothing mutated in place
  CHECK(env.world().step_count() == 0);
  CHECK(env.world().agent().position == Position{1, 1});
  bool goal_moved = false;
  for (const auto& cell : env.world().cells())
    if (cell && cell->kind == Kind::goal) goal_moved = true;
  CHECK(goal_moved);
  CHECK(env.world().config() == env.post_config());
}

TEST_CASE("the post-novelty flag reflects the schedule, not the world") {
  const auto identity = make_descriptor("ForwardMovementSpeed", {{"step", 1}});
  WrappedEnvironment env =
      wrap(layout_open_6x6(), identity, NoveltySchedule{2000}, 1);
  for (int episode = 1; episode <= 1999; ++episode) env.reset();
  CHECK(env.episode_counter() == 1999);
  CHECK_FALSE(env.is_post_novelty());
  env.reset();
  CHECK(env.episode_counter() == 2000);
  CHECK(env.is_post_novelty());
}

TEST_CASE("every applicable novelty preserves observation shape and actions") {
  for (const auto& entry : catalog_entries()) {
    for (const auto& [layout_name, make] : builtin_layouts()) {
      const EnvironmentConfig pre = make();
      EnvironmentConfig post;
      try {
        post = entry.descriptor.apply(pre);
      } catch (const TransformError&) {
        continue;  // novelty not applicable to this layout
      }
      CAPTURE(entry.descriptor.name);
      CAPTURE(layout_name);
      GridWorld pre_world(pre, 3);
      GridWorld post_world(post, 3);
      const Observation a = pre_world.observe();
      const Observation b = post_world.observe();
      CHECK(a.width == b.width);
      CHECK(a.height == b.height);
      CHECK(a.cells.size() == b.cells.size());
      CHECK(a.inventory.size() == b.inventory.size());
      CHECK(kActionCount == 7);
    }
  }
}

TEST_SUITE_END();
