#include <gtest/gtest.h>

#include <cmath>

#include "apfnet/errors.hpp"
#include "apfnet/generator.hpp"
#include "apfnet/scenario_io.hpp"

namespace apfnet {
namespace {

TEST(Generator, CountAndDeterminism) {
  const auto a = generate_suite(25, 9);
  const auto b = generate_suite(25, 9);
  const auto c = generate_suite(25, 10);
  EXPECT_EQ(a.size(), 25u);
  EXPECT_EQ(dump_suite(a), dump_suite(b));
  EXPECT_NE(dump_suite(a), dump_suite(c));
}

TEST(Generator, EveryScenarioIsValidProperty) {
  for (auto d : {Difficulty::kEmpty, Difficulty::kStatic, Difficulty::kMixed}) {
    GeneratorConfig cfg;
    cfg.difficulty = d;
    for (const auto& s : generate_suite(200, 3, cfg)) {
      EXPECT_NO_THROW(s.validate());
      EXPECT_EQ(s.horizon_steps, cfg.horizon_steps);
      EXPECT_EQ(s.dt, cfg.dt);
      EXPECT_NEAR(s.goal.x - s.ego.position.x, cfg.goal_distance, 1e-12);
      EXPECT_LE(static_cast<int>(s.obstacles.size()), cfg.max_obstacles);
      for (const auto& o : s.obstacles) {
        EXPECT_GE(o.radius, cfg.radius_min);
        EXPECT_LE(o.radius, cfg.radius_max);
        EXPECT_GE(o.velocity.x, 0.0);
        EXPECT_LE(o.velocity.x, cfg.speed_max);
        EXPECT_EQ(o.velocity.y, 0.0);
      }
    }
  }
}

TEST(Generator, DifficultyShapesObstacleCounts) {
  GeneratorConfig cfg;
  cfg.difficulty = Difficulty::kEmpty;
  for (const auto& s : generate_suite(50, 1, cfg)) EXPECT_TRUE(s.obstacles.empty());

  cfg.difficulty = Difficulty::kStatic;
  for (const auto& s : generate_suite(50, 1, cfg)) {
    ASSERT_EQ(s.obstacles.size(), 1u);
    EXPECT_EQ(s.obstacles[0].velocity, (Vec2{0.0, 0.0}));
    const double off = std::abs(s.obstacles[0].position.y - s.ego.position.y);
    EXPECT_GE(off, cfg.offset_min - 1e-12);
    EXPECT_LE(off, cfg.offset_max + 1e-12);
    EXPECT_GT(s.obstacles[0].position.x, s.ego.position.x);
    EXPECT_LT(s.obstacles[0].position.x, s.goal.x);
  }

  cfg.difficulty = Difficulty::kMixed;
  int moving = 0;
  for (const auto& s : generate_suite(200, 1, cfg)) {
    for (const auto& o : s.obstacles) moving += o.velocity.x > 0.0;
  }
  EXPECT_GT(moving, 0);
}

TEST(Generator, StartAndGoalStayClearOfObstaclesProperty) {
  for (const auto& s : generate_suite(300, 4)) {
    for (const auto& o : s.obstacles) {
      for (int k = 0; k <= 100; ++k) {
        const double t = 0.1 * k;
        const Vec2 p = o.position + o.velocity * t;
        EXPECT_GT(distance(p, s.ego.position), o.radius + 3.0);
        EXPECT_GT(distance(p, s.goal), o.radius + 2.5);
      }
    }
  }
}

TEST(Generator, ParsesDifficultyNames) {
  EXPECT_EQ(parse_difficulty("empty"), Difficulty::kEmpty);
  EXPECT_EQ(parse_difficulty("static"), Difficulty::kStatic);
  EXPECT_EQ(parse_difficulty("mixed"), Difficulty::kMixed);
  EXPECT_EQ(to_string(Difficulty::kStatic), "static");
  EXPECT_THROW(parse_difficulty("hard"), InputError);
}

TEST(Generator, RejectsBadConfig) {
  EXPECT_THROW(generate_suite(0, 1), InputError);
  GeneratorConfig cfg;
  cfg.offset_max = 2.0;  // past the lane half width
  EXPECT_THROW(generate_suite(1, 1, cfg), InputError);
  cfg = GeneratorConfig{};
  cfg.radius_min = 0.0;
  EXPECT_THROW(cfg.validate(), InputError);
  cfg = GeneratorConfig{};
  cfg.horizon_steps = 0;
  EXPECT_THROW(cfg.validate(), InputError);
}

}  // namespace
}  // namespace apfnet
