#pragma once

#include <vector>

#include "apfnet/apf.hpp"

namespace apfnet::testing {

// Hand-evaluated potentials. Attractive rows leave `obstacles` empty and set
// eta to zero; repulsive rows put the ego at the goal so only repulsion is
// left; mixed rows carry both.
struct PotentialCase {
  const char* label;
  Vec2 x;
  Vec2 goal;
  std::vector<Vec2> obstacles;
  double xi;
  double eta;
  double d0;
  double expected;
};

inline std::vector<PotentialCase> hand_potential_cases() {
  return {
      {"att 3-4-5, xi 1", {3, 4}, {0, 0}, {}, 1.0, 0.0, 1.0, 12.5},
      {"att at goal", {7, -2}, {7, -2}, {}, 0.05, 0.0, 1.0, 0.0},
      {"att diagonal, xi 2", {1, 1}, {0, 0}, {}, 2.0, 0.0, 1.0, 2.0},
      {"att 6 m ahead, xi 0.5", {10, 0}, {4, 0}, {}, 0.5, 0.0, 1.0, 9.0},
      {"att 20 m, default xi", {0, 0}, {20, 0}, {}, 0.05, 0.0, 1.0, 10.0},
      {"att half metre, xi 4", {-1, 2}, {-1, 2.5}, {}, 4.0, 0.0, 1.0, 0.5},
      {"att 6-8-10, xi 0.1", {6, 8}, {0, 0}, {}, 0.1, 0.0, 1.0, 5.0},
      {"att lateral, xi 3", {0, -2}, {0, 0}, {}, 3.0, 0.0, 1.0, 6.0},
      {"rep d 1, d0 2", {0, 0}, {0, 0}, {{1, 0}}, 1.0, 2.0, 2.0, 0.25},
      {"rep beyond d0", {0, 0}, {0, 0}, {{3, 0}}, 1.0, 2.0, 2.0, 0.0},
      {"rep at d0", {0, 0}, {0, 0}, {{0, 2}}, 1.0, 2.0, 2.0, 0.0},
      {"rep d 0.5, d0 1, eta 1", {0, 0}, {0, 0}, {{0, -0.5}}, 1.0, 1.0, 1.0, 0.5},
      {"rep d 0.25, d0 1", {0, 0}, {0, 0}, {{0.25, 0}}, 1.0, 2.0, 1.0, 9.0},
      {"rep d 0.2, d0 0.5, eta 4", {0, 0}, {0, 0}, {{-0.2, 0}}, 1.0, 4.0, 0.5, 18.0},
      {"rep clamped below 0.1", {0, 0}, {0, 0}, {{0.05, 0}}, 1.0, 2.0, 1.0, 81.0},
      {"rep defaults d 1", {0, 0}, {0, 0}, {{0.6, 0.8}}, 1.0, 2.0, 8.0, 0.765625},
      {"rep defaults d 4", {0, 0}, {0, 0}, {{0, 4}}, 1.0, 2.0, 8.0, 0.015625},
      {"rep just beyond d0", {0, 0}, {0, 0}, {{8.0001, 0}}, 1.0, 1.0, 8.0, 0.0},
      {"rep two obstacles", {0, 0}, {0, 0}, {{1, 0}, {0, -1}}, 1.0, 2.0, 2.0, 0.5},
      {"att plus rep", {3, 4}, {0, 0}, {{3, 5}}, 1.0, 2.0, 2.0, 12.75},
  };
}

inline double evaluate_case(const PotentialCase& c) {
  if (c.eta == 0.0) return attractive_potential(c.x, c.goal, c.xi);
  ApfParams p;
  p.xi = c.xi;
  p.eta = c.eta;
  p.d0 = c.d0;
  return total_potential(c.x, c.goal, c.obstacles, p);
}

}  // namespace apfnet::testing
