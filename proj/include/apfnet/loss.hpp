#pragma once

#include <span>
#include <vector>

#include "apfnet/map2d.hpp"

namespace apfnet {

struct LossAndGrad {
  double loss = 0.0;
  Map2d grad;
};

// Mean squared error over the H*W cells.
LossAndGrad mse_loss(const Map2d& predicted, const Map2d& ideal);

struct SequenceLoss {
  double loss = 0.0;
  std::vector<Map2d> grads;
};

// Mean of the per-frame mse_loss values; gradients are scaled to match.
SequenceLoss sequence_loss(std::span<const Map2d> predicted, std::span<const Map2d> ideal);

}  // namespace apfnet
