#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "apfnet/apf.hpp"
#include "apfnet/loss.hpp"
#include "apfnet/network.hpp"
#include "apfnet/scenario.hpp"

namespace apfnet {

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  int epochs = 20;
  OptimizerConfig optimizer;
  std::uint64_t seed = 42;
  double train_fraction = 0.8;
  int lstm_hidden = kDefaultLstmHidden;

  void validate() const;
};

// One supervised sequence: binary input maps and their ideal field maps.
struct Sample {
  std::vector<Map2d> inputs;
  std::vector<Map2d> targets;
};

Sample make_sample(const Scenario& s, const GridSpec& spec, const ApfParams& params);
std::vector<Sample> make_dataset(std::span<const Scenario> suite, const GridSpec& spec,
                                 const ApfParams& params);

// train_loss and test_loss are both evaluated with the parameters at the end
// of the epoch; running_loss is the mean seen while updating.
struct LossRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double test_loss = 0.0;
  double running_loss = 0.0;
};

// Plain SGD or bias-corrected Adam. Moment buffers are created lazily on the
// first update and keyed by parameter array.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config);

  // Throws NumericError naming the first array holding a non-finite gradient;
  // params are left untouched in that case.
  void apply(ModelParameters& params, const ModelParameters& grads);

  const OptimizerConfig& config() const { return config_; }
  long steps() const { return step_; }

 private:
  OptimizerConfig config_;
  long step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

ModelParameters apply_update(const ModelParameters& params, const ModelParameters& grads,
                             Optimizer& optimizer);

// Mean sequence loss of `params` over `samples` without updating anything.
double evaluate_loss(const ModelParameters& params, std::span<const Sample> samples);

// One pass over `partition` in an order shuffled by `rng`: forward, loss,
// backward and update per sequence. Returns the mean per-sequence loss.
double train_epoch(ModelParameters& params, std::span<const Sample> partition,
                   Optimizer& optimizer, std::mt19937_64& rng);

struct FitResult {
  ModelParameters params;
  std::vector<LossRecord> records;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> test_indices;
};

using EpochCallback = std::function<void(const LossRecord&)>;

// Seeded split, seeded initialisation and seeded shuffles: identical inputs
// give bit-identical records.
FitResult fit(const TrainConfig& config, std::span<const Sample> dataset,
              const EpochCallback& on_epoch = {});

// "epoch,train_loss,test_loss" with 17 significant digits.
std::string loss_history_csv(std::span<const LossRecord> records);

}  // namespace apfnet
