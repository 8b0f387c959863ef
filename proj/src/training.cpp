#include "apfnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "apfnet/errors.hpp"

namespace apfnet {

LossAndGrad mse_loss(const Map2d& predicted, const Map2d& ideal) {
  if (!predicted.sameShape(ideal)) throw InputError("mse_loss: shape mismatch");
  const double n = static_cast<double>(predicted.size());
  LossAndGrad out{0.0, Map2d(predicted.rows(), predicted.cols())};
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted.data()[i] - ideal.data()[i];
    out.loss += d * d;
    out.grad.data()[i] = 2.0 * d / n;
  }
  out.loss /= n;
  return out;
}

SequenceLoss sequence_loss(std::span<const Map2d> predicted, std::span<const Map2d> ideal) {
  if (predicted.size() != ideal.size() || predicted.empty()) {
    throw InputError("sequence_loss: sequences must be non-empty and of equal length");
  }
  const double scale = 1.0 / static_cast<double>(predicted.size());
  SequenceLoss out;
  out.grads.reserve(predicted.size());
  for (std::size_t t = 0; t < predicted.size(); ++t) {
    LossAndGrad f = mse_loss(predicted[t], ideal[t]);
    out.loss += f.loss;
    for (double& g : f.grad.values()) g *= scale;
    out.grads.push_back(std::move(f.grad));
  }
  out.loss *= scale;
  return out;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InputError("train.epochs must be >= 1");
  if (!(optimizer.learning_rate > 0.0)) throw InputError("train.learning_rate must be positive");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InputError("train.train_fraction must lie in (0, 1)");
  }
  if (lstm_hidden < 1) throw InputError("train.lstm_hidden must be >= 1");
  if (optimizer.kind == OptimizerKind::kAdam &&
      !(optimizer.beta1 >= 0.0 && optimizer.beta1 < 1.0 && optimizer.beta2 >= 0.0 &&
        optimizer.beta2 < 1.0 && optimizer.epsilon > 0.0)) {
    throw InputError("train.adam: betas must lie in [0, 1) and epsilon must be positive");
  }
}

Sample make_sample(const Scenario& s, const GridSpec& spec, const ApfParams& params) {
  Sample sample;
  for (auto& g : rasterize_sequence(s, spec)) sample.inputs.push_back(std::move(g.values));
  for (auto& f : build_ideal_sequence(s, spec, params)) sample.targets.push_back(std::move(f.grid.values));
  return sample;
}

std::vector<Sample> make_dataset(std::span<const Scenario> suite, const GridSpec& spec,
                                 const ApfParams& params) {
  std::vector<Sample> out;
  out.reserve(suite.size());
  for (const auto& s : suite) out.push_back(make_sample(s, spec, params));
  return out;
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) {}

void Optimizer::apply(ModelParameters& params, const ModelParameters& grads) {
  if (!params.sameShape(grads)) throw InputError("apply_update: gradient shape mismatch");
  auto p_arrays = params.arrays();
  const auto g_arrays = grads.arrays();
  for (const auto& g : g_arrays) {
    for (double v : g.values) {
      if (!std::isfinite(v)) {
        throw NumericError("non-finite gradient in parameter array " + std::string(g.name));
      }
    }
  }

  ++step_;
  const double lr = config_.learning_rate;
  if (config_.kind == OptimizerKind::kSgd) {
    for (std::size_t a = 0; a < p_arrays.size(); ++a) {
      auto p = p_arrays[a].values;
      auto g = g_arrays[a].values;
      for (std::size_t i = 0; i < p.size(); ++i) p[i] -= lr * g[i];
    }
    return;
  }

  if (m_.empty()) {
    for (const auto& g : g_arrays) {
      m_.emplace_back(g.values.size(), 0.0);
      v_.emplace_back(g.values.size(), 0.0);
    }
  }
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
  for (std::size_t a = 0; a < p_arrays.size(); ++a) {
    auto p = p_arrays[a].values;
    auto g = g_arrays[a].values;
    auto& m = m_[a];
    auto& v = v_[a];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config_.epsilon);
    }
  }
}

ModelParameters apply_update(const ModelParameters& params, const ModelParameters& grads,
                             Optimizer& optimizer) {
  ModelParameters out = params;
  optimizer.apply(out, grads);
  return out;
}

double evaluate_loss(const ModelParameters& params, std::span<const Sample> samples) {
  if (samples.empty()) throw InputError("evaluate_loss: empty sample set");
  double total = 0.0;
  for (const auto& s : samples) {
    total += sequence_loss(model_predict(s.inputs, params), s.targets).loss;
  }
  const double mean = total / static_cast<double>(samples.size());
  if (!std::isfinite(mean)) throw NumericError("evaluation loss is not finite");
  return mean;
}

double train_epoch(ModelParameters& params, std::span<const Sample> partition,
                   Optimizer& optimizer, std::mt19937_64& rng) {
  if (partition.empty()) throw InputError("train_epoch: empty partition");
  std::vector<std::size_t> order(partition.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  double total = 0.0;
  for (std::size_t idx : order) {
    const Sample& s = partition[idx];
    ForwardResult fwd = model_forward(s.inputs, params);
    SequenceLoss sl = sequence_loss(fwd.outputs, s.targets);
    if (!std::isfinite(sl.loss)) throw NumericError("training loss is not finite");
    total += sl.loss;
    optimizer.apply(params, model_backward(fwd.trace, params, sl.grads));
  }
  return total / static_cast<double>(partition.size());
}

FitResult fit(const TrainConfig& config, std::span<const Sample> dataset,
              const EpochCallback& on_epoch) {
  config.validate();
  if (dataset.size() < 2) throw InputError("fit: dataset needs at least 2 sequences");

  std::mt19937_64 rng(config.seed);
  FitResult result;
  result.params = ModelParameters::initialized(rng(), config.lstm_hidden);

  std::vector<std::size_t> perm(dataset.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  auto n_train = static_cast<std::size_t>(std::llround(config.train_fraction * dataset.size()));
  n_train = std::clamp<std::size_t>(n_train, 1, dataset.size() - 1);
  result.train_indices.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  result.test_indices.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());

  std::vector<Sample> train;
  std::vector<Sample> test;
  for (auto i : result.train_indices) train.push_back(dataset[i]);
  for (auto i : result.test_indices) test.push_back(dataset[i]);

  Optimizer optimizer(config.optimizer);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    LossRecord rec;
    rec.epoch = epoch;
    rec.running_loss = train_epoch(result.params, train, optimizer, rng);
    rec.train_loss = evaluate_loss(result.params, train);
    rec.test_loss = evaluate_loss(result.params, test);
    result.records.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return result;
}

std::string loss_history_csv(std::span<const LossRecord> records) {
  std::string out = "epoch,train_loss,test_loss\n";
  char line[96];
  for (const auto& r : records) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g\n", r.epoch, r.train_loss, r.test_loss);
    out += line;
  }
  return out;
}

}  // namespace apfnet
