#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "apfnet/map2d.hpp"

namespace apfnet {

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

inline constexpr int kDefaultLstmHidden = 128;
inline constexpr int kFrameSize = 36 * 9;

enum class Activation { kNone, kRelu };

struct ConvParams {
  Mat weight;  // k x k, k odd
  Vec bias;    // single element
};

// Gate blocks are stacked along rows in the order input, forget, cell, output.
struct LstmParams {
  Mat w_x;  // 4H x input
  Mat w_h;  // 4H x H
  Vec b;    // 4H
  int hidden() const { return static_cast<int>(w_h.cols()); }
};

// Gate blocks are stacked along rows in the order reset, update, candidate.
// h' = (1 - z) * h + z * n, so an update gate of 0 keeps the previous state.
struct GruParams {
  Mat w_x;  // 3G x input
  Mat w_h;  // 3G x G
  Vec b_x;  // 3G
  Vec b_h;  // 3G
  int hidden() const { return static_cast<int>(w_h.cols()); }
};

struct ParamArray {
  std::string_view name;
  std::span<double> values;
};

struct ConstParamArray {
  std::string_view name;
  std::span<const double> values;
};

// Conv(9) -> Conv(5) -> residual -> Conv(7) -> LSTM -> GRU(324) -> 36x9.
struct ModelParameters {
  ConvParams conv1;
  ConvParams conv2;
  ConvParams conv3;
  LstmParams lstm;
  GruParams gru;

  static ModelParameters zeros(int lstm_hidden = kDefaultLstmHidden);
  // Weights uniform in +-sqrt(6 / (fan_in + fan_out)), biases zero.
  static ModelParameters initialized(std::uint64_t seed, int lstm_hidden = kDefaultLstmHidden);

  int lstmHidden() const { return lstm.hidden(); }

  // Every parameter array in checkpoint order.
  std::vector<ParamArray> arrays();
  std::vector<ConstParamArray> arrays() const;
  std::size_t parameterCount() const;

  bool allFinite() const;
  bool sameShape(const ModelParameters& o) const;
};

// Same-padded 2-D cross-correlation plus bias, optionally rectified.
Map2d conv2d_forward(const Map2d& input, const Mat& kernel, double bias,
                     Activation activation);
Map2d residual_add(const Map2d& a, const Map2d& b);

struct LstmState {
  Vec h;
  Vec c;
};

LstmState lstm_cell(const Vec& x, const Vec& h_prev, const Vec& c_prev, const LstmParams& p);
Vec gru_cell(const Vec& x, const Vec& h_prev, const GruParams& p);

// Activations kept for one frame of the forward pass.
struct FrameTrace {
  Map2d input;
  Map2d pre1, f1;
  Map2d pre2, f2;
  Map2d f_res;
  Map2d f3;
  Vec lstm_gates;  // post-activation i, f, g, o
  Vec lstm_c;
  Vec lstm_h;
  Vec gru_r, gru_z, gru_n;
  Vec gru_hn;  // w_h[n] * h_prev + b_h[n], before the reset gate
  Vec gru_h;
};

struct ForwardTrace {
  int lstm_hidden = 0;
  std::vector<FrameTrace> frames;
};

struct ForwardResult {
  std::vector<Map2d> outputs;  // T maps of 36x9, values in (0, 1)
  ForwardTrace trace;
};

// Runs the sequence from zero recurrent state. The GRU state h is mapped to
// the output by (1 + h) / 2.
ForwardResult model_forward(std::span<const Map2d> inputs, const ModelParameters& params);
std::vector<Map2d> model_predict(std::span<const Map2d> inputs, const ModelParameters& params);

// Reverse-mode gradients of a scalar loss given dL/d(output) for every frame,
// including backpropagation through time.
ModelParameters model_backward(const ForwardTrace& trace, const ModelParameters& params,
                               std::span<const Map2d> output_grads);

struct GradientCheckOptions {
  std::size_t sample_count = 200;
  double epsilon = 1e-4;
  std::uint64_t seed = 7;
  // Restrict sampling to these arrays; empty means all of them.
  std::vector<std::string> arrays;
};

struct GradientCheckSample {
  std::string array;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double error = 0.0;
};

struct GradientCheckResult {
  double max_error = 0.0;
  std::vector<GradientCheckSample> samples;
};

// Compares analytic gradients of the mean-over-frames MSE loss against central
// differences at up to sample_count distinct parameters. The error is relative
// to the larger of the two magnitudes, falling back to the absolute error when
// both are below 1e-8. If `analytic` is null the gradients come from
// model_backward. Central differences are meaningless where a ReLU input sits
// exactly on 0, so check at a point with nonzero conv biases.
GradientCheckResult finite_difference_check(const ModelParameters& params,
                                            std::span<const Map2d> inputs,
                                            std::span<const Map2d> targets,
                                            const GradientCheckOptions& options = {},
                                            const ModelParameters* analytic = nullptr);

}  // namespace apfnet
