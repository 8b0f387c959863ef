#include "apfnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "apfnet/errors.hpp"
#include "apfnet/loss.hpp"

namespace apfnet {

namespace {

constexpr int kGridH = 36;
constexpr int kGridW = 9;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vec sigmoid(const Vec& x) { return x.unaryExpr([](double v) { return sigmoid(v); }); }
Vec tanh(const Vec& x) { return x.unaryExpr([](double v) { return std::tanh(v); }); }

ConvParams conv_zeros(int k) { return {Mat::Zero(k, k), Vec::Zero(1)}; }

void fill_uniform(std::span<double> values, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : values) v = dist(rng);
}

double glorot(double fan_in, double fan_out) { return std::sqrt(6.0 / (fan_in + fan_out)); }

std::span<double> span_of(Mat& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> span_of(Vec& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

void check_frame_shape(const Map2d& m, const char* what) {
  if (m.rows() != static_cast<std::size_t>(kGridH) || m.cols() != static_cast<std::size_t>(kGridW)) {
    throw InputError(std::string(what) + ": expected a 36x9 map, got " + std::to_string(m.rows()) +
                     "x" + std::to_string(m.cols()));
  }
}

Eigen::Map<const Vec> flat(const Map2d& m) {
  return {m.data(), static_cast<Eigen::Index>(m.size())};
}

Map2d unflatten(const Vec& v) {
  Map2d m(kGridH, kGridW);
  std::copy(v.data(), v.data() + v.size(), m.data());
  return m;
}

// Gradients of a same-padded conv with respect to its input, kernel and bias,
// given dL/d(pre-activation).
struct ConvGrads {
  Map2d input;
  Mat kernel;
  double bias = 0.0;
};

ConvGrads conv2d_backward(const Map2d& input, const Mat& kernel, const Map2d& dpre) {
  const int rows = static_cast<int>(input.rows());
  const int cols = static_cast<int>(input.cols());
  const int k = static_cast<int>(kernel.rows());
  const int pad = k / 2;
  ConvGrads g{Map2d(input.rows(), input.cols()), Mat::Zero(k, k), 0.0};
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      const double d = dpre(i, j);
      if (d == 0.0) continue;
      g.bias += d;
      for (int a = 0; a < k; ++a) {
        const int y = i + a - pad;
        if (y < 0 || y >= rows) continue;
        for (int b = 0; b < k; ++b) {
          const int x = j + b - pad;
          if (x < 0 || x >= cols) continue;
          g.kernel(a, b) += d * input(y, x);
          g.input(y, x) += d * kernel(a, b);
        }
      }
    }
  }
  return g;
}

struct LstmStep {
  Vec gates;
  Vec c;
  Vec h;
};

LstmStep lstm_step(const Vec& x, const Vec& h_prev, const Vec& c_prev, const LstmParams& p) {
  const int hd = p.hidden();
  Vec a = p.b;
  a.noalias() += p.w_x * x;
  a.noalias() += p.w_h * h_prev;
  LstmStep s;
  s.gates.resize(4 * hd);
  s.gates.segment(0, hd) = sigmoid(Vec(a.segment(0, hd)));
  s.gates.segment(hd, hd) = sigmoid(Vec(a.segment(hd, hd)));
  s.gates.segment(2 * hd, hd) = tanh(Vec(a.segment(2 * hd, hd)));
  s.gates.segment(3 * hd, hd) = sigmoid(Vec(a.segment(3 * hd, hd)));
  const auto i = s.gates.segment(0, hd);
  const auto f = s.gates.segment(hd, hd);
  const auto g = s.gates.segment(2 * hd, hd);
  const auto o = s.gates.segment(3 * hd, hd);
  s.c = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  s.h = o.cwiseProduct(tanh(s.c));
  return s;
}

struct GruStep {
  Vec r, z, n, hn, h;
};

GruStep gru_step(const Vec& x, const Vec& h_prev, const GruParams& p) {
  const int g = p.hidden();
  Vec ax = p.b_x;
  ax.noalias() += p.w_x * x;
  Vec ah = p.b_h;
  ah.noalias() += p.w_h * h_prev;
  GruStep s;
  s.r = sigmoid(Vec(ax.segment(0, g) + ah.segment(0, g)));
  s.z = sigmoid(Vec(ax.segment(g, g) + ah.segment(g, g)));
  s.hn = ah.segment(2 * g, g);
  s.n = tanh(Vec(ax.segment(2 * g, g) + s.r.cwiseProduct(s.hn)));
  s.h = (Vec::Ones(g) - s.z).cwiseProduct(h_prev) + s.z.cwiseProduct(s.n);
  return s;
}

void check_lstm_dims(const Vec& x, const Vec& h, const LstmParams& p) {
  if (x.size() != p.w_x.cols() || h.size() != p.hidden() || p.w_x.rows() != 4 * p.hidden() ||
      p.b.size() != 4 * p.hidden()) {
    throw InputError("lstm_cell: dimension mismatch");
  }
}

void check_gru_dims(const Vec& x, const Vec& h, const GruParams& p) {
  if (x.size() != p.w_x.cols() || h.size() != p.hidden() || p.w_x.rows() != 3 * p.hidden() ||
      p.b_x.size() != 3 * p.hidden() || p.b_h.size() != 3 * p.hidden()) {
    throw InputError("gru_cell: dimension mismatch");
  }
}

Map2d frame_output(const Vec& gru_h) {
  Map2d out(kGridH, kGridW);
  for (int i = 0; i < gru_h.size(); ++i) out.data()[i] = 0.5 * (1.0 + gru_h[i]);
  return out;
}

template <bool kKeepTrace>
std::vector<Map2d> run_forward(std::span<const Map2d> inputs, const ModelParameters& params,
                               ForwardTrace* trace) {
  if (inputs.empty()) throw InputError("model_forward: empty input sequence");
  for (const auto& in : inputs) check_frame_shape(in, "model_forward input");
  if (params.gru.hidden() != kFrameSize) throw InputError("gru hidden size must be 324");

  const int hl = params.lstmHidden();
  Vec h_l = Vec::Zero(hl);
  Vec c_l = Vec::Zero(hl);
  Vec h_g = Vec::Zero(kFrameSize);

  std::vector<Map2d> outputs;
  outputs.reserve(inputs.size());
  if constexpr (kKeepTrace) {
    trace->lstm_hidden = hl;
    trace->frames.clear();
    trace->frames.reserve(inputs.size());
  }

  for (const auto& input : inputs) {
    Map2d pre1 = conv2d_forward(input, params.conv1.weight, params.conv1.bias[0], Activation::kNone);
    Map2d f1 = pre1;
    for (double& v : f1.values()) v = std::max(v, 0.0);
    Map2d pre2 = conv2d_forward(f1, params.conv2.weight, params.conv2.bias[0], Activation::kNone);
    Map2d f2 = pre2;
    for (double& v : f2.values()) v = std::max(v, 0.0);
    Map2d f_res = residual_add(f2, f1);
    Map2d f3 = conv2d_forward(f_res, params.conv3.weight, params.conv3.bias[0], Activation::kNone);

    const Vec x = flat(f3);
    LstmStep ls = lstm_step(x, h_l, c_l, params.lstm);
    GruStep gs = gru_step(ls.h, h_g, params.gru);
    outputs.push_back(frame_output(gs.h));

    h_l = ls.h;
    c_l = ls.c;
    h_g = gs.h;

    if constexpr (kKeepTrace) {
      FrameTrace ft;
      ft.input = input;
      ft.pre1 = std::move(pre1);
      ft.f1 = std::move(f1);
      ft.pre2 = std::move(pre2);
      ft.f2 = std::move(f2);
      ft.f_res = std::move(f_res);
      ft.f3 = std::move(f3);
      ft.lstm_gates = std::move(ls.gates);
      ft.lstm_c = std::move(ls.c);
      ft.lstm_h = std::move(ls.h);
      ft.gru_r = std::move(gs.r);
      ft.gru_z = std::move(gs.z);
      ft.gru_n = std::move(gs.n);
      ft.gru_hn = std::move(gs.hn);
      ft.gru_h = std::move(gs.h);
      trace->frames.push_back(std::move(ft));
    }
  }
  return outputs;
}

}  // namespace

ModelParameters ModelParameters::zeros(int lstm_hidden) {
  if (lstm_hidden < 1) throw InputError("lstm hidden size must be >= 1");
  ModelParameters p;
  p.conv1 = conv_zeros(9);
  p.conv2 = conv_zeros(5);
  p.conv3 = conv_zeros(7);
  p.lstm.w_x = Mat::Zero(4 * lstm_hidden, kFrameSize);
  p.lstm.w_h = Mat::Zero(4 * lstm_hidden, lstm_hidden);
  p.lstm.b = Vec::Zero(4 * lstm_hidden);
  p.gru.w_x = Mat::Zero(3 * kFrameSize, lstm_hidden);
  p.gru.w_h = Mat::Zero(3 * kFrameSize, kFrameSize);
  p.gru.b_x = Vec::Zero(3 * kFrameSize);
  p.gru.b_h = Vec::Zero(3 * kFrameSize);
  return p;
}

ModelParameters ModelParameters::initialized(std::uint64_t seed, int lstm_hidden) {
  ModelParameters p = zeros(lstm_hidden);
  std::mt19937_64 rng(seed);
  const double hl = lstm_hidden;
  fill_uniform(span_of(p.conv1.weight), glorot(81, 81), rng);
  fill_uniform(span_of(p.conv2.weight), glorot(25, 25), rng);
  fill_uniform(span_of(p.conv3.weight), glorot(49, 49), rng);
  fill_uniform(span_of(p.lstm.w_x), glorot(kFrameSize, 4 * hl), rng);
  fill_uniform(span_of(p.lstm.w_h), glorot(hl, 4 * hl), rng);
  fill_uniform(span_of(p.gru.w_x), glorot(hl, 3.0 * kFrameSize), rng);
  fill_uniform(span_of(p.gru.w_h), glorot(kFrameSize, 3.0 * kFrameSize), rng);
  return p;
}

std::vector<ParamArray> ModelParameters::arrays() {
  return {
      {"conv1.w", span_of(conv1.weight)}, {"conv1.b", span_of(conv1.bias)},
      {"conv2.w", span_of(conv2.weight)}, {"conv2.b", span_of(conv2.bias)},
      {"conv3.w", span_of(conv3.weight)}, {"conv3.b", span_of(conv3.bias)},
      {"lstm.w_x", span_of(lstm.w_x)},    {"lstm.w_h", span_of(lstm.w_h)},
      {"lstm.b", span_of(lstm.b)},        {"gru.w_x", span_of(gru.w_x)},
      {"gru.w_h", span_of(gru.w_h)},      {"gru.b_x", span_of(gru.b_x)},
      {"gru.b_h", span_of(gru.b_h)},
  };
}

std::vector<ConstParamArray> ModelParameters::arrays() const {
  auto mutable_arrays = const_cast<ModelParameters*>(this)->arrays();
  std::vector<ConstParamArray> out;
  out.reserve(mutable_arrays.size());
  for (const auto& a : mutable_arrays) out.push_back({a.name, a.values});
  return out;
}

std::size_t ModelParameters::parameterCount() const {
  std::size_t n = 0;
  for (const auto& a : arrays()) n += a.values.size();
  return n;
}

bool ModelParameters::allFinite() const {
  for (const auto& a : arrays()) {
    for (double v : a.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

bool ModelParameters::sameShape(const ModelParameters& o) const {
  const auto a = arrays();
  const auto b = o.arrays();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].values.size() != b[i].values.size()) return false;
  }
  return conv1.weight.rows() == o.conv1.weight.rows() && lstmHidden() == o.lstmHidden();
}

Map2d conv2d_forward(const Map2d& input, const Mat& kernel, double bias, Activation activation) {
  if (kernel.rows() != kernel.cols()) throw InputError("conv2d: kernel must be square");
  if (kernel.rows() % 2 == 0) throw InputError("conv2d: kernel size must be odd");
  const int rows = static_cast<int>(input.rows());
  const int cols = static_cast<int>(input.cols());
  const int k = static_cast<int>(kernel.rows());
  const int pad = k / 2;
  Map2d out(input.rows(), input.cols());
  for (int i = 0; i < rows; ++i) {
    const int a_lo = std::max(0, pad - i);
    const int a_hi = std::min(k, rows + pad - i);
    for (int j = 0; j < cols; ++j) {
      const int b_lo = std::max(0, pad - j);
      const int b_hi = std::min(k, cols + pad - j);
      double acc = bias;
      for (int a = a_lo; a < a_hi; ++a) {
        const int y = i + a - pad;
        for (int b = b_lo; b < b_hi; ++b) acc += kernel(a, b) * input(y, j + b - pad);
      }
      out(i, j) = activation == Activation::kRelu ? std::max(acc, 0.0) : acc;
    }
  }
  return out;
}

Map2d residual_add(const Map2d& a, const Map2d& b) {
  if (!a.sameShape(b)) throw InputError("residual_add: shape mismatch");
  Map2d out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

LstmState lstm_cell(const Vec& x, const Vec& h_prev, const Vec& c_prev, const LstmParams& p) {
  check_lstm_dims(x, h_prev, p);
  if (c_prev.size() != p.hidden()) throw InputError("lstm_cell: dimension mismatch");
  LstmStep s = lstm_step(x, h_prev, c_prev, p);
  return {std::move(s.h), std::move(s.c)};
}

Vec gru_cell(const Vec& x, const Vec& h_prev, const GruParams& p) {
  check_gru_dims(x, h_prev, p);
  return gru_step(x, h_prev, p).h;
}

ForwardResult model_forward(std::span<const Map2d> inputs, const ModelParameters& params) {
  ForwardResult r;
  r.outputs = run_forward<true>(inputs, params, &r.trace);
  return r;
}

std::vector<Map2d> model_predict(std::span<const Map2d> inputs, const ModelParameters& params) {
  return run_forward<false>(inputs, params, nullptr);
}

ModelParameters model_backward(const ForwardTrace& trace, const ModelParameters& params,
                               std::span<const Map2d> output_grads) {
  const std::size_t steps = trace.frames.size();
  if (output_grads.size() != steps) throw InputError("model_backward: gradient/trace length mismatch");
  if (trace.lstm_hidden != params.lstmHidden()) throw InputError("model_backward: trace/params mismatch");
  for (const auto& g : output_grads) check_frame_shape(g, "model_backward gradient");

  const int hl = params.lstmHidden();
  const int g = kFrameSize;
  ModelParameters grads = ModelParameters::zeros(hl);

  Vec dh_g_next = Vec::Zero(g);
  Vec dh_l_next = Vec::Zero(hl);
  Vec dc_l_next = Vec::Zero(hl);
  const Vec zero_l = Vec::Zero(hl);
  const Vec zero_g = Vec::Zero(g);

  for (std::size_t step = steps; step-- > 0;) {
    const FrameTrace& ft = trace.frames[step];
    const Vec& h_g_prev = step > 0 ? trace.frames[step - 1].gru_h : zero_g;
    const Vec& h_l_prev = step > 0 ? trace.frames[step - 1].lstm_h : zero_l;
    const Vec& c_l_prev = step > 0 ? trace.frames[step - 1].lstm_c : zero_l;

    // GRU.
    Vec dh = 0.5 * flat(output_grads[step]) + dh_g_next;
    const Vec dn = dh.cwiseProduct(ft.gru_z);
    const Vec dz = dh.cwiseProduct(ft.gru_n - h_g_prev);
    Vec dh_prev = dh.cwiseProduct(Vec::Ones(g) - ft.gru_z);

    Vec dax(3 * g);  // d(pre-activation) for the input-side blocks r, z, n
    Vec dah(3 * g);  // and for the recurrent-side blocks
    const Vec dan = dn.cwiseProduct(Vec::Ones(g) - ft.gru_n.cwiseProduct(ft.gru_n));
    const Vec dr = dan.cwiseProduct(ft.gru_hn);
    const Vec dar = dr.cwiseProduct(ft.gru_r.cwiseProduct(Vec::Ones(g) - ft.gru_r));
    const Vec daz = dz.cwiseProduct(ft.gru_z.cwiseProduct(Vec::Ones(g) - ft.gru_z));
    dax << dar, daz, dan;
    dah << dar, daz, dan.cwiseProduct(ft.gru_r);

    grads.gru.w_x.noalias() += dax * ft.lstm_h.transpose();
    grads.gru.b_x += dax;
    grads.gru.w_h.noalias() += dah * h_g_prev.transpose();
    grads.gru.b_h += dah;
    dh_prev.noalias() += params.gru.w_h.transpose() * dah;
    dh_g_next = std::move(dh_prev);

    // LSTM.
    Vec dh_l = dh_l_next;
    dh_l.noalias() += params.gru.w_x.transpose() * dax;
    const auto i = ft.lstm_gates.segment(0, hl);
    const auto f = ft.lstm_gates.segment(hl, hl);
    const auto gg = ft.lstm_gates.segment(2 * hl, hl);
    const auto o = ft.lstm_gates.segment(3 * hl, hl);
    const Vec tc = tanh(ft.lstm_c);
    const Vec dc = dc_l_next + dh_l.cwiseProduct(o).cwiseProduct(Vec::Ones(hl) - tc.cwiseProduct(tc));
    Vec da(4 * hl);
    da << dc.cwiseProduct(gg).cwiseProduct(i.cwiseProduct(Vec::Ones(hl) - i)),
        dc.cwiseProduct(c_l_prev).cwiseProduct(f.cwiseProduct(Vec::Ones(hl) - f)),
        dc.cwiseProduct(i).cwiseProduct(Vec::Ones(hl) - gg.cwiseProduct(gg)),
        dh_l.cwiseProduct(tc).cwiseProduct(o.cwiseProduct(Vec::Ones(hl) - o));

    const Vec x = flat(ft.f3);
    grads.lstm.w_x.noalias() += da * x.transpose();
    grads.lstm.w_h.noalias() += da * h_l_prev.transpose();
    grads.lstm.b += da;
    dh_l_next = params.lstm.w_h.transpose() * da;
    dc_l_next = dc.cwiseProduct(f);
    const Vec dx = params.lstm.w_x.transpose() * da;

    // Convolutions.
    const Map2d df3 = unflatten(dx);
    ConvGrads g3 = conv2d_backward(ft.f_res, params.conv3.weight, df3);
    grads.conv3.weight += g3.kernel;
    grads.conv3.bias[0] += g3.bias;

    Map2d dpre2 = g3.input;  // residual: d f2 = d f_res
    for (std::size_t c = 0; c < dpre2.size(); ++c) {
      if (!(ft.pre2.data()[c] > 0.0)) dpre2.data()[c] = 0.0;
    }
    ConvGrads g2 = conv2d_backward(ft.f1, params.conv2.weight, dpre2);
    grads.conv2.weight += g2.kernel;
    grads.conv2.bias[0] += g2.bias;

    Map2d dpre1 = residual_add(g3.input, g2.input);  // d f1 = d f_res + conv2 path
    for (std::size_t c = 0; c < dpre1.size(); ++c) {
      if (!(ft.pre1.data()[c] > 0.0)) dpre1.data()[c] = 0.0;
    }
    ConvGrads g1 = conv2d_backward(ft.input, params.conv1.weight, dpre1);
    grads.conv1.weight += g1.kernel;
    grads.conv1.bias[0] += g1.bias;
  }
  return grads;
}

GradientCheckResult finite_difference_check(const ModelParameters& params,
                                            std::span<const Map2d> inputs,
                                            std::span<const Map2d> targets,
                                            const GradientCheckOptions& options,
                                            const ModelParameters* analytic) {
  if (options.sample_count == 0) throw InputError("finite_difference_check: sample_count must be >= 1");
  if (!(options.epsilon > 0.0)) throw InputError("finite_difference_check: epsilon must be positive");
  if (inputs.size() != targets.size()) throw InputError("finite_difference_check: length mismatch");

  ModelParameters computed;
  if (analytic == nullptr) {
    const ForwardResult fwd = model_forward(inputs, params);
    const SequenceLoss sl = sequence_loss(fwd.outputs, targets);
    computed = model_backward(fwd.trace, params, sl.grads);
    analytic = &computed;
  }
  if (!analytic->sameShape(params)) throw InputError("finite_difference_check: gradient shape mismatch");

  ModelParameters probe = params;
  auto probe_arrays = probe.arrays();
  const auto grad_arrays = analytic->arrays();

  std::vector<std::size_t> candidates;
  for (std::size_t a = 0; a < probe_arrays.size(); ++a) {
    const bool wanted = options.arrays.empty() ||
                        std::find(options.arrays.begin(), options.arrays.end(),
                                  std::string(probe_arrays[a].name)) != options.arrays.end();
    if (wanted && !probe_arrays[a].values.empty()) candidates.push_back(a);
  }
  if (candidates.empty()) throw InputError("finite_difference_check: no parameter arrays selected");

  auto loss_at = [&]() { return sequence_loss(model_predict(inputs, probe), targets).loss; };

  // Distinct parameters, dealt round-robin across arrays so small arrays
  // (the conv biases) are always covered.
  std::mt19937_64 rng(options.seed);
  std::vector<std::vector<std::size_t>> pools;
  for (std::size_t a : candidates) {
    std::vector<std::size_t> pool(probe_arrays[a].values.size());
    std::iota(pool.begin(), pool.end(), 0);
    std::shuffle(pool.begin(), pool.end(), rng);
    pools.push_back(std::move(pool));
  }
  std::vector<std::pair<std::size_t, std::size_t>> picks;
  for (std::size_t round = 0; picks.size() < options.sample_count; ++round) {
    bool any = false;
    for (std::size_t c = 0; c < candidates.size() && picks.size() < options.sample_count; ++c) {
      if (round >= pools[c].size()) continue;
      picks.emplace_back(candidates[c], pools[c][round]);
      any = true;
    }
    if (!any) break;
  }

  GradientCheckResult result;
  result.samples.reserve(picks.size());
  for (const auto& [a, idx] : picks) {
    double& theta = probe_arrays[a].values[idx];
    const double saved = theta;
    theta = saved + options.epsilon;
    const double up = loss_at();
    theta = saved - options.epsilon;
    const double down = loss_at();
    theta = saved;

    GradientCheckSample sample;
    sample.array = std::string(probe_arrays[a].name);
    sample.index = idx;
    sample.analytic = grad_arrays[a].values[idx];
    sample.numeric = (up - down) / (2.0 * options.epsilon);
    const double abs_err = std::abs(sample.analytic - sample.numeric);
    const double scale = std::max(std::abs(sample.analytic), std::abs(sample.numeric));
    sample.error = scale < 1e-8 ? abs_err : abs_err / scale;
    result.max_error = std::max(result.max_error, sample.error);
    result.samples.push_back(std::move(sample));
  }
  return result;
}

}  // namespace apfnet
