#include <gtest/gtest.h>

#include <cstring>
#include <limits>

#include "apfnet/checkpoint.hpp"
#include "apfnet/errors.hpp"
#include "test_support.hpp"

namespace apfnet {
namespace {

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));  // the test hosts are little-endian
}

// Byte layout assembled by hand, independently of the encoder.
std::string hand_encode(const ModelParameters& p, std::uint32_t horizon) {
  std::string out = "APFNET01";
  put<std::uint32_t>(out, static_cast<std::uint32_t>(p.lstmHidden()));
  put<std::uint32_t>(out, horizon);
  auto emit = [&](const double* data, std::size_t n) {
    put<std::uint64_t>(out, n);
    for (std::size_t i = 0; i < n; ++i) put<double>(out, data[i]);
  };
  emit(p.conv1.weight.data(), p.conv1.weight.size());
  emit(p.conv1.bias.data(), p.conv1.bias.size());
  emit(p.conv2.weight.data(), p.conv2.weight.size());
  emit(p.conv2.bias.data(), p.conv2.bias.size());
  emit(p.conv3.weight.data(), p.conv3.weight.size());
  emit(p.conv3.bias.data(), p.conv3.bias.size());
  emit(p.lstm.w_x.data(), p.lstm.w_x.size());
  emit(p.lstm.w_h.data(), p.lstm.w_h.size());
  emit(p.lstm.b.data(), p.lstm.b.size());
  emit(p.gru.w_x.data(), p.gru.w_x.size());
  emit(p.gru.w_h.data(), p.gru.w_h.size());
  emit(p.gru.b_x.data(), p.gru.b_x.size());
  emit(p.gru.b_h.data(), p.gru.b_h.size());
  return out;
}

bool same_values(const ModelParameters& a, const ModelParameters& b) {
  const auto aa = a.arrays();
  const auto bb = b.arrays();
  if (aa.size() != bb.size()) return false;
  for (std::size_t k = 0; k < aa.size(); ++k) {
    if (aa[k].values.size() != bb[k].values.size()) return false;
    if (std::memcmp(aa[k].values.data(), bb[k].values.data(), aa[k].values.size() * sizeof(double)) != 0) {
      return false;
    }
  }
  return true;
}

TEST(Checkpoint, EncoderMatchesHandLayout) {
  const Checkpoint c{ModelParameters::initialized(1, 6), 7};
  EXPECT_EQ(encode_checkpoint(c), hand_encode(c.params, 7));
}

TEST(Checkpoint, RoundTripIsBitExact) {
  for (int hidden : {1, 5, 128}) {
    const Checkpoint c{ModelParameters::initialized(hidden, hidden), 10};
    const Checkpoint back = decode_checkpoint(encode_checkpoint(c));
    EXPECT_EQ(back.horizon, 10u);
    EXPECT_EQ(back.params.lstmHidden(), hidden);
    EXPECT_TRUE(same_values(c.params, back.params));
  }
}

TEST(Checkpoint, FileRoundTrip) {
  testing::TempDir dir("ckpt");
  const Checkpoint c{ModelParameters::initialized(9, 4), 3};
  save_checkpoint(dir / "m.ckpt", c);
  const Checkpoint back = load_checkpoint(dir / "m.ckpt");
  EXPECT_TRUE(same_values(c.params, back.params));
  EXPECT_EQ(back.horizon, 3u);
}

TEST(Checkpoint, RejectsCorruption) {
  const std::string good = encode_checkpoint({ModelParameters::initialized(2, 4), 2});
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), InputError);
  EXPECT_THROW(decode_checkpoint(good.substr(0, good.size() - 1)), InputError);
  EXPECT_THROW(decode_checkpoint(good + "x"), InputError);
  EXPECT_THROW(decode_checkpoint(""), InputError);

  // Horizon zero.
  bad = good;
  std::memset(&bad[12], 0, 4);
  EXPECT_THROW(decode_checkpoint(bad), InputError);

  // Element count of conv1.w altered.
  bad = good;
  bad[16] = 80;
  EXPECT_THROW(decode_checkpoint(bad), InputError);
}

TEST(Checkpoint, NonFiniteValuesAreNumericErrors) {
  ModelParameters p = ModelParameters::initialized(2, 4);
  p.gru.b_h[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(decode_checkpoint(hand_encode(p, 1)), NumericError);
}

TEST(Checkpoint, MissingFileIsInputError) {
  EXPECT_THROW(load_checkpoint("/nonexistent/dir/model.ckpt"), InputError);
}

}  // namespace
}  // namespace apfnet
