#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "apfnet/network.hpp"

namespace apfnet {

// Binary layout, all little-endian:
//   "APFNET01"
//   u32 lstm_hidden, u32 horizon
//   per parameter array in ModelParameters::arrays() order:
//     u64 element count, then row-major f64 values
struct Checkpoint {
  ModelParameters params;
  std::uint32_t horizon = 1;  // sequence length the model was trained on
};

std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace apfnet
