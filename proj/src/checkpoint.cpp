#include "apfnet/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <type_traits>

#include "apfnet/errors.hpp"
#include "apfnet/scenario_io.hpp"

namespace apfnet {

namespace {

constexpr char kMagic[8] = {'A', 'P', 'F', 'N', 'E', 'T', '0', '1'};

template <typename T>
void put(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(reinterpret_cast<const char*>(bytes), sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw InputError("checkpoint: truncated file");
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
  }

  void expectMagic() {
    if (bytes_.size() < sizeof(kMagic) || std::memcmp(bytes_.data(), kMagic, sizeof(kMagic)) != 0) {
      throw InputError("checkpoint: bad magic (expected APFNET01)");
    }
    pos_ = sizeof(kMagic);
  }

  bool atEnd() const { return pos_ == bytes_.size(); }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.params.lstmHidden()));
  put<std::uint32_t>(out, ckpt.horizon);
  for (const auto& a : ckpt.params.arrays()) {
    put<std::uint64_t>(out, a.values.size());
    for (double v : a.values) put<double>(out, v);
  }
  return out;
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader in(bytes);
  in.expectMagic();
  const auto hidden = in.get<std::uint32_t>();
  const auto horizon = in.get<std::uint32_t>();
  if (hidden == 0 || hidden > (1u << 16)) throw InputError("checkpoint: implausible lstm hidden size");
  if (horizon == 0) throw InputError("checkpoint: horizon must be >= 1");

  Checkpoint ckpt{ModelParameters::zeros(static_cast<int>(hidden)), horizon};
  for (auto& a : ckpt.params.arrays()) {
    const auto count = in.get<std::uint64_t>();
    if (count != a.values.size()) {
      throw InputError("checkpoint: array " + std::string(a.name) + " has " + std::to_string(count) +
                       " elements, expected " + std::to_string(a.values.size()));
    }
    for (double& v : a.values) v = in.get<double>();
  }
  if (!in.atEnd()) throw InputError("checkpoint: trailing bytes");
  if (!ckpt.params.allFinite()) throw NumericError("checkpoint: non-finite parameter values");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_text_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_text_file(path));
}

}  // namespace apfnet
