#include "converse/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "converse/error.hpp"

namespace converse {

namespace {

constexpr std::array<char, 8> kMagic{'C', 'V', 'R', 'S', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, T v) {
  static_assert(std::is_integral_v<T>);
  std::array<char, sizeof(T)> buf{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xFF);
  }
  out.write(buf.data(), buf.size());
}

template <typename T>
T get(std::istream& in) {
  std::array<unsigned char, sizeof(T)> buf{};
  in.read(reinterpret_cast<char*>(buf.data()), buf.size());
  if (!in) throw IoError("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
  return static_cast<T>(v);
}

std::string get_bytes(std::istream& in, std::uint64_t n) {
  if (n > (std::uint64_t{1} << 32)) throw IoError("checkpoint: implausible section size");
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  if (!in) throw IoError("checkpoint: truncated file");
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const CheckpointData& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kVersion);
  put<std::uint64_t>(out, data.seed);
  put<std::uint64_t>(out, data.step);
  put<std::uint64_t>(out, data.metadata_json.size());
  out.write(data.metadata_json.data(), static_cast<std::streamsize>(data.metadata_json.size()));
  put<std::uint64_t>(out, data.tensors.size());
  for (const auto& [name, t] : data.tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) put<std::uint64_t>(out, d);
    for (double v : t.values()) put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw IoError("checkpoint write failed: " + path.string());
}

CheckpointData load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError("not a checkpoint file: " + path.string());
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw IoError("unsupported checkpoint version " + std::to_string(version));
  CheckpointData data;
  data.seed = get<std::uint64_t>(in);
  data.step = get<std::uint64_t>(in);
  data.metadata_json = get_bytes(in, get<std::uint64_t>(in));
  const auto count = get<std::uint64_t>(in);
  for (std::uint64_t s = 0; s < count; ++s) {
    std::string name = get_bytes(in, get<std::uint32_t>(in));
    const auto rank = get<std::uint32_t>(in);
    if (rank == 0 || rank > 2) throw IoError("checkpoint: bad rank for " + name);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(get<std::uint64_t>(in));
    std::vector<double> values(shape_product(shape));
    for (double& v : values) v = std::bit_cast<double>(get<std::uint64_t>(in));
    data.tensors.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  return data;
}

}  // namespace converse
