#pragma once

// Binary parameter checkpoint. Layout (all integers little-endian):
//
//   magic     8 bytes  "CVRSCKPT"
//   version   u32      1
//   seed      u64
//   step      u64
//   meta_len  u64, then meta_len bytes of UTF-8 JSON (model config, vocabulary)
//   count     u64      number of tensor sections
//   section*  name_len u32, name bytes, rank u32, dims u64[rank],
//             values f64[prod(dims)] as IEEE-754 bit patterns
//
// Values are stored by bit pattern, so a save/load round trip is exact.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "converse/tensor.hpp"

namespace converse {

struct CheckpointData {
  std::uint64_t seed = 0;
  std::uint64_t step = 0;
  std::string metadata_json;
  std::vector<std::pair<std::string, Tensor>> tensors;
};

void save_checkpoint(const std::filesystem::path& path, const CheckpointData& data);
CheckpointData load_checkpoint(const std::filesystem::path& path);

}  // namespace converse
