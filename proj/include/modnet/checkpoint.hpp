#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "modnet/mlp.hpp"

namespace modnet {

// Binary model container, all integers and floats little-endian:
//   "MLPC" | u32 version | u32 layer count | u32 width x count |
//   u32 activation tag (0 relu, 1 sigmoid) | f64 dropout rate |
//   per weight layer: f64 weights (row-major, width[t+1] x width[t]), f64 biases
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize_model(const MlpModel& model);
MlpModel deserialize_model(const std::vector<std::uint8_t>& bytes);

/// Writes atomically (temporary file + rename).
void save_checkpoint(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_checkpoint(const std::filesystem::path& path);

}  // namespace modnet
