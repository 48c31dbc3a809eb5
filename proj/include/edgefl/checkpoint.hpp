#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edgefl/mlp.hpp"

namespace edgefl::checkpoint {

// Layout (all little-endian):
//   0..3   magic "IEAI"
//   4..5   u16 format version (1)
//   6..7   u16 input_dim
//   8..9   u16 hidden_dim
//   10..11 u16 output_dim
//   12..15 u32 parameter count
//   16..   parameter count x f64, in MlpParams flat order
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::size_t kHeaderBytes = 16;

std::vector<std::uint8_t> encode(const nn::MlpParams& params);
nn::MlpParams decode(const std::vector<std::uint8_t>& bytes);

void save(const std::filesystem::path& path, const nn::MlpParams& params);
nn::MlpParams load(const std::filesystem::path& path);

}  // namespace edgefl::checkpoint
