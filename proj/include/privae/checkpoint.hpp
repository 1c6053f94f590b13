#pragma once

// Binary parameter dump: magic "PRIV", u32 format version (1), then one
// record per parameter until end of file:
//   u32 name length, name bytes, u32 rank, rank x u64 dims, values as
//   little-endian IEEE-754 f64.

#include "privae/autodiff.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace privae {

inline constexpr std::uint32_t kCheckpointFormat = 1;

void save_checkpoint(std::span<const ad::Parameter> params, const std::filesystem::path& path);
std::vector<ad::Parameter> load_checkpoint(const std::filesystem::path& path);

}  // namespace privae
