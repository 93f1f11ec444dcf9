#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "upw/model.hpp"

namespace upw {

// UPWCKPT1 layout, little-endian:
//   magic "UPWCKPT1" | u64 config_len | config key=value text
//   | u64 param_count | per param: u32 name_len, name, u32 rank, u64 dims[rank], f64 values (row-major)
// Loading rebuilds the model from the config and requires the parameter names
// and shapes to match exactly.
void save_checkpoint(std::ostream& out, const Model& model);
void save_checkpoint(const std::filesystem::path& path, const Model& model);
std::vector<std::uint8_t> checkpoint_bytes(const Model& model);

Model load_checkpoint(std::istream& in);
Model load_checkpoint(const std::filesystem::path& path);
Model load_checkpoint(std::span<const std::uint8_t> bytes);

}  // namespace upw
