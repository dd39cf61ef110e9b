#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "agformer/model.hpp"

namespace agf {

// Text format, one parameter per two lines:
//
//   agformer-checkpoint 1
//   count <k>
//   <name> <rows> <cols>
//   <row-major values, shortest round-trip decimal, space separated>
//
// Values are written with std::to_chars so reloading is bit-exact.
void save_checkpoint(const std::filesystem::path& path, const ModelParams& params);

std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::filesystem::path& path);

// Overwrites every parameter; names and shapes must match exactly.
void load_checkpoint(const std::filesystem::path& path, ModelParams& params);

}  // namespace agf
