#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "agformer/training.hpp"

namespace agf {

// Flattened "section.key" -> raw value, e.g. "train.lr" -> "0.0001".
using ConfigValues = std::map<std::string, std::string>;

// Parses an INI-style file ([section] headers, key=value lines, ';' or '#'
// comments).
ConfigValues read_config_file(const std::filesystem::path& path);

ConfigValues to_values(const RunConfig& cfg);

// Unknown keys or malformed values raise ConfigError.
void apply_values(RunConfig& cfg, const ConfigValues& values);

// Built-in defaults, then the config file, then command-line flags.
RunConfig resolve_config(const ConfigValues& file_values, const ConfigValues& flag_values);

std::string format_config(const RunConfig& cfg);
void write_config_file(const std::filesystem::path& path, const RunConfig& cfg);

// Shortest decimal that round-trips.
std::string format_double(double x);

}  // namespace agf
