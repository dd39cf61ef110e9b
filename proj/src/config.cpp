#include "agformer/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <sstream>

#include "agformer/errors.hpp"

namespace agf {

namespace {

template <typename T>
T parse_number(const std::string& key, const std::string& raw) {
  T value{};
  const auto [ptr, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), value);
  if (ec != std::errc{} || ptr != raw.data() + raw.size() || raw.empty()) {
    throw ConfigError("invalid value '" + raw + "' for " + key);
  }
  return value;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

ConfigValues read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  // boost's INI reader only understands ';' comments
  std::stringstream cleaned;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    if (first != std::string::npos && line[first] == '#') continue;
    cleaned << line << '\n';
  }
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(cleaned, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(path.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  ConfigValues values;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      values[section] = body.data();
      continue;
    }
    for (const auto& [key, node] : body) values[section + "." + key] = node.data();
  }
  return values;
}

ConfigValues to_values(const RunConfig& c) {
  return {
      {"data.dataset", c.dataset},
      {"data.data_dir", c.data_dir},
      {"model.backbone", to_string(c.backbone)},
      {"model.anchor_mode", to_string(c.anchor_mode)},
      {"model.gnn_layers", std::to_string(c.gnn_layers)},
      {"model.hidden_dim", std::to_string(c.hidden_dim)},
      {"model.proj_dim", std::to_string(c.proj_dim)},
      {"model.ffn_hidden", std::to_string(c.ffn_hidden)},
      {"model.dropout", format_double(c.dropout)},
      {"train.epochs", std::to_string(c.epochs)},
      {"train.lr", format_double(c.lr)},
      {"train.weight_decay", format_double(c.weight_decay)},
      {"train.batch_size", std::to_string(c.batch_size)},
      {"train.folds", std::to_string(c.folds)},
      {"train.seed", std::to_string(c.seed)},
      {"train.workers", std::to_string(c.workers)},
  };
}

void apply_values(RunConfig& c, const ConfigValues& values) {
  for (const auto& [key, raw] : values) {
    if (key == "data.dataset") c.dataset = raw;
    else if (key == "data.data_dir") c.data_dir = raw;
    else if (key == "model.backbone") c.backbone = parse_backbone(raw);
    else if (key == "model.anchor_mode") c.anchor_mode = parse_anchor_mode(raw);
    else if (key == "model.gnn_layers") c.gnn_layers = parse_number<std::size_t>(key, raw);
    else if (key == "model.hidden_dim") c.hidden_dim = parse_number<std::size_t>(key, raw);
    else if (key == "model.proj_dim") c.proj_dim = parse_number<std::size_t>(key, raw);
    else if (key == "model.ffn_hidden") c.ffn_hidden = parse_number<std::size_t>(key, raw);
    else if (key == "model.dropout") c.dropout = parse_number<double>(key, raw);
    else if (key == "train.epochs") c.epochs = parse_number<std::size_t>(key, raw);
    else if (key == "train.lr") c.lr = parse_number<double>(key, raw);
    else if (key == "train.weight_decay") c.weight_decay = parse_number<double>(key, raw);
    else if (key == "train.batch_size") c.batch_size = parse_number<std::size_t>(key, raw);
    else if (key == "train.folds") c.folds = parse_number<std::size_t>(key, raw);
    else if (key == "train.seed") c.seed = parse_number<std::uint64_t>(key, raw);
    else if (key == "train.workers") c.workers = parse_number<std::size_t>(key, raw);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig resolve_config(const ConfigValues& file_values, const ConfigValues& flag_values) {
  RunConfig c;
  apply_values(c, file_values);
  apply_values(c, flag_values);
  return c;
}

std::string format_config(const RunConfig& c) {
  const auto values = to_values(c);
  std::ostringstream out;
  for (const char* section : {"data", "model", "train"}) {
    out << '[' << section << "]\n";
    const std::string prefix = std::string(section) + ".";
    for (const auto& [key, value] : values) {
      if (key.rfind(prefix, 0) == 0) out << key.substr(prefix.size()) << " = " << value << '\n';
    }
    out << '\n';
  }
  return out.str();
}

void write_config_file(const std::filesystem::path& path, const RunConfig& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << format_config(c);
}

}  // namespace agf
