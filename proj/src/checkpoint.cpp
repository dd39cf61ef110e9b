#include "agformer/checkpoint.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "agformer/errors.hpp"

namespace agf {

namespace {
constexpr const char* kMagic = "agformer-checkpoint";
constexpr int kVersion = 1;
}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  const auto list = params.list();
  out << kMagic << ' ' << kVersion << '\n' << "count " << list.size() << '\n';
  char buf[64];
  for (const Parameter* p : list) {
    out << p->name << ' ' << p->value.rows() << ' ' << p->value.cols() << '\n';
    for (std::size_t i = 0; i < p->value.numel(); ++i) {
      const auto res = std::to_chars(buf, buf + sizeof buf, p->value[i]);
      if (i > 0) out << ' ';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed while writing checkpoint " + path.string());
}

std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::string magic;
  int version = 0;
  std::string count_key;
  std::size_t count = 0;
  in >> magic >> version >> count_key >> count;
  if (magic != kMagic || count_key != "count") throw ParseError(path.string() + ": not an agformer checkpoint");
  if (version != kVersion) throw ParseError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  std::vector<std::pair<std::string, Tensor>> out;
  out.reserve(count);
  std::string token;
  for (std::size_t k = 0; k < count; ++k) {
    std::string name;
    std::size_t rows = 0, cols = 0;
    if (!(in >> name >> rows >> cols)) throw ParseError(path.string() + ": truncated header for parameter " + std::to_string(k));
    std::vector<double> values(rows * cols);
    for (double& v : values) {
      if (!(in >> token)) throw ParseError(path.string() + ": truncated values for " + name);
      const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
      if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw ParseError(path.string() + ": bad number '" + token + "' in " + name);
      }
    }
    out.emplace_back(name, Tensor({rows, cols}, std::move(values)));
  }
  return out;
}

void load_checkpoint(const std::filesystem::path& path, ModelParams& params) {
  auto stored = read_checkpoint(path);
  auto list = params.list();
  if (stored.size() != list.size()) {
    throw ValidationError(path.string() + ": checkpoint has " + std::to_string(stored.size()) +
                          " parameters, model expects " + std::to_string(list.size()));
  }
  for (std::size_t i = 0; i < list.size(); ++i) {
    auto& [name, value] = stored[i];
    if (name != list[i]->name || value.shape() != list[i]->value.shape()) {
      throw ValidationError(path.string() + ": parameter " + std::to_string(i) + " is " + name + " " +
                            value.shape().str() + ", model expects " + list[i]->name + " " +
                            list[i]->value.shape().str());
    }
    list[i]->value = std::move(value);
    list[i]->zero_grad();
  }
}

}  // namespace agf
