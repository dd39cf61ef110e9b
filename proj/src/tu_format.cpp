#include "agformer/tu_format.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>

#include "agformer/errors.hpp"

namespace agf {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

long long parse_int(std::string_view field, const fs::path& file, std::size_t line_no) {
  field = trim(field);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw ParseError(file.string() + ":" + std::to_string(line_no) + ": expected an integer, got '" +
                     std::string(field) + "'");
  }
  return v;
}

std::ifstream open_required(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  return in;
}

// One integer per non-empty line.
std::vector<long long> read_column(const fs::path& file) {
  auto in = open_required(file);
  std::vector<long long> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    values.push_back(parse_int(line, file, line_no));
  }
  return values;
}

// Sorted distinct values -> contiguous ids.
std::vector<int> remap(const std::vector<long long>& raw, std::vector<int>& out) {
  std::vector<long long> distinct = raw;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  out.clear();
  out.reserve(raw.size());
  for (auto v : raw) {
    out.push_back(static_cast<int>(std::lower_bound(distinct.begin(), distinct.end(), v) - distinct.begin()));
  }
  return {distinct.begin(), distinct.end()};
}

}  // namespace

DatasetBundle load_tu_dataset(const fs::path& dir, const std::string& name) {
  const fs::path prefix = dir / name;
  const fs::path a_file = prefix.string() + "_A.txt";
  const fs::path indicator_file = prefix.string() + "_graph_indicator.txt";
  const fs::path labels_file = prefix.string() + "_graph_labels.txt";
  const fs::path node_labels_file = prefix.string() + "_node_labels.txt";

  const auto indicator = read_column(indicator_file);
  const auto graph_labels_raw = read_column(labels_file);
  const std::size_t total_nodes = indicator.size();
  const std::size_t num_graphs = graph_labels_raw.size();

  // global node (0-based) -> (graph, local index)
  std::vector<std::size_t> node_graph(total_nodes), node_local(total_nodes);
  std::vector<std::size_t> graph_sizes(num_graphs, 0);
  for (std::size_t i = 0; i < total_nodes; ++i) {
    const long long gid = indicator[i];
    if (gid < 1 || static_cast<std::size_t>(gid) > num_graphs) {
      throw ParseError(indicator_file.string() + ":" + std::to_string(i + 1) + ": graph id " + std::to_string(gid) +
                       " outside [1, " + std::to_string(num_graphs) + "]");
    }
    node_graph[i] = static_cast<std::size_t>(gid - 1);
    node_local[i] = graph_sizes[node_graph[i]]++;
  }
  for (std::size_t g = 0; g < num_graphs; ++g) {
    if (graph_sizes[g] == 0) throw ValidationError("graph " + std::to_string(g + 1) + " has no nodes");
  }

  std::vector<std::vector<Edge>> edges(num_graphs);
  {
    auto in = open_required(a_file);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) {
        throw ParseError(a_file.string() + ":" + std::to_string(line_no) + ": expected 'i, j'");
      }
      const long long a = parse_int(std::string_view(line).substr(0, comma), a_file, line_no);
      const long long b = parse_int(std::string_view(line).substr(comma + 1), a_file, line_no);
      for (long long v : {a, b}) {
        if (v < 1 || static_cast<std::size_t>(v) > total_nodes) {
          throw ParseError(a_file.string() + ":" + std::to_string(line_no) + ": node id " + std::to_string(v) +
                           " outside [1, " + std::to_string(total_nodes) + "]");
        }
      }
      const auto ia = static_cast<std::size_t>(a - 1), ib = static_cast<std::size_t>(b - 1);
      if (node_graph[ia] != node_graph[ib]) {
        throw ValidationError(a_file.string() + ":" + std::to_string(line_no) + ": edge joins graphs " +
                              std::to_string(node_graph[ia] + 1) + " and " + std::to_string(node_graph[ib] + 1));
      }
      edges[node_graph[ia]].emplace_back(static_cast<std::uint32_t>(node_local[ia]),
                                         static_cast<std::uint32_t>(node_local[ib]));
    }
  }

  DatasetBundle bundle;
  bundle.name = name;
  std::vector<int> class_ids;
  const auto class_values = remap(graph_labels_raw, class_ids);
  bundle.class_values.assign(class_values.begin(), class_values.end());
  bundle.num_classes = class_values.size();

  std::vector<std::vector<int>> per_graph_node_labels(num_graphs);
  const bool has_node_labels = fs::exists(node_labels_file);
  if (has_node_labels) {
    const auto raw = read_column(node_labels_file);
    if (raw.size() != total_nodes) {
      throw ValidationError(node_labels_file.string() + " has " + std::to_string(raw.size()) + " lines for " +
                            std::to_string(total_nodes) + " nodes");
    }
    std::vector<int> ids;
    const auto values = remap(raw, ids);
    bundle.node_label_values.assign(values.begin(), values.end());
    for (std::size_t g = 0; g < num_graphs; ++g) per_graph_node_labels[g].resize(graph_sizes[g]);
    for (std::size_t i = 0; i < total_nodes; ++i) per_graph_node_labels[node_graph[i]][node_local[i]] = ids[i];
  }

  bundle.graphs.reserve(num_graphs);
  for (std::size_t g = 0; g < num_graphs; ++g) {
    bundle.graphs.push_back(Graph::from_edges(graph_sizes[g], edges[g], Tensor(graph_sizes[g], 0), class_ids[g],
                                              std::move(per_graph_node_labels[g])));
  }

  if (has_node_labels) {
    bundle.feature_dim = bundle.node_label_values.size();
    for (auto& graph : bundle.graphs) {
      graph = graph.with_features(one_hot_labels(graph.node_labels(), bundle.feature_dim));
    }
  } else {
    std::size_t max_deg = 0;
    for (const auto& graph : bundle.graphs) max_deg = std::max(max_deg, graph.max_degree());
    bundle.feature_dim = max_deg + 1;
    for (auto& graph : bundle.graphs) graph = graph.with_features(one_hot_degrees(graph, max_deg));
  }
  return bundle;
}

void write_tu_dataset(const DatasetBundle& bundle, const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  const std::string prefix = (dir / name).string();
  std::ofstream a(prefix + "_A.txt"), indicator(prefix + "_graph_indicator.txt"),
      labels(prefix + "_graph_labels.txt");
  if (!a || !indicator || !labels) throw IoError("cannot write dataset files under " + dir.string());
  const bool write_node_labels = !bundle.node_label_values.empty();
  std::ofstream node_labels;
  if (write_node_labels) {
    node_labels.open(prefix + "_node_labels.txt");
    if (!node_labels) throw IoError("cannot write " + prefix + "_node_labels.txt");
  }
  std::size_t base = 1;
  for (std::size_t g = 0; g < bundle.graphs.size(); ++g) {
    const Graph& graph = bundle.graphs[g];
    for (std::size_t i = 0; i < graph.num_nodes(); ++i) {
      for (auto j : graph.neighbors(i)) a << (base + i) << ", " << (base + j) << '\n';
      indicator << (g + 1) << '\n';
      if (write_node_labels) {
        node_labels << bundle.node_label_values.at(static_cast<std::size_t>(graph.node_labels().at(i))) << '\n';
      }
    }
    const int raw_label = bundle.class_values.empty() ? graph.label()
                                                      : bundle.class_values.at(static_cast<std::size_t>(graph.label()));
    labels << raw_label << '\n';
    base += graph.num_nodes();
  }
}

}  // namespace agf

namespace agf {

DatasetBundle load_named_dataset(const fs::path& data_dir, const std::string& name) {
  std::string upper = name;
  for (char& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  std::vector<std::string> names{name, upper};
  if (upper == "IMDB-B") names.emplace_back("IMDB-BINARY");
  for (const auto& candidate : names) {
    for (const fs::path& dir : {data_dir / candidate, data_dir}) {
      if (fs::exists(dir / (candidate + "_A.txt"))) return load_tu_dataset(dir, candidate);
    }
  }
  throw IoError("dataset '" + name + "' not found under " + data_dir.string());
}

}  // namespace agf
