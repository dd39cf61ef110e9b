#pragma once

#include <filesystem>
#include <string>

#include "agformer/graph.hpp"

namespace agf {

// Reads <dir>/<name>_A.txt, _graph_indicator.txt, _graph_labels.txt and the
// optional _node_labels.txt. Graph and node labels are remapped to
// contiguous ids in ascending order of their raw values. Without node labels
// the features are degree one-hot against the dataset-wide maximum degree.
DatasetBundle load_tu_dataset(const std::filesystem::path& dir, const std::string& name);

// Writes the same flat-file layout (both edge directions, raw label values).
void write_tu_dataset(const DatasetBundle& bundle, const std::filesystem::path& dir, const std::string& name);

}  // namespace agf

namespace agf {

// Finds a TU dataset by name under `data_dir`, trying <data_dir>/<name>/ and
// <data_dir>/ with the name as given and upper-cased ("mutag" -> MUTAG,
// "imdb-b" -> IMDB-BINARY).
DatasetBundle load_named_dataset(const std::filesystem::path& data_dir, const std::string& name);

}  // namespace agf
