#include "agformer/robustness.hpp"

#include <cmath>

#include "agformer/errors.hpp"
#include "agformer/rng.hpp"

namespace agf {

DatasetBundle perturb_dataset(const DatasetBundle& bundle, double rate, std::uint64_t seed) {
  DatasetBundle out = bundle;
  const auto rate_key = static_cast<std::uint64_t>(std::llround(rate * 1e6));
  const std::uint64_t root = derive_seed(derive_seed(seed, 0x666c6970ULL), rate_key);
  for (std::size_t i = 0; i < out.graphs.size(); ++i) {
    out.graphs[i] = flip_edges(bundle.graphs[i], rate, derive_seed(root, i));
    // degree features follow the new structure, clamped to the original width
    if (bundle.node_label_values.empty() && bundle.feature_dim > 0) {
      out.graphs[i] = out.graphs[i].with_features(one_hot_degrees(out.graphs[i], bundle.feature_dim - 1));
    }
  }
  return out;
}

double perturbed_accuracy(const DatasetBundle& bundle, const RunConfig& cfg, std::span<ModelParams> fold_params,
                          double rate) {
  if (fold_params.size() != cfg.folds) {
    throw ValidationError("expected " + std::to_string(cfg.folds) + " trained folds, got " +
                          std::to_string(fold_params.size()));
  }
  const ModelConfig model_cfg = cfg.model_config(bundle.feature_dim, bundle.num_classes);
  const auto splits = stratified_kfold(bundle.labels(), cfg.folds, cfg.seed);
  const DatasetBundle perturbed = perturb_dataset(bundle, rate, cfg.seed);
  const auto graphs = prepare_dataset(perturbed.graphs, model_cfg, cfg.seed);
  std::vector<double> accs;
  for (std::size_t f = 0; f < splits.size(); ++f) {
    accs.push_back(evaluate(fold_params[f], model_cfg, graphs, splits[f].test));
  }
  return mean_of(accs);
}

}  // namespace agf
