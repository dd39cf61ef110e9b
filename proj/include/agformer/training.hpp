#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "agformer/graph.hpp"
#include "agformer/model.hpp"

namespace agf {

// Complete description of one experiment. Defaults are the MUTAG setup.
struct RunConfig {
  std::string dataset = "MUTAG";
  std::string data_dir = "data";
  Backbone backbone = Backbone::gcn;
  AnchorMode anchor_mode = AnchorMode::louvain;
  std::size_t gnn_layers = 4;
  std::size_t hidden_dim = 256;
  std::size_t proj_dim = 256;
  std::size_t ffn_hidden = 512;
  double dropout = 0.1;
  std::size_t epochs = 100;
  double lr = 1e-4;
  double weight_decay = 1e-4;
  std::size_t batch_size = 128;
  std::size_t folds = 10;
  std::uint64_t seed = 42;
  std::size_t workers = 1;

  void validate() const;
  ModelConfig model_config(std::size_t input_dim, std::size_t num_classes) const;
};

// Adam moments, one pair per parameter in ModelParams::list() order.
struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static AdamState for_params(std::span<Parameter* const> params);
};

// Classic Adam with L2 decay folded into the gradient (g += wd * theta),
// bias-corrected moments. Throws NumericError naming the first parameter
// with a non-finite gradient.
void adam_step(std::span<Parameter* const> params, AdamState& state, double lr, double weight_decay);

struct EpochLog {
  std::size_t fold = 0;
  std::size_t epoch = 0;
  double mean_loss = 0.0;
};
using EpochCallback = std::function<void(const EpochLog&)>;

struct FoldResult {
  std::size_t fold = 0;
  double accuracy = 0.0;
  std::vector<double> epoch_loss;  // mean training loss per epoch
  double seconds = 0.0;
  std::size_t optimizer_steps = 0;
  ModelParams params;
};

// Anchors and operators for every graph of a dataset. Random-mode partitions
// are seeded per graph from `seed`.
std::vector<PreparedGraph> prepare_dataset(std::span<const Graph> graphs, const ModelConfig& cfg, std::uint64_t seed);

// Fraction of `ids` whose argmax logit (lowest index on ties) equals the
// label. Eval mode, dropout off.
double evaluate(ModelParams& params, const ModelConfig& cfg, std::span<const PreparedGraph> graphs,
                std::span<const std::size_t> ids);

// Trains from a fresh initialization derived from (cfg.seed, fold_index).
// Each epoch shuffles the training ids, accumulates the batch-averaged loss
// gradient over batch_size graphs and takes one Adam step per batch.
FoldResult train_fold(std::span<const PreparedGraph> graphs, const FoldSplit& split, const RunConfig& cfg,
                      const ModelConfig& model_cfg, std::size_t fold_index, const EpochCallback& on_epoch = {});

struct CvResult {
  std::vector<FoldResult> folds;
  double mean = 0.0;
  double stddev = 0.0;  // population (divide by k)
  std::uint64_t split_hash = 0;
};

std::uint64_t hash_splits(std::span<const FoldSplit> splits);
double mean_of(std::span<const double> xs);
double population_std(std::span<const double> xs);

// Folds run on up to cfg.workers threads; results do not depend on the
// worker count.
CvResult cross_validate(const DatasetBundle& bundle, const RunConfig& cfg, const EpochCallback& on_epoch = {});

struct AblationResult {
  CvResult louvain;
  CvResult random;
};

AblationResult ablation_anchor_selection(const DatasetBundle& bundle, const RunConfig& cfg,
                                         const EpochCallback& on_epoch = {});

}  // namespace agf
