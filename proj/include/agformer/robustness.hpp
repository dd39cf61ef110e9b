#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "agformer/graph.hpp"
#include "agformer/model.hpp"
#include "agformer/training.hpp"

namespace agf {

// Copy of `bundle` with flip_edges(rate) applied to every graph. Graph i uses
// a seed derived from (seed, rate, i), so two models evaluated on the same
// (seed, rate) see identical perturbed graphs.
DatasetBundle perturb_dataset(const DatasetBundle& bundle, double rate, std::uint64_t seed);

// Mean over folds of the test accuracy of fold_params[f] on the perturbed
// test graphs of fold f. Anchors are recomputed on the perturbed structure.
// Splits come from (cfg.seed, cfg.folds), as in cross_validate.
double perturbed_accuracy(const DatasetBundle& bundle, const RunConfig& cfg, std::span<ModelParams> fold_params,
                          double rate);

}  // namespace agf
