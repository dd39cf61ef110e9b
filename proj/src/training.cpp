#include "agformer/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "agformer/errors.hpp"
#include "agformer/rng.hpp"

namespace agf {

void RunConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("learning rate must be a finite non-negative number");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight decay must be non-negative");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (folds < 2) throw ConfigError("folds must be >= 2, got " + std::to_string(folds));
  if (workers == 0) throw ConfigError("workers must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (gnn_layers == 0 || hidden_dim == 0 || proj_dim == 0 || ffn_hidden == 0) {
    throw ConfigError("model dimensions must be positive");
  }
}

ModelConfig RunConfig::model_config(std::size_t input_dim, std::size_t num_classes) const {
  ModelConfig m;
  m.backbone = backbone;
  m.input_dim = input_dim;
  m.num_gnn_layers = gnn_layers;
  m.hidden_dim = hidden_dim;
  m.proj_dim = proj_dim;
  m.ffn_hidden = ffn_hidden;
  m.dropout = dropout;
  m.num_classes = num_classes;
  m.anchor_mode = anchor_mode;
  m.validate();
  return m;
}

AdamState AdamState::for_params(std::span<Parameter* const> params) {
  AdamState s;
  for (const Parameter* p : params) {
    s.m.emplace_back(p->value.rows(), p->value.cols());
    s.v.emplace_back(p->value.rows(), p->value.cols());
  }
  return s;
}

void adam_step(std::span<Parameter* const> params, AdamState& state, double lr, double weight_decay) {
  if (state.m.size() != params.size()) throw ValidationError("adam_step: optimizer state does not match parameters");
  for (const Parameter* p : params) {
    if (!p->grad.all_finite()) throw NumericError("non-finite gradient in parameter " + p->name);
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    Tensor& m = state.m[k];
    Tensor& v = state.v[k];
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      const double g = p.grad[i] + weight_decay * p.value[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p.value[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

std::vector<PreparedGraph> prepare_dataset(std::span<const Graph> graphs, const ModelConfig& cfg, std::uint64_t seed) {
  std::vector<PreparedGraph> out;
  out.reserve(graphs.size());
  const std::uint64_t partition_root = derive_seed(seed, 0x70617274ULL);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    out.push_back(prepare_graph(graphs[i], cfg, derive_seed(partition_root, i)));
  }
  return out;
}

namespace {

std::size_t argmax(const Tensor& logits) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < logits.numel(); ++c) {
    if (logits[c] > logits[best]) best = c;
  }
  return best;
}

}  // namespace

double evaluate(ModelParams& params, const ModelConfig& cfg, std::span<const PreparedGraph> graphs,
                std::span<const std::size_t> ids) {
  if (ids.empty()) return 0.0;
  Rng unused(0);
  std::size_t correct = 0;
  for (auto id : ids) {
    ad::Tape tape;
    ForwardContext ctx{tape, unused, false, 0.0, nullptr};
    const ad::Var logits = model_forward(ctx, graphs[id], params, cfg);
    if (argmax(logits.value()) == static_cast<std::size_t>(graphs[id].label)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(ids.size());
}

FoldResult train_fold(std::span<const PreparedGraph> graphs, const FoldSplit& split, const RunConfig& cfg,
                      const ModelConfig& model_cfg, std::size_t fold_index, const EpochCallback& on_epoch) {
  cfg.validate();
  if (split.train.empty()) throw ConfigError("fold " + std::to_string(fold_index) + " has an empty training set");
  {
    std::vector<bool> is_test(graphs.size(), false);
    for (auto id : split.test) is_test.at(id) = true;
    for (auto id : split.train) {
      if (is_test.at(id)) throw ValidationError("graph " + std::to_string(id) + " is in both train and test sets");
    }
  }
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t fold_seed = derive_seed(cfg.seed, fold_index);
  FoldResult result;
  result.fold = fold_index;
  result.params = init_params(model_cfg, derive_seed(fold_seed, 1));
  Rng order_rng(derive_seed(fold_seed, 2));
  Rng dropout_rng(derive_seed(fold_seed, 3));

  auto plist = result.params.list();
  AdamState adam = AdamState::for_params(plist);
  std::vector<std::size_t> order = split.train;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), order_rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - begin);
      result.params.zero_grad();
      for (std::size_t b = begin; b < end; ++b) {
        const PreparedGraph& g = graphs[order[b]];
        ad::Tape tape;
        ForwardContext ctx{tape, dropout_rng, true, model_cfg.dropout, nullptr};
        const ad::Var logits = model_forward(ctx, g, result.params, model_cfg);
        const ad::Var loss = ad::cross_entropy(logits, static_cast<std::size_t>(g.label));
        const double value = loss.value()[0];
        if (!std::isfinite(value)) {
          throw NumericError("non-finite loss in fold " + std::to_string(fold_index) + ", epoch " + std::to_string(epoch));
        }
        loss_sum += value;
        tape.backward(ad::scale(loss, inv_batch));
      }
      adam_step(plist, adam, cfg.lr, cfg.weight_decay);
      ++result.optimizer_steps;
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(order.size()));
    if (on_epoch) on_epoch({fold_index, epoch, result.epoch_loss.back()});
  }
  for (const Tensor& m : adam.m) {
    if (!m.all_finite()) throw NumericError("Adam moments became non-finite");
  }
  result.accuracy = evaluate(result.params, model_cfg, graphs, split.test);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::uint64_t hash_splits(std::span<const FoldSplit> splits) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t f = 0; f < splits.size(); ++f) {
    h = mix_seed(h ^ (0xf01dULL + f));
    for (auto id : splits[f].test) h = mix_seed(h ^ id);
  }
  return h;
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double population_std(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  const double mu = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

CvResult cross_validate(const DatasetBundle& bundle, const RunConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  const ModelConfig model_cfg = cfg.model_config(bundle.feature_dim, bundle.num_classes);
  const auto labels = bundle.labels();
  const auto splits = stratified_kfold(labels, cfg.folds, cfg.seed);
  const auto graphs = prepare_dataset(bundle.graphs, model_cfg, cfg.seed);

  CvResult cv;
  cv.split_hash = hash_splits(splits);
  cv.folds.resize(splits.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t f = next.fetch_add(1);
      if (f >= splits.size()) return;
      try {
        cv.folds[f] = train_fold(graphs, splits[f], cfg, model_cfg, f, on_epoch);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = splits.size();
      }
    }
  };
  const std::size_t threads = std::min(cfg.workers, splits.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::vector<double> accs;
  for (const auto& f : cv.folds) accs.push_back(f.accuracy);
  cv.mean = mean_of(accs);
  cv.stddev = population_std(accs);
  return cv;
}

AblationResult ablation_anchor_selection(const DatasetBundle& bundle, const RunConfig& cfg,
                                         const EpochCallback& on_epoch) {
  RunConfig louvain_cfg = cfg;
  louvain_cfg.anchor_mode = AnchorMode::louvain;
  RunConfig random_cfg = cfg;
  random_cfg.anchor_mode = AnchorMode::random;
  AblationResult r;
  r.louvain = cross_validate(bundle, louvain_cfg, on_epoch);
  r.random = cross_validate(bundle, random_cfg, on_epoch);
  if (r.louvain.split_hash != r.random.split_hash) throw ValidationError("ablation modes used different fold splits");
  return r;
}

}  // namespace agf
