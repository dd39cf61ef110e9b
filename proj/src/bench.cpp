#include "agformer/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cmath>
#include <new>

#include "agformer/anchors.hpp"
#include "agformer/errors.hpp"
#include "agformer/graph.hpp"
#include "agformer/model.hpp"
#include "agformer/rng.hpp"

namespace agf {

std::string to_string(BenchMode m) { return m == BenchMode::anchor ? "anchor" : "full"; }

double median(std::vector<double> xs) {
  if (xs.empty()) throw ValidationError("median of an empty series");
  std::sort(xs.begin(), xs.end());
  const std::size_t mid = xs.size() / 2;
  return xs.size() % 2 == 1 ? xs[mid] : 0.5 * (xs[mid - 1] + xs[mid]);
}

double median_abs_deviation(const std::vector<double>& xs) {
  const double m = median(xs);
  std::vector<double> dev;
  dev.reserve(xs.size());
  for (double x : xs) dev.push_back(std::abs(x - m));
  return median(std::move(dev));
}

double fit_loglog_slope(std::span<const std::pair<double, double>> series) {
  if (series.size() < 3) throw ValidationError("slope fit needs at least 3 points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [n, t] : series) {
    if (!(n > 0.0) || !(t > 0.0)) throw ValidationError("slope fit needs positive sizes and times");
    sx += std::log(n);
    sy += std::log(t);
  }
  const double k = static_cast<double>(series.size());
  const double mx = sx / k, my = sy / k;
  double sxy = 0.0, sxx = 0.0;
  for (const auto& [n, t] : series) {
    const double dx = std::log(n) - mx;
    sxy += dx * (std::log(t) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw ValidationError("slope fit needs at least two distinct sizes");
  return sxy / sxx;
}

namespace {

Tensor random_features(std::size_t n, std::size_t dim, Rng& rng) {
  Tensor t(n, dim);
  for (double& v : t.data()) v = 2.0 * uniform01(rng) - 1.0;
  return t;
}

}  // namespace

TimingRecord time_attention(BenchMode mode, std::size_t n, std::size_t c, std::size_t dim, std::size_t reps,
                            std::uint64_t seed, const BenchOptions& options) {
  if (reps < 3) throw ConfigError("bench needs at least 3 repetitions");
  if (dim == 0) throw ConfigError("bench dimension must be positive");
  if (!options.louvain_anchors && (c < 1 || c > n)) {
    throw ConfigError("bench needs n >= c >= 1, got n = " + std::to_string(n) + ", c = " + std::to_string(c));
  }
  try {
    const Graph g = synth_random_graph(n, options.edge_rate, seed);
    Rng rng(derive_seed(seed, 1));
    const Tensor h_value = random_features(n, dim, rng);

    ModelConfig cfg;
    cfg.input_dim = dim;
    cfg.hidden_dim = dim;
    cfg.proj_dim = dim;
    cfg.ffn_hidden = 2 * dim;
    cfg.num_gnn_layers = 1;
    cfg.dropout = 0.0;
    cfg.anchor_mode = mode == BenchMode::full ? AnchorMode::full : AnchorMode::louvain;
    ModelParams params = init_params(cfg, derive_seed(seed, 2));

    TimingRecord rec;
    rec.mode = mode;
    rec.n = n;
    rec.dim = dim;
    rec.reps = reps;
    rec.graph_hash = graph_hash(g);

    SparseMatrix pooling;
    if (mode == BenchMode::anchor) {
      const Partition part = options.louvain_anchors ? louvain(g) : random_partition(n, c, derive_seed(seed, 3));
      pooling = assignment_matrix(part).mean_pooling();
      rec.c = part.num_communities;
    } else {
      rec.c = options.louvain_anchors ? louvain(g).num_communities : c;
    }

    std::vector<double> samples;
    for (std::size_t r = 0; r <= reps; ++r) {
      ad::Tape tape;
      const ad::Var h = tape.constant(h_value);
      Rng unused(0);
      ForwardContext ctx{tape, unused, false, 0.0, nullptr};
      const auto t0 = std::chrono::steady_clock::now();
      ad::Var out;
      if (mode == BenchMode::anchor) {
        const ad::Var anchors = anchor_features(pooling, h);
        out = anca_block(ctx, h, aasa_block(ctx, anchors, *params.aasa), *params.anca);
      } else {
        out = full_attention_block(ctx, h, *params.full);
      }
      const auto t1 = std::chrono::steady_clock::now();
      if (out.shape() != Shape{n, dim}) throw ShapeError("bench forward produced " + out.shape().str());
      if (r > 0) samples.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    rec.median_seconds = median(samples);
    rec.mad_seconds = median_abs_deviation(samples);
    return rec;
  } catch (const std::bad_alloc&) {
    throw ConfigError("bench size n = " + std::to_string(n) + " does not fit in memory");
  }
}

std::vector<TimingRecord> scaling_sweep(std::span<const std::size_t> sizes, std::size_t c, std::size_t dim,
                                        std::size_t reps, std::uint64_t seed, const BenchOptions& options) {
  if (!std::is_sorted(sizes.begin(), sizes.end())) throw ConfigError("bench sizes must be ascending");
  std::vector<TimingRecord> out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::uint64_t size_seed = derive_seed(seed, sizes[i]);
    out.push_back(time_attention(BenchMode::anchor, sizes[i], c, dim, reps, size_seed, options));
    out.push_back(time_attention(BenchMode::full, sizes[i], c, dim, reps, size_seed, options));
  }
  return out;
}

void write_timing_csv(std::ostream& out, std::span<const TimingRecord> records) {
  out << "mode,n,c,median_ms,mad_ms\n";
  char buf[64];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%.4f,%.4f", r.median_seconds * 1e3, r.mad_seconds * 1e3);
    out << to_string(r.mode) << ',' << r.n << ',' << r.c << ',' << buf << '\n';
  }
}

}  // namespace agf
