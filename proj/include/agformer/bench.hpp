#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace agf {

enum class BenchMode { anchor, full };

std::string to_string(BenchMode m);

struct TimingRecord {
  BenchMode mode = BenchMode::anchor;
  std::size_t n = 0;
  std::size_t c = 0;
  std::size_t dim = 0;
  std::size_t reps = 0;
  double median_seconds = 0.0;
  double mad_seconds = 0.0;
  std::uint64_t graph_hash = 0;
};

struct BenchOptions {
  double edge_rate = 0.01;
  // When set, the anchor count comes from Louvain on each synthetic graph
  // instead of the fixed c.
  bool louvain_anchors = false;
};

// Times the eval-mode transformer stage on a synthetic graph: anchor mode
// runs anchor pooling + AASA + ANCA with c anchors, full mode runs
// node-to-node attention. One warm-up, then `reps` timed forwards; only the
// forward call is inside the timer.
TimingRecord time_attention(BenchMode mode, std::size_t n, std::size_t c, std::size_t dim, std::size_t reps,
                            std::uint64_t seed, const BenchOptions& options = {});

// Both modes per size, anchor first.
std::vector<TimingRecord> scaling_sweep(std::span<const std::size_t> sizes, std::size_t c, std::size_t dim,
                                        std::size_t reps, std::uint64_t seed, const BenchOptions& options = {});

// Least-squares slope of log(seconds) against log(n).
double fit_loglog_slope(std::span<const std::pair<double, double>> series);

double median(std::vector<double> xs);
// Median absolute deviation from the median.
double median_abs_deviation(const std::vector<double>& xs);

// mode,n,c,median_ms,mad_ms
void write_timing_csv(std::ostream& out, std::span<const TimingRecord> records);

}  // namespace agf
