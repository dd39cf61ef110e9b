#include "agformer/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "agformer/anchors.hpp"
#include "agformer/bench.hpp"
#include "agformer/checkpoint.hpp"
#include "agformer/config.hpp"
#include "agformer/errors.hpp"
#include "agformer/robustness.hpp"
#include "agformer/training.hpp"
#include "agformer/tu_format.hpp"

namespace agf::cli {

namespace fs = std::filesystem;

namespace {

// String-valued options that map onto RunConfig keys; only the flags the
// user actually passed take part in the precedence merge.
class ConfigFlags {
 public:
  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    auto value = std::make_unique<std::string>();
    CLI::Option* opt = app->add_option(flag, *value, help);
    entries_.push_back({key, opt, std::move(value)});
  }

  void add_run_flags(CLI::App* app) {
    add(app, "--dataset", "data.dataset", "Dataset name (TU format), e.g. MUTAG");
    add(app, "--data-dir", "data.data_dir", "Dataset root (default: $AGF_DATA_DIR or ./data)");
    add(app, "--backbone", "model.backbone", "GNN backbone: gcn | gin");
    add(app, "--anchor-mode", "model.anchor_mode", "Anchors: louvain | random | full (node-to-node baseline)");
    add(app, "--layers", "model.gnn_layers", "Number of GNN layers (default 4)");
    add(app, "--hidden", "model.hidden_dim", "GNN hidden units (default 256)");
    add(app, "--proj-dim", "model.proj_dim", "Transformer width d' (default 256)");
    add(app, "--ffn-hidden", "model.ffn_hidden", "FFN hidden width (default 512)");
    add(app, "--dropout", "model.dropout", "Dropout rate (default 0.1)");
    add(app, "--epochs", "train.epochs", "Training epochs (default 100)");
    add(app, "--lr", "train.lr", "Adam learning rate (default 1e-4)");
    add(app, "--weight-decay", "train.weight_decay", "L2 weight decay inside Adam (default 1e-4)");
    add(app, "--batch-size", "train.batch_size", "Graphs per optimizer step (default 128)");
    add(app, "--folds", "train.folds", "Cross-validation folds, >= 2 (default 10)");
    add(app, "--seed", "train.seed", "Master seed (default 42)");
    add(app, "--workers", "train.workers", "Folds trained in parallel (default 1)");
  }

  ConfigValues collect() const {
    ConfigValues v;
    for (const auto& e : entries_) {
      if (e.option->count() > 0) v[e.key] = *e.value;
    }
    return v;
  }

 private:
  struct Entry {
    std::string key;
    CLI::Option* option;
    std::unique_ptr<std::string> value;
  };
  std::vector<Entry> entries_;
};

ConfigValues env_defaults() {
  ConfigValues v;
  if (const char* dir = std::getenv("AGF_DATA_DIR"); dir != nullptr && *dir != '\0') v["data.data_dir"] = dir;
  return v;
}

RunConfig resolve(const std::string& config_path, const ConfigFlags& flags) {
  RunConfig cfg;
  apply_values(cfg, env_defaults());
  if (!config_path.empty()) apply_values(cfg, read_config_file(config_path));
  apply_values(cfg, flags.collect());
  cfg.validate();
  return cfg;
}

std::string fixed6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_results(const fs::path& dir, const CvResult& cv) {
  auto results = open_out(dir / "results.csv");
  results << "fold,accuracy\n";
  for (const auto& f : cv.folds) results << f.fold << ',' << fixed6(f.accuracy) << '\n';
  results << "mean," << fixed6(cv.mean) << '\n' << "std," << fixed6(cv.stddev) << '\n';

  auto timing = open_out(dir / "timing.csv");
  timing << "fold,seconds\n";
  for (const auto& f : cv.folds) timing << f.fold << ',' << fixed6(f.seconds) << '\n';

  for (const auto& f : cv.folds) save_checkpoint(dir / ("fold_" + std::to_string(f.fold) + ".ckpt"), f.params);
}

std::string summary_line(const RunConfig& cfg, const CvResult& cv) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f±%.2f", 100.0 * cv.mean, 100.0 * cv.stddev);
  return cfg.dataset + " " + to_string(cfg.backbone) + "/" + to_string(cfg.anchor_mode) + " " +
         std::to_string(cfg.folds) + "-fold accuracy: " + buf;
}

EpochCallback progress(std::ostream& err, bool verbose) {
  if (!verbose) return {};
  return [&err](const EpochLog& log) {
    err << "fold " << log.fold << " epoch " << log.epoch + 1 << " loss " << fixed6(log.mean_loss) << '\n';
  };
}

CvResult train_run(const RunConfig& cfg, const DatasetBundle& bundle, const fs::path& dir, std::ostream& err,
                   bool verbose) {
  fs::create_directories(dir);
  write_config_file(dir / "manifest.cfg", cfg);
  CvResult cv = cross_validate(bundle, cfg, progress(err, verbose));
  write_results(dir, cv);
  return cv;
}

struct LoadedRun {
  RunConfig cfg;
  std::vector<ModelParams> folds;
};

LoadedRun load_run(const fs::path& dir, const DatasetBundle& bundle, const ConfigValues& overrides) {
  const fs::path manifest = dir / "manifest.cfg";
  if (!fs::exists(manifest)) throw IoError("no manifest.cfg in " + dir.string());
  LoadedRun run;
  apply_values(run.cfg, read_config_file(manifest));
  apply_values(run.cfg, overrides);
  run.cfg.validate();
  const ModelConfig mcfg = run.cfg.model_config(bundle.feature_dim, bundle.num_classes);
  for (std::size_t f = 0; f < run.cfg.folds; ++f) {
    const fs::path ckpt = dir / ("fold_" + std::to_string(f) + ".ckpt");
    if (!fs::exists(ckpt)) throw IoError("missing checkpoint " + ckpt.string());
    ModelParams params = init_params(mcfg, 0);
    load_checkpoint(ckpt, params);
    run.folds.push_back(std::move(params));
  }
  return run;
}

std::vector<double> parse_list(const std::string& raw, const char* what) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(std::string("invalid ") + what + " entry '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError(std::string("empty ") + what + " list");
  return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"AGFormer: anchor graph transformer training, evaluation and benchmarks", "agformer"};
  app.require_subcommand(1);

  // train
  auto* train = app.add_subcommand("train", "Cross-validated training; writes results.csv, timing.csv, manifest.cfg, "
                                            "fold checkpoints");
  ConfigFlags train_flags;
  std::string train_config, train_out = "run";
  bool train_verbose = false;
  train->add_option("--config", train_config, "Config file (flags override it)");
  train_flags.add_run_flags(train);
  train->add_option("--out", train_out, "Output directory")->capture_default_str();
  train->add_flag("--verbose", train_verbose, "Print per-epoch training loss to stderr");

  // eval
  auto* eval = app.add_subcommand("eval", "Re-evaluate a trained run's fold checkpoints on their test folds");
  std::string eval_run, eval_out, eval_data_dir;
  eval->add_option("--run", eval_run, "Run directory written by train")->required();
  eval->add_option("--data-dir", eval_data_dir, "Override the dataset root recorded in the manifest");
  eval->add_option("--out", eval_out, "CSV path (default <run>/eval.csv)");

  // attack
  auto* attack = app.add_subcommand("attack", "Edge-flip robustness of anchor mode vs the full-attention baseline");
  ConfigFlags attack_flags;
  std::string attack_config, attack_out = "attack", anchor_run, full_run, flip_rates = "0,0.05,0.1,0.15,0.2";
  bool retrain = false, attack_verbose = false;
  attack->add_option("--config", attack_config, "Config file for --retrain");
  attack_flags.add_run_flags(attack);
  attack->add_option("--anchor-run", anchor_run, "Trained anchor-mode run directory");
  attack->add_option("--full-run", full_run, "Trained full-baseline run directory");
  attack->add_flag("--retrain", retrain, "Train both models first (into <out>/anchor and <out>/full)");
  attack->add_option("--flip-rates", flip_rates, "Comma-separated perturbation rates")->capture_default_str();
  attack->add_option("--out", attack_out, "Output directory (attack.csv)")->capture_default_str();
  attack->add_flag("--verbose", attack_verbose, "Print per-epoch training loss to stderr");

  // bench
  auto* bench = app.add_subcommand("bench", "Forward-time scaling of anchor vs full attention on random graphs");
  std::string bench_sizes = "512,1024,2048,4096,8192", bench_out;
  std::size_t bench_anchors = 128, bench_reps = 5, bench_dim = 256;
  double bench_edge_rate = 0.01;
  std::uint64_t bench_seed = 42;
  bool bench_louvain = false;
  bench->add_option("--sizes", bench_sizes, "Comma-separated node counts, ascending")->capture_default_str();
  bench->add_option("--anchors", bench_anchors, "Fixed anchor count c")->capture_default_str();
  bench->add_option("--edge-rate", bench_edge_rate, "Edge probability of the synthetic graphs")->capture_default_str();
  bench->add_option("--reps", bench_reps, "Timed repetitions per point (>= 3)")->capture_default_str();
  bench->add_option("--dim", bench_dim, "Transformer width d'")->capture_default_str();
  bench->add_option("--seed", bench_seed, "Graph/feature seed")->capture_default_str();
  bench->add_flag("--louvain-anchors", bench_louvain, "Use the Louvain community count of each graph instead of --anchors");
  bench->add_option("--out", bench_out, "CSV path (default stdout)");

  // anchors
  auto* anchors = app.add_subcommand("anchors", "Per-graph anchor statistics: graph_id,n,c,ratio,modularity");
  std::string anchors_dataset = "MUTAG", anchors_data_dir, anchors_out, anchors_mode = "louvain";
  std::uint64_t anchors_seed = 42;
  anchors->add_option("--dataset", anchors_dataset, "Dataset name")->capture_default_str();
  anchors->add_option("--data-dir", anchors_data_dir, "Dataset root (default: $AGF_DATA_DIR or ./data)");
  anchors->add_option("--mode", anchors_mode, "louvain | random (random uses the Louvain count)")->capture_default_str();
  anchors->add_option("--seed", anchors_seed, "Seed for random partitions")->capture_default_str();
  anchors->add_option("--out", anchors_out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (train->parsed()) {
      const RunConfig cfg = resolve(train_config, train_flags);
      const DatasetBundle bundle = load_named_dataset(cfg.data_dir, cfg.dataset);
      const CvResult cv = train_run(cfg, bundle, train_out, err, train_verbose);
      out << summary_line(cfg, cv) << '\n';
      return 0;
    }

    if (eval->parsed()) {
      const fs::path dir = eval_run;
      RunConfig cfg;
      apply_values(cfg, read_config_file(dir / "manifest.cfg"));
      ConfigValues overrides;
      if (!eval_data_dir.empty()) overrides["data.data_dir"] = eval_data_dir;
      apply_values(cfg, overrides);
      const DatasetBundle bundle = load_named_dataset(cfg.data_dir, cfg.dataset);
      LoadedRun loaded = load_run(dir, bundle, overrides);
      const ModelConfig mcfg = loaded.cfg.model_config(bundle.feature_dim, bundle.num_classes);
      const auto splits = stratified_kfold(bundle.labels(), loaded.cfg.folds, loaded.cfg.seed);
      const auto graphs = prepare_dataset(bundle.graphs, mcfg, loaded.cfg.seed);
      CvResult cv;
      std::vector<double> accs;
      auto csv = open_out(eval_out.empty() ? dir / "eval.csv" : fs::path(eval_out));
      csv << "fold,accuracy\n";
      for (std::size_t f = 0; f < splits.size(); ++f) {
        accs.push_back(evaluate(loaded.folds[f], mcfg, graphs, splits[f].test));
        csv << f << ',' << fixed6(accs.back()) << '\n';
      }
      cv.mean = mean_of(accs);
      cv.stddev = population_std(accs);
      csv << "mean," << fixed6(cv.mean) << '\n' << "std," << fixed6(cv.stddev) << '\n';
      out << summary_line(loaded.cfg, cv) << '\n';
      return 0;
    }

    if (attack->parsed()) {
      const auto rates = parse_list(flip_rates, "flip rate");
      for (double r : rates) {
        if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("flip rates must lie in [0, 1]");
      }
      const fs::path dir = attack_out;
      fs::create_directories(dir);
      LoadedRun anchor_model, full_model;
      DatasetBundle bundle;
      if (retrain) {
        RunConfig cfg = resolve(attack_config, attack_flags);
        if (cfg.anchor_mode == AnchorMode::full) cfg.anchor_mode = AnchorMode::louvain;
        bundle = load_named_dataset(cfg.data_dir, cfg.dataset);
        RunConfig full_cfg = cfg;
        full_cfg.anchor_mode = AnchorMode::full;
        anchor_model.cfg = cfg;
        full_model.cfg = full_cfg;
        for (auto& f : train_run(cfg, bundle, dir / "anchor", err, attack_verbose).folds) {
          anchor_model.folds.push_back(std::move(f.params));
        }
        for (auto& f : train_run(full_cfg, bundle, dir / "full", err, attack_verbose).folds) {
          full_model.folds.push_back(std::move(f.params));
        }
      } else {
        if (anchor_run.empty() || full_run.empty()) {
          throw ConfigError("attack needs --anchor-run and --full-run, or --retrain");
        }
        const ConfigValues overrides = attack_flags.collect();
        RunConfig probe;
        apply_values(probe, read_config_file(fs::path(anchor_run) / "manifest.cfg"));
        apply_values(probe, overrides);
        bundle = load_named_dataset(probe.data_dir, probe.dataset);
        anchor_model = load_run(anchor_run, bundle, overrides);
        full_model = load_run(full_run, bundle, overrides);
        if (full_model.cfg.anchor_mode != AnchorMode::full) throw ConfigError("--full-run is not a full-baseline run");
        if (anchor_model.cfg.anchor_mode == AnchorMode::full) throw ConfigError("--anchor-run is a full-baseline run");
      }
      auto csv = open_out(dir / "attack.csv");
      csv << "rate,mode,accuracy\n";
      for (double rate : rates) {
        const double a = perturbed_accuracy(bundle, anchor_model.cfg, anchor_model.folds, rate);
        const double f = perturbed_accuracy(bundle, full_model.cfg, full_model.folds, rate);
        csv << format_double(rate) << ',' << to_string(anchor_model.cfg.anchor_mode) << ',' << fixed6(a) << '\n';
        csv << format_double(rate) << ",full," << fixed6(f) << '\n';
        out << "rate " << format_double(rate) << ": anchor " << fixed6(a) << ", full " << fixed6(f) << '\n';
      }
      return 0;
    }

    if (bench->parsed()) {
      std::vector<std::size_t> sizes;
      for (double s : parse_list(bench_sizes, "size")) {
        if (!(s >= 2.0) || s != static_cast<double>(static_cast<std::size_t>(s))) {
          throw ConfigError("bench sizes must be integers >= 2");
        }
        sizes.push_back(static_cast<std::size_t>(s));
      }
      BenchOptions options;
      options.edge_rate = bench_edge_rate;
      options.louvain_anchors = bench_louvain;
      const auto records = scaling_sweep(sizes, bench_anchors, bench_dim, bench_reps, bench_seed, options);
      std::ostream& log = bench_out.empty() ? err : out;
      for (const auto& r : records) {
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.graph_hash));
        log << to_string(r.mode) << " n=" << r.n << " c=" << r.c << " graph=" << hash << " median_ms="
            << fixed6(r.median_seconds * 1e3) << '\n';
      }
      if (bench_out.empty()) {
        write_timing_csv(out, records);
      } else {
        auto csv = open_out(bench_out);
        write_timing_csv(csv, records);
      }
      if (sizes.size() >= 3) {
        std::vector<std::pair<double, double>> anchor_series, full_series;
        for (const auto& r : records) {
          auto& s = r.mode == BenchMode::anchor ? anchor_series : full_series;
          s.emplace_back(static_cast<double>(r.n), r.median_seconds);
        }
        log << "loglog slope anchor=" << fixed6(fit_loglog_slope(anchor_series))
            << " full=" << fixed6(fit_loglog_slope(full_series)) << '\n';
      }
      return 0;
    }

    if (anchors->parsed()) {
      ConfigValues dir_values = env_defaults();
      if (!anchors_data_dir.empty()) dir_values["data.data_dir"] = anchors_data_dir;
      RunConfig cfg;
      apply_values(cfg, dir_values);
      const AnchorMode mode = parse_anchor_mode(anchors_mode);
      if (mode == AnchorMode::full) throw ConfigError("anchors --mode must be louvain or random");
      const DatasetBundle bundle = load_named_dataset(cfg.data_dir, anchors_dataset);
      std::ostringstream csv;
      csv << "graph_id,n,c,ratio,modularity\n";
      double ratio_sum = 0.0;
      for (std::size_t i = 0; i < bundle.graphs.size(); ++i) {
        const Graph& g = bundle.graphs[i];
        Partition p = louvain(g);
        if (mode == AnchorMode::random) p = random_partition(g.num_nodes(), p.num_communities, derive_seed(anchors_seed, i));
        const double ratio = static_cast<double>(p.num_communities) / static_cast<double>(g.num_nodes());
        ratio_sum += ratio;
        csv << i << ',' << g.num_nodes() << ',' << p.num_communities << ',' << fixed6(ratio) << ','
            << (g.num_edges() > 0 ? fixed6(modularity(g, p)) : std::string("nan")) << '\n';
      }
      const double mean_ratio = bundle.graphs.empty() ? 0.0 : ratio_sum / static_cast<double>(bundle.graphs.size());
      if (anchors_out.empty()) {
        out << csv.str();
        err << "mean C/N ratio " << fixed6(mean_ratio) << " over " << bundle.graphs.size() << " graphs\n";
      } else {
        auto file = open_out(anchors_out);
        file << csv.str();
        out << "mean C/N ratio " << fixed6(mean_ratio) << " over " << bundle.graphs.size() << " graphs\n";
      }
      return 0;
    }
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

}  // namespace agf::cli
