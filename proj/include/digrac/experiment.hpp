#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "digrac/dsbm.hpp"
#include "digrac/spectral.hpp"
#include "digrac/training.hpp"

namespace digrac {

struct DsbmSettings {
  MetaStructure structure = MetaStructure::cycle;
  int clusters = 3;
  Index nodes = 1000;
  double p = 0.1;
  double rho = 1.0;
  double eta = 0.0;
  bool ambient = false;
  bool self_loops = true;
};

struct FileSettings {
  std::filesystem::path edges;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> features;
  int clusters = 0;
  bool largest_component = true;
  bool ratio_transform = false;
};

enum class FeatureSource { spectral, file };

/// Everything one experiment needs. Defaults follow the paper's settings.
struct ExperimentConfig {
  std::optional<DsbmSettings> dsbm;
  std::optional<FileSettings> files;
  FeatureSource features = FeatureSource::spectral;
  HermitianNormalization feature_normalization = HermitianNormalization::random_walk;
  int hidden = 32;
  int hops = 2;
  double dropout = 0.5;
  TrainConfig train;
  bool beta_from_meta_graph = true;  // unset `beta` on a DSBM: use its edge count
  SplitFractions fractions;
  double seed_ratio = 0.0;
  int graphs = 1;
  int splits = 1;
  std::vector<double> eta_grid;  // sweep only; empty = the single dsbm.eta
  std::uint64_t seed = 0;
  std::filesystem::path output;
  bool baseline = false;  // also score the Herm_rw k-means baseline
  int jobs = 1;

  int clusters() const;
  /// Parses an already-loaded TOML document. Unknown keys are errors.
  static ExperimentConfig from_json(const nlohmann::json& doc);
  /// Fully resolved config, defaults included.
  nlohmann::json to_json() const;
};

ExperimentConfig load_config(const std::filesystem::path& path);

struct RunSeeds {
  std::uint64_t graph = 0;
  std::uint64_t split = 0;
  std::uint64_t init = 0;
  std::uint64_t train = 0;
};

struct RunResult {
  std::size_t setting = 0;
  double eta = 0.0;
  int graph_index = 0;
  int split_index = 0;
  RunSeeds seeds;
  bool ok = false;
  std::string error;
  double test_ari = 0.0;
  double test_nmi = 0.0;
  double full_ari = 0.0;
  double objective = 0.0;        // training objective on the full graph, argmax labels
  double truth_objective = 0.0;  // same objective for ground-truth labels
  double baseline_ari = 0.0;
  int best_epoch = -1;
  int epochs = 0;
  double seconds = 0.0;
  std::vector<EpochRecord> log;
  std::vector<int> prediction;
  ModelParams params;
};

/// Seeds for one run. Graph seeds depend on (setting, graph); split, init and
/// train seeds also on the split index.
RunSeeds run_seeds(std::uint64_t master, std::size_t setting, int graph, int split);

/// One train/evaluate cycle on graph `graph` of setting `setting`.
RunResult run_single(const ExperimentConfig& config, std::size_t setting, double eta, int graph,
                     int split);

struct SettingSummary {
  double eta = 0.0;
  int runs = 0;
  int failed = 0;
  double ari_mean = 0.0, ari_stderr = 0.0;
  double nmi_mean = 0.0, nmi_stderr = 0.0;
  double objective_mean = 0.0, objective_stderr = 0.0;
  double baseline_ari_mean = 0.0, baseline_ari_stderr = 0.0;
};

struct SweepResult {
  std::vector<RunResult> runs;  // ordered by (setting, graph, split)
  std::vector<SettingSummary> summary;
  int exit_code = 0;  // 0 ok, 3 some runs failed, 4 every run failed
};

/// Runs the η grid (or the single configured setting) with `config.jobs`
/// concurrent runs. `progress` is called after each run finishes.
SweepResult run_sweep(const ExperimentConfig& config,
                      const std::function<void(const RunResult&)>& progress = {});

/// Mean and standard error (sample std / √m) of `values`.
std::pair<double, double> mean_stderr(const std::vector<double>& values);

/// Writes config copy, runs.csv, summary.csv, manifest.json and per-run epoch
/// logs under `dir`. `config_text` is the original config file content.
void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                   const std::string& config_text, const SweepResult& result,
                   bool save_models);

}  // namespace digrac
