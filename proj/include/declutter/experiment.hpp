#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "declutter/policy.hpp"
#include "declutter/simscene.hpp"

namespace declutter::exp {

enum class Variant { baseline, grasp_optim, grasp_optim_adaptive, disperse_grasp };
const char* to_string(Variant v);
std::optional<Variant> variant_from_string(const std::string& s);

struct Durations {
  double t_grasp_s = 20.0;
  double t_push_s = 15.0;
  double t_perceive_s = 2.0;
};

struct ExperimentConfig {
  Variant variant = Variant::disperse_grasp;
  int trials = 2000;  // grasp attempts
  int max_objects = 20;
  std::vector<std::uint64_t> seeds{1};
  policy::EpisodeConfig episode;
  sim::HeapParams heap;
  Durations durations;
};

/// GDI thresholds used by the optimised variants (best cell of the default
/// sweep grid).
inline constexpr double kOptimizedLct = 9.0;
inline constexpr double kOptimizedHct = 0.02;

/// Sets the variant-dependent knobs of `cfg` (cluster count mode, GDI
/// thresholds, clutter policy) from `v`, leaving everything else alone.
void apply_variant(policy::EpisodeConfig& cfg, Variant v);

/// Seed of the i-th episode: the configured list first, then derived.
std::uint64_t episode_seed(const std::vector<std::uint64_t>& seeds, std::size_t i);

struct BinRow {
  int lo = 0;
  int hi = 0;
  int attempts = 0;
  double mean_local = 0.0;
  double mpc = 0.0;
  double gs = 0.0;
  friend bool operator==(const BinRow&, const BinRow&) = default;
};

struct MetricsReport {
  double gs = 0.0;
  double mpc = 0.0;
  double gs_wm = 0.0;
  double mpph = 0.0;
  int attempts = 0;
  int successes = 0;
  int multi_picks = 0;
  int pushes = 0;
  std::vector<BinRow> by_bin;
  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Object-count bins used for per-bin aggregation.
inline constexpr int kBinEdges[][2] = {{1, 5}, {6, 10}, {11, 15}, {16, 20}};

/// Throws NoAttempts when the logs contain no grasp attempt.
MetricsReport compute_metrics(const std::vector<policy::EpisodeLog>& logs, const Durations& durations);

struct BatchResult {
  std::vector<policy::EpisodeLog> logs;
  MetricsReport report;
  std::vector<std::string> errors;
};

/// Runs episodes on fresh heaps until `trials` grasp attempts are logged.
/// Episodes execute in parallel but are accepted in index order, so the
/// result does not depend on the thread count.
BatchResult run_batch(const ExperimentConfig& config);

/// Writes logs.jsonl, report.csv and report.json into `dir`.
void write_batch(const std::string& dir, const BatchResult& result);

// --- k-estimator training -------------------------------------------------

struct KTrainingSet {
  std::vector<grasp::KSample> samples;
};

/// Renders `n_scenes` heaps with n = 1..max_objects objects and records
/// (area spread, global clutter, true count).
KTrainingSet k_training_set(const ExperimentConfig& config, int n_scenes, std::uint64_t seed);

struct KFit {
  grasp::KModel model;
  double holdout_mae = 0.0;
};

/// Fits on the first 80% of a training set, reports MAE on the rest.
KFit fit_k_with_holdout(const KTrainingSet& set, int k_max = 25);

// --- calibration ----------------------------------------------------------

struct Calibration {
  double t_global = 0.0;
  double t_local = 0.0;
  std::vector<double> empty_global, heap_global, isolated_local, crowded_local;
};

double percentile(std::vector<double> values, double pct);

/// Threshold midpoint between the percentile_hi of `low` and the
/// percentile_lo of `high`. Throws Overlap when they are not separated.
double separating_threshold(const std::vector<double>& low, const std::vector<double>& high, double percentile_lo,
                            double percentile_hi);

Calibration calibrate_thresholds(const ExperimentConfig& config, const std::vector<std::uint64_t>& seeds,
                                 double percentile_lo = 25.0, double percentile_hi = 75.0);

// --- sweeps and ablations -------------------------------------------------

struct GdiCell {
  double lct = 0.0;
  double hct = 0.0;
  double gs = 0.0;
  int attempts = 0;
};

std::vector<GdiCell> sweep_gdi(const ExperimentConfig& config, const std::vector<double>& lct_values,
                               const std::vector<double>& hct_values, int attempts_per_cell = 200);

struct KAblationRow {
  std::string variant;  // naive_k<N>, exact, estimate
  int lo = 0;
  int hi = 0;
  int attempts = 0;
  double gs = 0.0;
};

std::vector<KAblationRow> ablate_k(const ExperimentConfig& config, const std::vector<int>& k_fixed_values,
                                   int trials_per_variant);

struct ClutterEffectRow {
  std::string variant;
  BinRow bin;
};

std::vector<ClutterEffectRow> analyze_clutter_effect(const std::vector<policy::EpisodeLog>& disperse,
                                                     const std::vector<policy::EpisodeLog>& grasp_only,
                                                     const Durations& durations = {});

// --- CSV emitters (fixed column order) ------------------------------------

std::string report_csv(const MetricsReport& r);
MetricsReport parse_report_csv(const std::string& text);
std::string gdi_sweep_csv(const std::vector<GdiCell>& cells);
std::string k_ablation_csv(const std::vector<KAblationRow>& rows);
std::string clutter_effect_csv(const std::vector<ClutterEffectRow>& rows);

}  // namespace declutter::exp

namespace declutter::exp {

/// Seed and scene count used when a configuration ships no k-model.
inline constexpr std::uint64_t kDefaultKTrainingSeed = 20240917;
inline constexpr int kDefaultKTrainingScenes = 200;

/// Fits the object-count model on simulator-labelled heaps.
KFit default_k_fit(const ExperimentConfig& config);

}  // namespace declutter::exp
