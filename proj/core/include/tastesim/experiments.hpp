#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tastesim/metrics.hpp"
#include "tastesim/model.hpp"

namespace tastesim {

enum class Mode { Paper, Robust };
enum class EntropyBase { Step, Cum };

std::string_view mode_name(Mode m);
std::string_view entropy_base_name(EntropyBase b);

std::vector<double> default_alpha_grid();

/// Neutral baseline for the curation sweep: K=8, conformity 0.10,
/// mu_c 1.0, sigma_c 1.0; only alpha is varied.
ScenarioConfig sweep_baseline();

/// High-curation world split evenly between a high cultural-capital group
/// (group 0) and a low one (group 1). Throws ConfigError for odd n_agents.
ScenarioConfig cultural_capital_config(std::size_t n_agents,
                                       PreferenceGroup high = {"high_cc", 1.1, 1.3, 0},
                                       PreferenceGroup low = {"low_cc", 1.0, 0.6, 0});

struct ExperimentPlan {
  Mode mode = Mode::Paper;
  std::uint64_t base_seed = 123;
  std::size_t replicates = 1;
  std::vector<double> alpha_grid = default_alpha_grid();
  std::size_t n_agents_cc = 200;
  std::vector<ScenarioConfig> scenarios;
  ScenarioConfig sweep_base = sweep_baseline();
  EntropyBase entropy_base = EntropyBase::Cum;
  bool show_bands = false;
};

/// Throws ConfigError for replicates < 1, alpha values outside [0,1], an odd
/// n_agents_cc, or an invalid scenario.
void validate(const ExperimentPlan& plan);

struct RunResult {
  MetricSeries series;
  WorldState final_world;
};

/// init_world followed by n_steps steps, recording every metric per step.
RunResult run_scenario(const ScenarioConfig& config, std::uint64_t seed);

/// Calls fn(i) for i in [0, n) across worker threads. Every index writes its
/// own slot, so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Per-replicate samples of one quantity with their across-replicate summary.
struct Estimate {
  std::vector<double> samples;
  Band band;
};

Estimate make_estimate(std::vector<double> samples);

struct ScenarioResults {
  std::vector<ScenarioConfig> configs;
  std::vector<std::vector<MetricSeries>> runs;  // [scenario][replicate]
  std::vector<WorldState> snapshots;            // replicate 0 at the final step

  std::optional<std::size_t> find(std::string_view name) const;
};

ScenarioResults run_scenarios(const std::vector<ScenarioConfig>& scenarios,
                              std::size_t replicates, std::uint64_t base_seed);

struct AlphaSweepResult {
  ScenarioConfig base;
  std::vector<double> alpha_grid;
  std::vector<std::vector<MetricSeries>> runs;  // [alpha][replicate]
  std::vector<std::vector<double>> entropy_last10;  // [alpha][replicate]
  std::vector<std::vector<double>> gini_last10;
  Estimate entropy_slope;  // one OLS slope per replicate
  Estimate gini_slope;
};

AlphaSweepResult run_alpha_sweep(const ScenarioConfig& base, const std::vector<double>& alpha_grid,
                                 std::size_t replicates, std::uint64_t base_seed,
                                 EntropyBase entropy_base = EntropyBase::Cum);

struct Contrast {
  std::string label;  // e.g. "Sanremo - Brazil"
  Estimate delta;
};

struct LevelEstimate {
  std::string scenario;
  Estimate level;
};

struct CrossNationalResult {
  std::vector<LevelEstimate> gini_levels;
  std::vector<Contrast> gini_deltas;  // the confirmatory pairs that exist
};

/// Last-10 Gini per scenario and the confirmatory deltas Sanremo-Brazil,
/// UK-Brazil, Sanremo-K-pop (pairs whose scenarios are absent are skipped).
CrossNationalResult cross_national_contrasts(const ScenarioResults& results,
                                             EntropyBase entropy_base = EntropyBase::Cum);

CrossNationalResult run_cross_national(const std::vector<ScenarioConfig>& scenarios,
                                       std::size_t replicates, std::uint64_t base_seed);

struct SupplyContrastResult {
  std::vector<LevelEstimate> spread_levels;
  std::vector<Contrast> spread_deltas;  // each comparator minus Sanremo
};

/// Throws std::invalid_argument when Sanremo or every comparator is missing.
SupplyContrastResult supply_contrasts(const ScenarioResults& results);

SupplyContrastResult run_supply_contrasts(const std::vector<ScenarioConfig>& scenarios,
                                          std::size_t replicates, std::uint64_t base_seed);

struct CulturalCapitalResult {
  ScenarioConfig config;
  std::vector<MetricSeries> runs;
  std::vector<double> high_last10;
  std::vector<double> low_last10;
  Estimate delta;  // high - low per replicate
};

CulturalCapitalResult run_cultural_capital(const ScenarioConfig& config, std::size_t replicates,
                                           std::uint64_t base_seed);

CulturalCapitalResult run_cultural_capital(std::size_t n_agents_cc, std::size_t replicates,
                                           std::uint64_t base_seed);

struct ExperimentResults {
  ExperimentPlan plan;
  ScenarioResults scenarios;
  AlphaSweepResult sweep;
  CrossNationalResult cross_national;
  std::optional<SupplyContrastResult> supply;
  CulturalCapitalResult cultural_capital;
};

/// Runs every experiment of the plan. `progress` (may be empty) receives one
/// short line per finished experiment.
ExperimentResults run_all(const ExperimentPlan& plan,
                          const std::function<void(std::string_view)>& progress = {});

struct RobustnessRow {
  std::string prediction;  // P1..P4
  std::string measure;
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::string notes;
};

enum class Direction { None, Positive, Negative };

/// Row for an estimate. For a directional prediction the notes read
/// "<sign> and interval excludes zero: supports <P>" only when the whole
/// 5th-95th interval lies on the predicted side of zero.
RobustnessRow make_row(std::string prediction, std::string measure, const Estimate& estimate,
                       Direction predicted = Direction::None, std::string level_note = {});

/// Table rows for every available measure, sorted by (prediction, measure).
std::vector<RobustnessRow> emit_robustness_table(const ExperimentResults& results);

}  // namespace tastesim
