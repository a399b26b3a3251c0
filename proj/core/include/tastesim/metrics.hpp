#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "tastesim/model.hpp"

namespace tastesim {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Value plus a flag set when the input was degenerate (all-zero counts,
/// fewer than two sources, constant regressor, ...).
struct Measured {
  double value = 0.0;
  bool degenerate = false;
};

/// Shannon entropy in nats of the shares counts / sum(counts). All-zero input
/// yields 0 flagged degenerate.
Measured shannon_entropy(std::span<const std::uint64_t> counts);
Measured shannon_entropy(std::span<const std::uint32_t> counts);

/// sum_i sum_j |x_i - x_j| / (2 n^2 mean), computed in O(n log n) from the
/// sorted values. All-zero input yields 0 flagged degenerate.
Measured gini(std::span<const std::uint64_t> counts);
Measured gini(std::span<const double> values);

/// Mean pairwise Euclidean distance between source centers; kMissing (and
/// degenerate) when fewer than two sources exist.
Measured supply_spread(std::span<const Source> sources);

/// Mean of 1/(1 + beta*e_ij) over every (agent, selected song) pair, with e
/// taken from `world` (the exposure counts before the selections applied).
double mean_epistemic(const WorldState& world,
                      std::span<const std::vector<std::size_t>> selections,
                      const SimParams& params);

/// Entropy of one agent's cumulative exposure row.
Measured individual_entropy(std::span<const std::uint32_t> exposure_row);

/// Least-squares slope; kMissing (degenerate) for fewer than two points or a
/// constant x.
Measured ols_slope(std::span<const double> xs, std::span<const double> ys);

/// Percentile with linear interpolation between closest ranks: position
/// (n - 1) * q in the sorted sample. Requires a nonempty sample.
double percentile(std::span<const double> samples, double q);

double mean(std::span<const double> samples);

/// Mean over the last `window` entries (the whole series when shorter).
double tail_mean(std::span<const double> series, std::size_t window = 10);

struct Band {
  double p05 = 0.0;
  double p50 = 0.0;
  double mean = 0.0;
  double p95 = 0.0;
};

/// Across-replicate summary of a scalar.
Band summarize(std::span<const double> samples);

/// Per-step bands: samples[r][t] is replicate r at step t. Requires at least
/// two replicates of equal length; throws std::invalid_argument otherwise.
std::vector<Band> percentile_bands(std::span<const std::vector<double>> samples);

enum class Metric {
  EntropyStep,
  EntropyCum,
  GiniStep,
  GiniCum,
  EpistemicMean,
  SupplySpread,
  IndivEntropyHighCC,
  IndivEntropyLowCC,
};

inline constexpr Metric kAllMetrics[] = {
    Metric::EntropyStep,   Metric::EntropyCum,   Metric::GiniStep,
    Metric::GiniCum,       Metric::EpistemicMean, Metric::SupplySpread,
    Metric::IndivEntropyHighCC, Metric::IndivEntropyLowCC,
};

std::string_view metric_name(Metric m);

/// Per-step ecosystem metrics of one run (index t-1 holds step t).
struct MetricSeries {
  std::vector<double> entropy_step;
  std::vector<double> entropy_cum;
  std::vector<double> gini_step;
  std::vector<double> gini_cum;
  std::vector<double> epistemic_mean;
  std::vector<double> supply_spread;
  // Mean individual entropy per preference group, per step
  // (group_entropy[g][t]).
  std::vector<std::vector<double>> group_entropy;
  // Individual entropy of every agent after the final step.
  std::vector<double> final_individual_entropy;

  std::size_t steps() const { return entropy_cum.size(); }

  /// Series for `m`; empty for the CC metrics when the run had fewer than two
  /// preference groups.
  std::span<const double> get(Metric m) const;

  friend bool operator==(const MetricSeries&, const MetricSeries&) = default;
};

/// Appends the metrics of the step that just completed.
void record_step(MetricSeries& series, const WorldState& world, double step_mean_epistemic,
                 std::size_t n_groups);

}  // namespace tastesim
