#include "tastesim/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "tastesim/dynamics.hpp"

namespace tastesim {

namespace {

template <typename T>
Measured entropy_of(std::span<const T> counts) {
  double total = 0.0;
  for (T c : counts) total += static_cast<double>(c);
  if (total <= 0.0) return {0.0, true};
  double h = 0.0;
  for (T c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log(p);
  }
  return {h, false};
}

}  // namespace

Measured shannon_entropy(std::span<const std::uint64_t> counts) { return entropy_of(counts); }
Measured shannon_entropy(std::span<const std::uint32_t> counts) { return entropy_of(counts); }

Measured gini(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return {0.0, true};
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  if (total <= 0.0) return {0.0, true};
  // sum_{i<j} (x_j - x_i) = sum_i (2i - n + 1) x_i over ascending x (0-based).
  double weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weighted += (2.0 * static_cast<double>(i) - static_cast<double>(n) + 1.0) * sorted[i];
  }
  return {weighted / (static_cast<double>(n) * total), false};
}

Measured gini(std::span<const std::uint64_t> counts) {
  std::vector<double> v(counts.begin(), counts.end());
  return gini(std::span<const double>(v));
}

Measured supply_spread(std::span<const Source> sources) {
  if (sources.size() < 2) return {kMissing, true};
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < sources.size(); ++a) {
    for (std::size_t b = a + 1; b < sources.size(); ++b) {
      sum += distance(sources[a].center, sources[b].center);
      ++pairs;
    }
  }
  return {sum / static_cast<double>(pairs), false};
}

double mean_epistemic(const WorldState& world,
                      std::span<const std::vector<std::size_t>> selections,
                      const SimParams& params) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < selections.size(); ++i) {
    for (std::size_t j : selections[i]) {
      sum += epistemic_value(world.exposure_at(i, j), params);
      ++n;
    }
  }
  return n ? sum / static_cast<double>(n) : kMissing;
}

Measured individual_entropy(std::span<const std::uint32_t> exposure_row) {
  return shannon_entropy(exposure_row);
}

Measured ols_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("ols_slope: length mismatch");
  if (xs.size() < 2) return {kMissing, true};
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) return {kMissing, true};
  return {sxy / sxx, false};
}

double percentile(std::span<const double> samples, double q) {
  if (samples.empty()) throw std::invalid_argument("percentile of an empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double mean(std::span<const double> samples) {
  if (samples.empty()) return kMissing;
  return std::accumulate(samples.begin(), samples.end(), 0.0) /
         static_cast<double>(samples.size());
}

double tail_mean(std::span<const double> series, std::size_t window) {
  const std::size_t n = std::min(window, series.size());
  return mean(series.subspan(series.size() - n));
}

Band summarize(std::span<const double> samples) {
  return {percentile(samples, 0.05), percentile(samples, 0.50), mean(samples),
          percentile(samples, 0.95)};
}

std::vector<Band> percentile_bands(std::span<const std::vector<double>> samples) {
  if (samples.size() < 2) {
    throw std::invalid_argument("percentile bands need at least two replicates");
  }
  const std::size_t steps = samples.front().size();
  for (const auto& s : samples) {
    if (s.size() != steps) throw std::invalid_argument("replicate series differ in length");
  }
  std::vector<Band> bands(steps);
  std::vector<double> column(samples.size());
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t r = 0; r < samples.size(); ++r) column[r] = samples[r][t];
    bands[t] = summarize(column);
  }
  return bands;
}

std::string_view metric_name(Metric m) {
  switch (m) {
    case Metric::EntropyStep: return "entropy_step";
    case Metric::EntropyCum: return "entropy_cum";
    case Metric::GiniStep: return "gini_step";
    case Metric::GiniCum: return "gini_cum";
    case Metric::EpistemicMean: return "epistemic_mean";
    case Metric::SupplySpread: return "supply_spread";
    case Metric::IndivEntropyHighCC: return "indiv_entropy_mean_highcc";
    case Metric::IndivEntropyLowCC: return "indiv_entropy_mean_lowcc";
  }
  return "unknown";
}

std::span<const double> MetricSeries::get(Metric m) const {
  switch (m) {
    case Metric::EntropyStep: return entropy_step;
    case Metric::EntropyCum: return entropy_cum;
    case Metric::GiniStep: return gini_step;
    case Metric::GiniCum: return gini_cum;
    case Metric::EpistemicMean: return epistemic_mean;
    case Metric::SupplySpread: return supply_spread;
    case Metric::IndivEntropyHighCC:
      return group_entropy.size() >= 2 ? std::span<const double>(group_entropy[0])
                                       : std::span<const double>{};
    case Metric::IndivEntropyLowCC:
      return group_entropy.size() >= 2 ? std::span<const double>(group_entropy[1])
                                       : std::span<const double>{};
  }
  return {};
}

void record_step(MetricSeries& series, const WorldState& world, double step_mean_epistemic,
                 std::size_t n_groups) {
  series.entropy_step.push_back(shannon_entropy(world.step_plays).value);
  series.entropy_cum.push_back(shannon_entropy(world.plays).value);
  series.gini_step.push_back(gini(world.step_plays).value);
  series.gini_cum.push_back(gini(world.plays).value);
  series.epistemic_mean.push_back(step_mean_epistemic);
  series.supply_spread.push_back(supply_spread(world.sources).value);

  series.final_individual_entropy.resize(world.n_agents());
  std::vector<double> sum(n_groups, 0.0);
  std::vector<std::size_t> count(n_groups, 0);
  for (const ListenerAgent& a : world.agents) {
    const double h = individual_entropy(world.exposure_row(a.id)).value;
    series.final_individual_entropy[a.id] = h;
    sum[a.group] += h;
    ++count[a.group];
  }
  series.group_entropy.resize(n_groups);
  for (std::size_t g = 0; g < n_groups; ++g) {
    series.group_entropy[g].push_back(count[g] ? sum[g] / static_cast<double>(count[g])
                                               : kMissing);
  }
}

}  // namespace tastesim
