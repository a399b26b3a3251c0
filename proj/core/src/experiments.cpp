#include "tastesim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "tastesim/dynamics.hpp"

namespace tastesim {

std::string_view mode_name(Mode m) { return m == Mode::Paper ? "paper" : "robust"; }

std::string_view entropy_base_name(EntropyBase b) {
  return b == EntropyBase::Step ? "step" : "cum";
}

std::vector<double> default_alpha_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 9; ++i) grid.push_back(static_cast<double>(i) / 10.0);
  return grid;
}

ScenarioConfig sweep_baseline() {
  ScenarioConfig c;
  c.name = "alpha_sweep";
  c.k_sources = 8;
  c.conformity = 0.10;
  c.alpha = 0.0;
  c.mu_c_bar = 1.0;
  c.sigma_c_bar = 1.0;
  return c;
}

ScenarioConfig cultural_capital_config(std::size_t n_agents, PreferenceGroup high,
                                       PreferenceGroup low) {
  if (n_agents == 0 || n_agents % 2 != 0) {
    throw ConfigError("n_agents_cc must be a positive even number, got " +
                      std::to_string(n_agents));
  }
  ScenarioConfig c;
  c.name = "cultural_capital";
  c.k_sources = 5;
  c.conformity = 0.5;
  c.alpha = 0.9;
  c.mu_c_bar = high.mu_c_bar;
  c.sigma_c_bar = high.sigma_c_bar;
  c.params.n_agents = n_agents;
  high.count = n_agents / 2;
  low.count = n_agents / 2;
  c.groups = {std::move(high), std::move(low)};
  return c;
}

void validate(const ExperimentPlan& plan) {
  if (plan.replicates < 1) throw ConfigError("replicates must be >= 1");
  if (plan.alpha_grid.size() < 2) throw ConfigError("alpha grid needs at least two values");
  for (double a : plan.alpha_grid) {
    if (!(a >= 0.0 && a <= 1.0)) throw ConfigError("alpha grid values must lie in [0,1]");
  }
  cultural_capital_config(plan.n_agents_cc);
  for (const auto& s : plan.scenarios) validate(s);
  for (double a : plan.alpha_grid) {
    ScenarioConfig c = plan.sweep_base;
    c.alpha = a;
    validate(c);
  }
}

RunResult run_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  Rng rng(seed);
  RunResult out;
  out.final_world = init_world(config, rng);
  const std::size_t n_groups = config.groups.empty() ? 1 : config.groups.size();
  WorldState& world = out.final_world;
  for (std::size_t t = 0; t < config.params.n_steps; ++t) {
    const StepOutcome outcome = step(world, config, rng);
    record_step(out.series, world, outcome.mean_epistemic, n_groups);
  }
  return out;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

Estimate make_estimate(std::vector<double> samples) {
  Estimate e;
  e.band = summarize(samples);
  e.samples = std::move(samples);
  return e;
}

std::optional<std::size_t> ScenarioResults::find(std::string_view name) const {
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (configs[i].name == name) return i;
  }
  return std::nullopt;
}

ScenarioResults run_scenarios(const std::vector<ScenarioConfig>& scenarios,
                              std::size_t replicates, std::uint64_t base_seed) {
  ScenarioResults out;
  out.configs = scenarios;
  out.runs.assign(scenarios.size(), std::vector<MetricSeries>(replicates));
  out.snapshots.resize(scenarios.size());
  parallel_for(scenarios.size() * replicates, [&](std::size_t task) {
    const std::size_t s = task / replicates;
    const std::size_t r = task % replicates;
    RunResult run = run_scenario(scenarios[s], base_seed + r);
    out.runs[s][r] = std::move(run.series);
    if (r == 0) out.snapshots[s] = std::move(run.final_world);
  });
  return out;
}

AlphaSweepResult run_alpha_sweep(const ScenarioConfig& base, const std::vector<double>& alpha_grid,
                                 std::size_t replicates, std::uint64_t base_seed,
                                 EntropyBase entropy_base) {
  if (alpha_grid.size() < 2) throw ConfigError("alpha grid needs at least two values");
  AlphaSweepResult out;
  out.base = base;
  out.alpha_grid = alpha_grid;
  const std::size_t n_alpha = alpha_grid.size();
  out.runs.assign(n_alpha, std::vector<MetricSeries>(replicates));
  parallel_for(n_alpha * replicates, [&](std::size_t task) {
    const std::size_t a = task / replicates;
    const std::size_t r = task % replicates;
    ScenarioConfig config = base;
    config.alpha = alpha_grid[a];
    out.runs[a][r] = run_scenario(config, base_seed + r).series;
  });

  const Metric entropy_metric =
      entropy_base == EntropyBase::Step ? Metric::EntropyStep : Metric::EntropyCum;
  const Metric gini_metric = entropy_base == EntropyBase::Step ? Metric::GiniStep : Metric::GiniCum;
  out.entropy_last10.assign(n_alpha, std::vector<double>(replicates));
  out.gini_last10.assign(n_alpha, std::vector<double>(replicates));
  for (std::size_t a = 0; a < n_alpha; ++a) {
    for (std::size_t r = 0; r < replicates; ++r) {
      out.entropy_last10[a][r] = tail_mean(out.runs[a][r].get(entropy_metric));
      out.gini_last10[a][r] = tail_mean(out.runs[a][r].get(gini_metric));
    }
  }

  std::vector<double> entropy_slopes(replicates);
  std::vector<double> gini_slopes(replicates);
  std::vector<double> ys(n_alpha);
  for (std::size_t r = 0; r < replicates; ++r) {
    for (std::size_t a = 0; a < n_alpha; ++a) ys[a] = out.entropy_last10[a][r];
    entropy_slopes[r] = ols_slope(alpha_grid, ys).value;
    for (std::size_t a = 0; a < n_alpha; ++a) ys[a] = out.gini_last10[a][r];
    gini_slopes[r] = ols_slope(alpha_grid, ys).value;
  }
  out.entropy_slope = make_estimate(std::move(entropy_slopes));
  out.gini_slope = make_estimate(std::move(gini_slopes));
  return out;
}

namespace {

std::vector<double> last10_per_replicate(const std::vector<MetricSeries>& runs, Metric m) {
  std::vector<double> v;
  v.reserve(runs.size());
  for (const auto& s : runs) v.push_back(tail_mean(s.get(m)));
  return v;
}

Contrast paired_delta(const ScenarioResults& results, std::size_t a, std::size_t b, Metric m) {
  const auto xa = last10_per_replicate(results.runs[a], m);
  const auto xb = last10_per_replicate(results.runs[b], m);
  std::vector<double> d(xa.size());
  for (std::size_t r = 0; r < d.size(); ++r) d[r] = xa[r] - xb[r];
  return {display_name(results.configs[a].name) + " - " + display_name(results.configs[b].name),
          make_estimate(std::move(d))};
}

}  // namespace

CrossNationalResult cross_national_contrasts(const ScenarioResults& results,
                                             EntropyBase entropy_base) {
  const Metric m = entropy_base == EntropyBase::Step ? Metric::GiniStep : Metric::GiniCum;
  CrossNationalResult out;
  for (std::size_t s = 0; s < results.configs.size(); ++s) {
    out.gini_levels.push_back(
        {results.configs[s].name, make_estimate(last10_per_replicate(results.runs[s], m))});
  }
  constexpr std::pair<std::string_view, std::string_view> kPairs[] = {
      {"sanremo", "brazil"}, {"uk", "brazil"}, {"sanremo", "kpop"}};
  for (const auto& [lhs, rhs] : kPairs) {
    const auto a = results.find(lhs);
    const auto b = results.find(rhs);
    if (a && b) out.gini_deltas.push_back(paired_delta(results, *a, *b, m));
  }
  return out;
}

CrossNationalResult run_cross_national(const std::vector<ScenarioConfig>& scenarios,
                                       std::size_t replicates, std::uint64_t base_seed) {
  if (scenarios.size() < 2) throw ConfigError("cross-national contrasts need >= 2 scenarios");
  return cross_national_contrasts(run_scenarios(scenarios, replicates, base_seed));
}

SupplyContrastResult supply_contrasts(const ScenarioResults& results) {
  const auto sanremo = results.find("sanremo");
  if (!sanremo) throw std::invalid_argument("supply contrasts need the sanremo scenario");
  SupplyContrastResult out;
  for (std::size_t s = 0; s < results.configs.size(); ++s) {
    out.spread_levels.push_back(
        {results.configs[s].name,
         make_estimate(last10_per_replicate(results.runs[s], Metric::SupplySpread))});
  }
  for (std::string_view name : {"brazil", "kpop", "uk"}) {
    if (const auto c = results.find(name)) {
      out.spread_deltas.push_back(paired_delta(results, *c, *sanremo, Metric::SupplySpread));
    }
  }
  if (out.spread_deltas.empty()) {
    throw std::invalid_argument("supply contrasts need at least one comparator scenario");
  }
  return out;
}

SupplyContrastResult run_supply_contrasts(const std::vector<ScenarioConfig>& scenarios,
                                          std::size_t replicates, std::uint64_t base_seed) {
  return supply_contrasts(run_scenarios(scenarios, replicates, base_seed));
}

CulturalCapitalResult run_cultural_capital(const ScenarioConfig& config, std::size_t replicates,
                                           std::uint64_t base_seed) {
  if (config.groups.size() != 2) {
    throw ConfigError("the cultural-capital experiment needs exactly two preference groups");
  }
  CulturalCapitalResult out;
  out.config = config;
  out.runs.resize(replicates);
  parallel_for(replicates, [&](std::size_t r) {
    out.runs[r] = run_scenario(config, base_seed + r).series;
  });
  out.high_last10 = last10_per_replicate(out.runs, Metric::IndivEntropyHighCC);
  out.low_last10 = last10_per_replicate(out.runs, Metric::IndivEntropyLowCC);
  std::vector<double> d(replicates);
  for (std::size_t r = 0; r < replicates; ++r) d[r] = out.high_last10[r] - out.low_last10[r];
  out.delta = make_estimate(std::move(d));
  return out;
}

CulturalCapitalResult run_cultural_capital(std::size_t n_agents_cc, std::size_t replicates,
                                           std::uint64_t base_seed) {
  return run_cultural_capital(cultural_capital_config(n_agents_cc), replicates, base_seed);
}

ExperimentResults run_all(const ExperimentPlan& plan,
                          const std::function<void(std::string_view)>& progress) {
  validate(plan);
  const auto note = [&progress](std::string_view msg) {
    if (progress) progress(msg);
  };
  ExperimentResults out;
  out.plan = plan;
  out.scenarios = run_scenarios(plan.scenarios, plan.replicates, plan.base_seed);
  note("scenario runs done");
  out.cross_national = cross_national_contrasts(out.scenarios, plan.entropy_base);
  if (out.scenarios.find("sanremo") &&
      (out.scenarios.find("brazil") || out.scenarios.find("kpop") || out.scenarios.find("uk"))) {
    out.supply = supply_contrasts(out.scenarios);
  }
  out.sweep = run_alpha_sweep(plan.sweep_base, plan.alpha_grid, plan.replicates, plan.base_seed,
                              plan.entropy_base);
  note("alpha sweep done");
  out.cultural_capital =
      run_cultural_capital(plan.n_agents_cc, plan.replicates, plan.base_seed);
  note("cultural-capital experiment done");
  return out;
}

RobustnessRow make_row(std::string prediction, std::string measure, const Estimate& estimate,
                       Direction predicted, std::string level_note) {
  RobustnessRow row;
  row.prediction = std::move(prediction);
  row.measure = std::move(measure);
  row.estimate = estimate.band.mean;
  row.ci_low = estimate.band.p05;
  row.ci_high = estimate.band.p95;
  row.notes = std::move(level_note);
  if (predicted == Direction::None) return row;

  const bool positive = predicted == Direction::Positive;
  const bool excludes_zero = positive ? row.ci_low > 0.0 : row.ci_high < 0.0;
  const std::string sign = positive ? "positive" : "negative";
  if (excludes_zero) {
    row.notes = sign + " and interval excludes zero: supports " + row.prediction;
  } else {
    row.notes = "interval does not lie entirely " + std::string(positive ? "above" : "below") +
                " zero: does not support " + row.prediction;
  }
  return row;
}

std::vector<RobustnessRow> emit_robustness_table(const ExperimentResults& results) {
  std::vector<RobustnessRow> rows;
  const std::string entropy_label =
      results.plan.entropy_base == EntropyBase::Step ? "H_cons (step)" : "H_cons";
  rows.push_back(make_row("P1", "Slope " + entropy_label + " vs alpha (last10)",
                          results.sweep.entropy_slope, Direction::Negative));
  rows.push_back(make_row("P1", "Slope Gini vs alpha (last10)", results.sweep.gini_slope,
                          Direction::Positive));

  for (const auto& level : results.cross_national.gini_levels) {
    rows.push_back(make_row("P2", display_name(level.scenario) + ": Gini (last10)", level.level));
  }
  for (const auto& c : results.cross_national.gini_deltas) {
    rows.push_back(make_row("P2", c.label + ": delta Gini (last10)", c.delta,
                            Direction::Positive));
  }

  const auto& cc = results.cultural_capital;
  rows.push_back(make_row("P3",
                          "High CC - Low CC: delta individual entropy (last10) [N_cc=" +
                              std::to_string(cc.config.params.n_agents) + "]",
                          cc.delta, Direction::Positive));

  if (results.supply) {
    for (const auto& level : results.supply->spread_levels) {
      rows.push_back(
          make_row("P4", display_name(level.scenario) + ": Supply spread (last10)", level.level));
    }
    for (const auto& c : results.supply->spread_deltas) {
      rows.push_back(make_row("P4", c.label + ": delta supply spread (last10)", c.delta,
                              Direction::Positive));
    }
  }

  std::sort(rows.begin(), rows.end(), [](const RobustnessRow& a, const RobustnessRow& b) {
    return std::tie(a.prediction, a.measure) < std::tie(b.prediction, b.measure);
  });
  return rows;
}

}  // namespace tastesim
