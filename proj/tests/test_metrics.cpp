#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "oracles.hpp"
#include "tastesim/dynamics.hpp"
#include "tastesim/metrics.hpp"

using namespace tastesim;

namespace {

std::vector<double> as_double(const std::vector<std::uint64_t>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

TEST_CASE("entropy examples") {
  const std::vector<std::uint64_t> uniform(80, 3);
  CHECK(shannon_entropy(uniform).value == doctest::Approx(std::log(80.0)));
  CHECK(shannon_entropy(uniform).value == doctest::Approx(4.3820).epsilon(1e-4));
  const std::vector<std::uint64_t> point = {0, 0, 9, 0};
  CHECK(shannon_entropy(point).value == 0.0);
  const std::vector<std::uint64_t> small = {1, 1, 2};
  CHECK(shannon_entropy(small).value == doctest::Approx(1.0397).epsilon(1e-4));
  const std::vector<std::uint64_t> zero(5, 0);
  CHECK(shannon_entropy(zero).value == 0.0);
  CHECK(shannon_entropy(zero).degenerate);
  const std::vector<std::uint32_t> row = {1, 1, 2};
  CHECK(individual_entropy(row).value == shannon_entropy(small).value);
  const std::vector<std::uint32_t> empty_row(4, 0);
  CHECK(individual_entropy(empty_row).degenerate);
}

TEST_CASE("gini examples") {
  const std::vector<std::uint64_t> equal(6, 4);
  CHECK(gini(equal).value == 0.0);
  const std::vector<std::uint64_t> mono = {4, 0, 0, 0};
  CHECK(gini(mono).value == doctest::Approx(0.75));
  const std::vector<std::uint64_t> ramp = {1, 2, 3, 4};
  CHECK(gini(ramp).value == doctest::Approx(0.25));
  const std::vector<std::uint64_t> zero(3, 0);
  CHECK(gini(zero).value == 0.0);
  CHECK(gini(zero).degenerate);
}

TEST_CASE("gini and entropy agree with brute-force oracles on random vectors") {
  Rng rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(80);
    std::vector<std::uint64_t> counts(n);
    for (auto& c : counts) c = rng.uniform() < 0.3 ? 0 : rng.index(500);
    if (std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) == 0) counts[0] = 1;
    const auto d = as_double(counts);
    CHECK(gini(counts).value == doctest::Approx(oracle::gini(d)).epsilon(1e-12));
    CHECK(shannon_entropy(counts).value == doctest::Approx(oracle::entropy(d)).epsilon(1e-12));
  }
}

TEST_CASE("gini is bounded, permutation invariant and scale invariant") {
  Rng rng(45);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.index(60);
    std::vector<double> x(n);
    for (auto& v : x) v = rng.uniform(0.0, 10.0);
    const double g = gini(std::span<const double>(x)).value;
    CHECK(g >= 0.0);
    CHECK(g <= (static_cast<double>(n) - 1.0) / static_cast<double>(n) + 1e-12);
    auto perm = x;
    rng.shuffle(std::span<double>(perm));
    CHECK(gini(std::span<const double>(perm)).value == doctest::Approx(g).epsilon(1e-12));
    auto scaled = x;
    for (auto& v : scaled) v *= 3.7;
    CHECK(gini(std::span<const double>(scaled)).value == doctest::Approx(g).epsilon(1e-12));
    const double h = shannon_entropy(std::vector<std::uint64_t>(n, 1)).value;
    CHECK(h == doctest::Approx(std::log(static_cast<double>(n))));
  }
}

TEST_CASE("supply spread examples and invariances") {
  const std::vector<Source> same = {{0, {1, 1}}, {1, {1, 1}}, {2, {1, 1}}};
  CHECK(supply_spread(same).value == 0.0);
  const std::vector<Source> pair = {{0, {0, 0}}, {1, {3, 4}}};
  CHECK(supply_spread(pair).value == doctest::Approx(5.0));
  const std::vector<Source> corner = {{0, {0, 0}}, {1, {1, 0}}, {2, {0, 1}}};
  CHECK(supply_spread(corner).value == doctest::Approx((2.0 + std::sqrt(2.0)) / 3.0));

  const std::vector<Source> one = {{0, {2, 2}}};
  CHECK(std::isnan(supply_spread(one).value));
  CHECK(supply_spread(one).degenerate);

  Rng rng(46);
  std::vector<Source> s(7);
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = {k, {rng.uniform(0, 4), rng.uniform(0, 4)}};
  const double base = supply_spread(s).value;
  auto moved = s;
  for (auto& src : moved) src.center = src.center + Vec2{1.5, -0.25};
  CHECK(supply_spread(moved).value == doctest::Approx(base));
  auto scaled = s;
  for (auto& src : scaled) src.center = 2.5 * src.center;
  CHECK(supply_spread(scaled).value == doctest::Approx(2.5 * base));
  auto perm = s;
  std::reverse(perm.begin(), perm.end());
  CHECK(supply_spread(perm).value == doctest::Approx(base));
}

TEST_CASE("mean epistemic over selections") {
  WorldState w;
  w.songs = {{0, 0, {0, 0}}, {1, 0, {1, 1}}};
  w.agents = {{0, {0, 0}, 1.0, 1.0, 0}};
  w.exposure = {0, 2};
  SimParams p;
  p.beta = 0.3;
  const std::vector<std::vector<std::size_t>> sel = {{0, 1}};
  CHECK(mean_epistemic(w, sel, p) == doctest::Approx(0.8125));
  p.beta = 0.0;
  CHECK(mean_epistemic(w, sel, p) == 1.0);
  w.exposure = {0, 0};
  p.beta = 0.3;
  CHECK(mean_epistemic(w, sel, p) == 1.0);
}

TEST_CASE("ols slope examples") {
  CHECK(ols_slope(std::vector<double>{0, 1}, std::vector<double>{1, 0}).value ==
        doctest::Approx(-1.0));
  CHECK(ols_slope(std::vector<double>{0, 1, 2, 3}, std::vector<double>{5, 5, 5, 5}).value ==
        doctest::Approx(0.0));
  CHECK(ols_slope(std::vector<double>{0, 1, 2}, std::vector<double>{0, 2, 4}).value ==
        doctest::Approx(2.0));
  const auto flat = ols_slope(std::vector<double>{1, 1, 1}, std::vector<double>{0, 1, 2});
  CHECK(flat.degenerate);
  CHECK(std::isnan(flat.value));
  CHECK(ols_slope(std::vector<double>{1}, std::vector<double>{1}).degenerate);

  Rng rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs(10), ys(10);
    for (std::size_t i = 0; i < 10; ++i) {
      xs[i] = 0.1 * static_cast<double>(i);
      ys[i] = rng.normal(0.0, 1.0);
    }
    CHECK(ols_slope(xs, ys).value == doctest::Approx(oracle::slope(xs, ys)).epsilon(1e-10));
    std::vector<double> line(10);
    const double m = rng.uniform(-3, 3), b = rng.uniform(-1, 1);
    for (std::size_t i = 0; i < 10; ++i) line[i] = m * xs[i] + b;
    CHECK(ols_slope(xs, line).value == doctest::Approx(m).epsilon(1e-12));
  }
}

TEST_CASE("percentiles interpolate between order statistics") {
  std::vector<double> one_to_100(100);
  std::iota(one_to_100.begin(), one_to_100.end(), 1.0);
  CHECK(percentile(one_to_100, 0.05) == doctest::Approx(5.95));
  CHECK(percentile(one_to_100, 0.95) == doctest::Approx(95.05));
  CHECK(percentile(one_to_100, 0.5) == doctest::Approx(50.5));
  CHECK(percentile(one_to_100, 0.0) == 1.0);
  CHECK(percentile(one_to_100, 1.0) == 100.0);

  Rng rng(48);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs(2 + rng.index(40));
    for (auto& v : xs) v = rng.normal(0, 2);
    for (double q : {0.05, 0.5, 0.95}) {
      CHECK(percentile(xs, q) == doctest::Approx(oracle::percentile(xs, q)).epsilon(1e-12));
    }
    const auto b = summarize(xs);
    CHECK(b.p05 <= b.p50);
    CHECK(b.p50 <= b.p95);
    CHECK(b.p05 <= b.mean);
    CHECK(b.mean <= b.p95);
  }
}

TEST_CASE("bands over replicates") {
  const std::vector<std::vector<double>> same = {{1, 2, 3}, {1, 2, 3}, {1, 2, 3}};
  for (const Band& b : percentile_bands(same)) {
    CHECK(b.p05 == b.p50);
    CHECK(b.p50 == b.p95);
  }
  std::vector<std::vector<double>> reps(100, std::vector<double>(2));
  for (std::size_t r = 0; r < 100; ++r) reps[r] = {static_cast<double>(r + 1), 0.0};
  const auto bands = percentile_bands(reps);
  CHECK(bands[0].p05 == doctest::Approx(5.95));
  CHECK(bands[0].p95 == doctest::Approx(95.05));
  CHECK(bands[0].mean == doctest::Approx(50.5));

  const std::vector<std::vector<double>> single = {{1, 2, 3}};
  CHECK_THROWS_AS(percentile_bands(single), std::invalid_argument);
  const std::vector<std::vector<double>> ragged = {{1, 2}, {1}};
  CHECK_THROWS_AS(percentile_bands(ragged), std::invalid_argument);
}

TEST_CASE("tail mean uses the last ten steps") {
  std::vector<double> s(60);
  std::iota(s.begin(), s.end(), 1.0);
  CHECK(tail_mean(s) == doctest::Approx(55.5));
  CHECK(tail_mean(std::vector<double>{2, 4}) == doctest::Approx(3.0));
}

TEST_CASE("metric vocabulary") {
  const char* expected[] = {"entropy_step",  "entropy_cum",   "gini_step",
                            "gini_cum",      "epistemic_mean", "supply_spread",
                            "indiv_entropy_mean_highcc", "indiv_entropy_mean_lowcc"};
  std::size_t i = 0;
  for (Metric m : kAllMetrics) CHECK(metric_name(m) == expected[i++]);
}

TEST_CASE("recorded series match direct computation") {
  const auto c = preset("kpop");
  Rng rng(50);
  auto w = init_world(c, rng);
  MetricSeries series;
  for (int t = 0; t < 5; ++t) {
    const auto out = step(w, c, rng);
    record_step(series, w, out.mean_epistemic, 1);
  }
  CHECK(series.steps() == 5);
  CHECK(series.entropy_cum.back() == doctest::Approx(oracle::entropy(as_double(w.plays))));
  CHECK(series.entropy_step.back() == doctest::Approx(oracle::entropy(as_double(w.step_plays))));
  CHECK(series.gini_cum.back() == doctest::Approx(oracle::gini(as_double(w.plays))));
  CHECK(series.gini_step.back() == doctest::Approx(oracle::gini(as_double(w.step_plays))));
  CHECK(series.supply_spread.back() == supply_spread(w.sources).value);
  CHECK(series.get(Metric::IndivEntropyHighCC).empty());
  CHECK(series.final_individual_entropy.size() == 200);
  CHECK(series.final_individual_entropy[3] == individual_entropy(w.exposure_row(3)).value);
}
