#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "tastesim/dynamics.hpp"
#include "tastesim/metrics.hpp"

using namespace tastesim;

namespace {

// Two sources, four songs, one agent; positions set by hand.
WorldState tiny_world() {
  WorldState w;
  w.sources = {{0, {0.0, 0.0}}, {1, {2.0, 2.0}}};
  w.songs = {{0, 0, {0.0, 0.0}}, {1, 1, {1.0, 1.0}}, {2, 0, {0.0, 0.0}}, {3, 1, {1.0, 1.0}}};
  w.agents = {{0, {0.0, 0.0}, 1.0, 1.0, 0}};
  w.exposure.assign(4, 0);
  w.plays.assign(4, 0);
  w.step_plays.assign(4, 0);
  return w;
}

ListenerAgent agent_at(Vec2 center, double mu_c = 1.0, double sigma_c = 1.0) {
  return {0, center, mu_c, sigma_c, 0};
}

}  // namespace

TEST_CASE("pool length follows the curation shrink") {
  const SimParams p;
  CHECK(pool_length(0.0, p) == 18);
  CHECK(pool_length(0.95, p) == 10);
  CHECK(pool_length(1.0, p) == 10);
  CHECK(pool_length(0.3, p) == 16);  // 15.57
  CHECK(pool_length(0.65, p) == 13);  // 12.735
  SimParams tight;
  tight.pool_size = 8;
  tight.pool_shrink = 0.9;
  CHECK_THROWS_AS(pool_length(1.0, tight), ConfigError);
  CHECK(popular_slots(0.0, 18) == 0);
  CHECK(popular_slots(1.0, 10) == 10);
  CHECK(popular_slots(0.95, 10) == 10);  // 9.5 rounds away from zero
  CHECK(popular_slots(0.3, 16) == 5);    // 4.8
}

TEST_CASE("pools have the right size, no duplicates and popular songs first") {
  for (std::string_view name : kPresetNames) {
    const auto c = preset(name);
    Rng rng(9);
    auto w = init_world(c, rng);
    for (int t = 0; t < 3; ++t) step(w, c, rng);
    const auto ranking = popularity_ranking(w.plays, rng);
    const std::size_t len = pool_length(c.alpha, c.params);
    for (const auto& agent : w.agents) {
      const auto pool = build_pool(agent, w, c, ranking, rng);
      REQUIRE(pool.song_ids.size() == len);
      CHECK(pool.n_popular_slots + pool.n_similarity_slots == len);
      CHECK(pool.n_popular_slots == popular_slots(c.alpha, len));
      std::set<std::size_t> unique(pool.song_ids.begin(), pool.song_ids.end());
      CHECK(unique.size() == len);
      CHECK(*unique.rbegin() < 80);
      for (std::size_t r = 0; r < pool.n_popular_slots; ++r) CHECK(pool.song_ids[r] == ranking[r]);
    }
  }
}

TEST_CASE("popularity ranking orders by plays and shuffles ties") {
  const std::vector<std::uint64_t> plays = {5, 9, 5, 0, 9, 1};
  std::map<std::size_t, int> first;
  for (std::uint64_t s = 0; s < 400; ++s) {
    Rng rng(s);
    const auto order = popularity_ranking(plays, rng);
    for (std::size_t i = 1; i < order.size(); ++i) CHECK(plays[order[i - 1]] >= plays[order[i]]);
    ++first[order[0]];
  }
  CHECK(first.size() == 2);
  CHECK(first[1] > 150);
  CHECK(first[4] > 150);
}

TEST_CASE("at t = 0 popularity slots are a uniformly random subset") {
  auto c = preset("kpop");
  c.alpha = 1.0;
  Rng rng(3);
  const auto w = init_world(c, rng);
  std::vector<int> hits(80, 0);
  const int draws = 8000;
  for (int d = 0; d < draws; ++d) {
    const auto pool = build_pool(w.agents[0], w, c, rng);
    CHECK(pool.n_similarity_slots == 0);
    for (std::size_t id : pool.song_ids) ++hits[id];
  }
  // Each song is expected in 10/80 of the pools.
  const double expected = draws * 10.0 / 80.0;
  for (int h : hits) CHECK(std::fabs(h - expected) < 5.0 * std::sqrt(expected));
}

TEST_CASE("alpha = 0 gives a pure similarity pool of 18") {
  auto c = preset("brazil");
  c.alpha = 0.0;
  Rng rng(4);
  const auto w = init_world(c, rng);
  const auto pool = build_pool(w.agents[0], w, c, rng);
  CHECK(pool.n_popular_slots == 0);
  CHECK(pool.n_similarity_slots == 18);
  CHECK(pool.song_ids.size() == 18);
}

TEST_CASE("discovery mass reaches every song within 10000 pools") {
  auto c = preset("sanremo");
  c.alpha = 0.0;
  Rng rng(17);
  const auto w = init_world(c, rng);
  // The agent farthest from the cluster sees the most skewed weights.
  std::size_t far = 0;
  double far_d = -1.0;
  for (const auto& a : w.agents) {
    const double d = distance(a.model_center, w.songs[0].position);
    if (d > far_d) {
      far_d = d;
      far = a.id;
    }
  }
  std::vector<int> seen(80, 0);
  for (int d = 0; d < 10000; ++d) {
    for (std::size_t id : build_pool(w.agents[far], w, c, rng).song_ids) ++seen[id];
  }
  CHECK(std::all_of(seen.begin(), seen.end(), [](int n) { return n > 0; }));
}

TEST_CASE("similarity sampling favours nearby songs") {
  auto c = preset("brazil");
  c.alpha = 0.0;
  c.params.discovery_eps = 0.0;
  Rng rng(5);
  const auto w = init_world(c, rng);
  const auto& agent = w.agents[0];
  std::vector<std::size_t> by_dist(80);
  std::iota(by_dist.begin(), by_dist.end(), std::size_t{0});
  std::sort(by_dist.begin(), by_dist.end(), [&](std::size_t a, std::size_t b) {
    return distance(agent.model_center, w.songs[a].position) <
           distance(agent.model_center, w.songs[b].position);
  });
  std::vector<int> seen(80, 0);
  for (int d = 0; d < 2000; ++d) {
    for (std::size_t id : build_pool(agent, w, c, rng).song_ids) ++seen[id];
  }
  CHECK(seen[by_dist.front()] > seen[by_dist.back()]);
}

TEST_CASE("effective surprisal") {
  const SimParams p;
  const Song s{0, 0, {3.0, 4.0}};
  CHECK(effective_surprisal(agent_at({3.0, 4.0}), s, 7, p) == 0.0);
  const Song two{0, 0, {2.0, 0.0}};
  CHECK(effective_surprisal(agent_at({0.0, 0.0}), two, 0, p) == doctest::Approx(2.0));
  CHECK(effective_surprisal(agent_at({0.0, 0.0}), two, 4, p) == doctest::Approx(2.0 / 3.0));
  double prev = effective_surprisal(agent_at({0.0, 0.0}), s, 0, p);
  for (std::uint64_t e = 1; e < 50; ++e) {
    const double cur = effective_surprisal(agent_at({0.0, 0.0}), s, e, p);
    CHECK(cur <= prev);
    prev = cur;
  }
}

TEST_CASE("pragmatic value is a Gaussian bump around the sweet spot") {
  const auto a = agent_at({0, 0}, 1.4, 0.5);
  CHECK(pragmatic_value(1.4, a) == 0.0);
  CHECK(pragmatic_value(1.9, a) == doctest::Approx(-0.5));
  CHECK(pragmatic_value(0.9, a) == doctest::Approx(-0.5));
  for (double i = 0.0; i < 5.0; i += 0.137) CHECK(pragmatic_value(i, a) <= 0.0);
}

TEST_CASE("epistemic value decays with exposure") {
  const SimParams p;
  CHECK(epistemic_value(0, p) == 1.0);
  CHECK(epistemic_value(10, p) == doctest::Approx(0.25));
  CHECK(epistemic_value(1'000'000'000, p) < 1e-8);
  for (std::uint64_t e = 0; e < 100; ++e) {
    CHECK(epistemic_value(e + 1, p) < epistemic_value(e, p));
    CHECK(epistemic_value(e, p) > 0.0);
  }
}

TEST_CASE("utility composes the three terms") {
  const SimParams p;
  const Song song{0, 0, {1.0, 0.0}};
  const auto agent = agent_at({0.0, 0.0}, 1.0, 1.0);
  const auto u = utility(agent, song, 0, 0, p);
  CHECK(u.total == doctest::Approx(8.0));
  CHECK(u.social == 0.0);

  // n_j = e - 1 is not an integer; check the social term through ln(1 + n).
  const auto u3 = utility(agent, song, 0, 3, p);
  CHECK(u3.social == doctest::Approx(0.45 * std::log(4.0)));
  CHECK(u3.total == doctest::Approx(8.0 + 0.45 * std::log(4.0)));

  for (std::uint64_t e : {0u, 1u, 5u}) {
    for (std::uint64_t n : {0u, 2u, 100u}) {
      const auto b = utility(agent_at({0.3, 2.0}, 1.2, 0.8), song, e, n, p);
      CHECK(b.total == p.gamma * (b.pragmatic + b.epistemic) + b.social);
    }
  }
}

TEST_CASE("utility reads exposure and plays from the world") {
  auto w = tiny_world();
  w.exposure[1] = 3;
  w.plays[1] = 10;
  const SimParams p;
  const auto a = utility(w.agents[0], w.songs[1], w, p);
  const auto b = utility(w.agents[0], w.songs[1], 3, 10, p);
  CHECK(a.total == b.total);
}

TEST_CASE("selection from a pool of exactly five returns all five") {
  VisibilityPool pool;
  pool.song_ids = {11, 3, 42, 7, 19};
  const std::vector<double> u = {50.0, -30.0, 0.0, 1e3, -1e3};
  Rng rng(1);
  auto sel = select_songs(pool, u, SimParams{}, rng);
  std::sort(sel.begin(), sel.end());
  CHECK(sel == std::vector<std::size_t>{3, 7, 11, 19, 42});
}

TEST_CASE("selection law matches the Plackett-Luce closed form") {
  const std::vector<double> u = {2.0, 1.0, 0.0, 0.0};
  const auto law = oracle::ordered_pair_law(u);
  std::map<std::pair<std::size_t, std::size_t>, int> counts;
  Rng rng(2025);
  const int draws = 200'000;
  for (int d = 0; d < draws; ++d) {
    const auto pick = gumbel_top_k(u, 2, rng);
    ++counts[{pick[0], pick[1]}];
  }
  double total = 0.0;
  for (const auto& [pair, p] : law) {
    total += p;
    CHECK(std::fabs(counts[pair] / static_cast<double>(draws) - p) < 0.01);
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("selection is invariant to a constant shift of utilities") {
  const std::vector<double> u = {0.3, -1.2, 2.0, 0.0, 0.7, 1.1};
  std::vector<double> shifted = u;
  for (double& v : shifted) v += 1234.5;
  // Identical Gumbel noise on max-shifted scores yields identical draws.
  Rng a(8), b(8);
  for (int d = 0; d < 1000; ++d) CHECK(gumbel_top_k(u, 3, a) == gumbel_top_k(shifted, 3, b));
}

TEST_CASE("selection handles extreme utilities without overflow") {
  const std::vector<double> u = {1e6, 1e6 - 1.0, -1e6, 0.0, 5e5};
  Rng rng(6);
  const auto pick = gumbel_top_k(u, 3, rng);
  CHECK(pick.size() == 3);
  CHECK(std::set<std::size_t>(pick.begin(), pick.end()).size() == 3);
}

TEST_CASE("apply_selections touches only the chosen entries") {
  auto c = preset("uk");
  Rng rng(2);
  auto w = init_world(c, rng);
  const auto before = w;
  const std::vector<std::size_t> sel = {3, 7, 9, 11, 14};
  apply_selections(w, 0, sel);
  for (std::size_t j = 0; j < 80; ++j) {
    const bool chosen = std::find(sel.begin(), sel.end(), j) != sel.end();
    CHECK(w.exposure_at(0, j) == before.exposure_at(0, j) + (chosen ? 1u : 0u));
    CHECK(w.plays[j] == before.plays[j] + (chosen ? 1u : 0u));
    CHECK(w.step_plays[j] == before.step_plays[j] + (chosen ? 1u : 0u));
  }
  for (std::size_t i = 1; i < w.n_agents(); ++i) {
    for (std::size_t j = 0; j < 80; ++j) CHECK(w.exposure_at(i, j) == 0);
  }
  CHECK(w.songs == before.songs);
  CHECK(w.sources == before.sources);
}

TEST_CASE("plays do not depend on the order agents are applied") {
  auto c = preset("kpop");
  Rng rng(12);
  auto w = init_world(c, rng);
  auto forward = w;
  const auto out = step(forward, c, rng);
  auto backward = w;
  for (std::size_t i = w.n_agents(); i-- > 0;) apply_selections(backward, i, out.selections[i]);
  auto in_order = w;
  for (std::size_t i = 0; i < w.n_agents(); ++i) apply_selections(in_order, i, out.selections[i]);
  CHECK(backward.plays == in_order.plays);
  CHECK(backward.exposure == in_order.exposure);
}

TEST_CASE("drift moves sources 12% and their songs 6% toward the centroid") {
  auto w = tiny_world();
  // Centroid (1, 1): only songs at (1, 1) have plays.
  w.plays = {0, 4, 0, 6};
  ScenarioConfig c;
  c.k_sources = 2;
  c.conformity = 1.0;
  Rng rng(1);
  songwriter_drift(w, c, rng);
  CHECK(w.sources[0].center.x == doctest::Approx(0.12));
  CHECK(w.sources[0].center.y == doctest::Approx(0.12));
  CHECK(w.songs[0].position.x == doctest::Approx(0.06));
  CHECK(w.songs[0].position.y == doctest::Approx(0.06));
  CHECK(w.songs[2].position.x == doctest::Approx(0.06));
  // Source 1 at (2,2) contracts toward (1,1) by exactly 0.88.
  CHECK(distance(w.sources[1].center, {1.0, 1.0}) ==
        doctest::Approx(0.88 * distance({2.0, 2.0}, {1.0, 1.0})));
  CHECK(w.songs[1].position == Vec2{1.0, 1.0});
}

TEST_CASE("zero conformity leaves the world unchanged") {
  auto c = preset("brazil");
  c.conformity = 0.0;
  Rng rng(4);
  auto w = init_world(c, rng);
  step(w, c, rng);
  const auto before = w;
  songwriter_drift(w, c, rng);
  CHECK(w == before);
}

TEST_CASE("drift is skipped without plays and consumes no draws") {
  auto c = preset("sanremo");
  Rng rng(4);
  auto w = init_world(c, rng);
  const auto before = w;
  Rng a(99), b(99);
  songwriter_drift(w, c, a);
  CHECK(w == before);
  CHECK(!popularity_centroid(w).has_value());
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("drift contraction is exactly 0.88 and stays in bounds") {
  auto c = preset("sanremo");
  c.conformity = 1.0;
  Rng rng(31);
  auto w = init_world(c, rng);
  step(w, c, rng);
  const Vec2 centroid = *popularity_centroid(w);
  const auto before = w;
  songwriter_drift(w, c, rng);
  for (std::size_t k = 0; k < w.sources.size(); ++k) {
    CHECK(distance(w.sources[k].center, centroid) ==
          doctest::Approx(0.88 * distance(before.sources[k].center, centroid)).epsilon(1e-12));
  }
  for (std::size_t j = 0; j < w.songs.size(); ++j) {
    CHECK(distance(w.songs[j].position, centroid) ==
          doctest::Approx(0.94 * distance(before.songs[j].position, centroid)).epsilon(1e-12));
    CHECK(c.params.feature_bounds.contains(w.songs[j].position.x));
    CHECK(c.params.feature_bounds.contains(w.songs[j].position.y));
  }
}

TEST_CASE("each step conserves plays and advances time") {
  for (std::string_view name : kPresetNames) {
    const auto c = preset(name);
    Rng rng(77);
    auto w = init_world(c, rng);
    for (std::size_t t = 1; t <= 12; ++t) {
      const auto out = step(w, c, rng);
      CHECK(w.t == t);
      CHECK(std::accumulate(w.step_plays.begin(), w.step_plays.end(), std::uint64_t{0}) == 1000);
      CHECK(std::accumulate(w.plays.begin(), w.plays.end(), std::uint64_t{0}) == 1000 * t);
      std::uint64_t exposure_total = 0;
      for (auto e : w.exposure) exposure_total += e;
      CHECK(exposure_total == 1000 * t);
      for (const auto& sel : out.selections) {
        CHECK(sel.size() == 5);
        CHECK(std::set<std::size_t>(sel.begin(), sel.end()).size() == 5);
      }
    }
  }
}

TEST_CASE("same seed gives identical plays at every step") {
  const auto c = preset("uk");
  Rng a(5), b(5);
  auto wa = init_world(c, a);
  auto wb = init_world(c, b);
  for (int t = 0; t < 20; ++t) {
    step(wa, c, a);
    step(wb, c, b);
    CHECK(wa.plays == wb.plays);
  }
  CHECK(wa == wb);
}

TEST_CASE("step reports the mean epistemic value of its selections") {
  const auto c = preset("kpop");
  Rng rng(15);
  auto w = init_world(c, rng);
  CHECK(step(w, c, rng).mean_epistemic == 1.0);
  const auto before = w;
  const auto out = step(w, c, rng);
  CHECK(out.mean_epistemic == doctest::Approx(mean_epistemic(before, out.selections, c.params)));
}

TEST_CASE("Sanremo supply collapses by the final step") {
  const auto c = preset("sanremo");
  Rng rng(123);
  auto w = init_world(c, rng);
  for (std::size_t t = 0; t < c.params.n_steps; ++t) step(w, c, rng);
  CHECK(supply_spread(w.sources).value < 0.05);
}

TEST_CASE("forced exposure yields the reduced-form trajectories") {
  const SimParams p;
  const Song song{0, 0, {2.5, 0.0}};
  // Distance 2.5 above the sweet spot 1.0: the attenuated distance passes
  // through mu_c, so C rises to a peak and falls.
  const auto far = forced_exposure_pragmatic(agent_at({0, 0}, 1.0, 0.5), song, 30, p);
  const auto peak = std::max_element(far.begin(), far.end()) - far.begin();
  CHECK(peak > 0);
  CHECK(peak < 29);
  for (long e = 0; e < peak; ++e) CHECK(far[e] < far[e + 1]);
  for (long e = peak; e < 29; ++e) CHECK(far[e] > far[e + 1]);

  // Distance slightly below mu_c: every exposure moves further away.
  const auto near = forced_exposure_pragmatic(agent_at({0, 0}, 2.6, 0.5), song, 30, p);
  for (std::size_t e = 0; e + 1 < near.size(); ++e) CHECK(near[e] > near[e + 1]);
}
