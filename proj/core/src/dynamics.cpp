#include "tastesim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tastesim {

std::size_t pool_length(double alpha, const SimParams& params) {
  const double raw =
      static_cast<double>(params.pool_size) * (1.0 - params.pool_shrink * alpha);
  const long rounded = std::lround(raw);
  if (rounded < 0 || static_cast<std::size_t>(rounded) < params.songs_per_step) {
    throw ConfigError("pool length " + std::to_string(rounded) + " at alpha " +
                      std::to_string(alpha) + " is below songs_per_step " +
                      std::to_string(params.songs_per_step));
  }
  return static_cast<std::size_t>(rounded);
}

std::size_t popular_slots(double alpha, std::size_t pool_len) {
  const long n = std::lround(alpha * static_cast<double>(pool_len));
  return std::min(static_cast<std::size_t>(std::max(n, 0L)), pool_len);
}

std::vector<std::size_t> popularity_ranking(std::span<const std::uint64_t> plays, Rng& rng) {
  std::vector<std::size_t> order(plays.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  std::stable_sort(order.begin(), order.end(),
                   [&plays](std::size_t a, std::size_t b) { return plays[a] > plays[b]; });
  return order;
}

VisibilityPool build_pool(const ListenerAgent& agent, const WorldState& world,
                          const ScenarioConfig& config, std::span<const std::size_t> ranking,
                          Rng& rng) {
  const SimParams& p = config.params;
  const std::size_t len = pool_length(config.alpha, p);
  const std::size_t n_pop = popular_slots(config.alpha, len);

  VisibilityPool pool;
  pool.agent_id = agent.id;
  pool.n_popular_slots = n_pop;
  pool.n_similarity_slots = len - n_pop;
  pool.song_ids.reserve(len);

  std::vector<char> taken(world.n_songs(), 0);
  for (std::size_t r = 0; r < n_pop; ++r) {
    pool.song_ids.push_back(ranking[r]);
    taken[ranking[r]] = 1;
  }
  if (pool.n_similarity_slots == 0) return pool;

  std::vector<std::size_t> candidates;
  std::vector<double> affinity;
  candidates.reserve(world.n_songs() - n_pop);
  affinity.reserve(world.n_songs() - n_pop);
  double z = 0.0;
  for (const Song& song : world.songs) {
    if (taken[song.id]) continue;
    const double a = std::exp(-distance(agent.model_center, song.position) / p.similarity_tau);
    candidates.push_back(song.id);
    affinity.push_back(a);
    z += a;
  }
  const double uniform_mass = p.discovery_eps / static_cast<double>(candidates.size());
  std::vector<double> log_weight(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    log_weight[c] = std::log((1.0 - p.discovery_eps) * affinity[c] / z + uniform_mass);
  }
  for (std::size_t c : gumbel_top_k(log_weight, pool.n_similarity_slots, rng)) {
    pool.song_ids.push_back(candidates[c]);
  }
  return pool;
}

VisibilityPool build_pool(const ListenerAgent& agent, const WorldState& world,
                          const ScenarioConfig& config, Rng& rng) {
  const auto ranking = popularity_ranking(world.plays, rng);
  return build_pool(agent, world, config, ranking, rng);
}

double effective_surprisal(const ListenerAgent& agent, const Song& song,
                           std::uint64_t exposure_count, const SimParams& params) {
  return distance(agent.model_center, song.position) /
         (1.0 + params.lambda * static_cast<double>(exposure_count));
}

double pragmatic_value(double eff_surprisal, const ListenerAgent& agent) {
  const double d = eff_surprisal - agent.mu_c;
  return -(d * d) / (2.0 * agent.sigma_c * agent.sigma_c);
}

double epistemic_value(std::uint64_t exposure_count, const SimParams& params) {
  return 1.0 / (1.0 + params.beta * static_cast<double>(exposure_count));
}

UtilityBreakdown utility(const ListenerAgent& agent, const Song& song,
                         std::uint64_t exposure_count, std::uint64_t song_plays,
                         const SimParams& params) {
  UtilityBreakdown u;
  u.effective_surprisal = effective_surprisal(agent, song, exposure_count, params);
  u.pragmatic = pragmatic_value(u.effective_surprisal, agent);
  u.epistemic = epistemic_value(exposure_count, params);
  u.social = params.omega * std::log1p(static_cast<double>(song_plays));
  u.total = params.gamma * (u.pragmatic + u.epistemic) + u.social;
  return u;
}

UtilityBreakdown utility(const ListenerAgent& agent, const Song& song, const WorldState& world,
                         const SimParams& params) {
  return utility(agent, song, world.exposure_at(agent.id, song.id), world.plays[song.id],
                 params);
}

std::vector<std::size_t> gumbel_top_k(std::span<const double> scores, std::size_t k, Rng& rng) {
  k = std::min(k, scores.size());
  // Scores are shifted by their max so keys stay well scaled; the argmax
  // order (and so the law) is unchanged.
  const double shift = scores.empty() ? 0.0 : *std::max_element(scores.begin(), scores.end());
  std::vector<std::pair<double, std::size_t>> keyed(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    keyed[i] = {scores[i] - shift + rng.gumbel(), i};
  }
  std::partial_sort(keyed.begin(), keyed.begin() + static_cast<std::ptrdiff_t>(k), keyed.end(),
                    [](const auto& a, const auto& b) {
                      return a.first > b.first || (a.first == b.first && a.second < b.second);
                    });
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = keyed[i].second;
  return out;
}

std::vector<std::size_t> select_songs(const VisibilityPool& pool,
                                      std::span<const double> utilities,
                                      const SimParams& params, Rng& rng) {
  std::vector<std::size_t> picked;
  picked.reserve(params.songs_per_step);
  for (std::size_t slot : gumbel_top_k(utilities, params.songs_per_step, rng)) {
    picked.push_back(pool.song_ids[slot]);
  }
  return picked;
}

std::vector<std::size_t> select_songs(const ListenerAgent& agent, const VisibilityPool& pool,
                                      const WorldState& world, const SimParams& params,
                                      Rng& rng) {
  std::vector<double> u(pool.song_ids.size());
  for (std::size_t s = 0; s < u.size(); ++s) {
    u[s] = utility(agent, world.songs[pool.song_ids[s]], world, params).total;
  }
  return select_songs(pool, u, params, rng);
}

void apply_selections(WorldState& world, std::size_t agent_id,
                      std::span<const std::size_t> selected) {
  auto row = world.exposure_row(agent_id);
  for (std::size_t j : selected) {
    ++row[j];
    ++world.plays[j];
    ++world.step_plays[j];
  }
}

std::optional<Vec2> popularity_centroid(const WorldState& world) {
  const std::uint64_t total =
      std::accumulate(world.plays.begin(), world.plays.end(), std::uint64_t{0});
  if (total == 0) return std::nullopt;
  Vec2 c;
  for (const Song& song : world.songs) {
    const double share = static_cast<double>(world.plays[song.id]) / static_cast<double>(total);
    c = c + share * song.position;
  }
  return c;
}

void songwriter_drift(WorldState& world, const ScenarioConfig& config, Rng& rng) {
  const auto centroid_opt = popularity_centroid(world);
  if (!centroid_opt) return;
  const Vec2 centroid = *centroid_opt;
  const SimParams& p = config.params;
  std::vector<char> fired(world.sources.size(), 0);
  for (Source& source : world.sources) {
    if (rng.uniform() < config.conformity) {
      fired[source.id] = 1;
      source.center = source.center + p.drift_rate_source * (centroid - source.center);
    }
  }
  for (Song& song : world.songs) {
    if (fired[song.source_id]) {
      song.position = song.position + p.drift_rate_song * (centroid - song.position);
    }
  }
}

StepOutcome step(WorldState& world, const ScenarioConfig& config, Rng& rng) {
  const SimParams& p = config.params;
  std::fill(world.step_plays.begin(), world.step_plays.end(), 0);

  const auto ranking = popularity_ranking(world.plays, rng);
  StepOutcome out;
  out.selections.resize(world.n_agents());
  double epistemic_sum = 0.0;
  std::size_t n_pairs = 0;
  std::vector<double> u;
  for (const ListenerAgent& agent : world.agents) {
    const VisibilityPool pool = build_pool(agent, world, config, ranking, rng);
    u.resize(pool.song_ids.size());
    for (std::size_t s = 0; s < u.size(); ++s) {
      u[s] = utility(agent, world.songs[pool.song_ids[s]], world, p).total;
    }
    out.selections[agent.id] = select_songs(pool, u, p, rng);
    for (std::size_t j : out.selections[agent.id]) {
      epistemic_sum += epistemic_value(world.exposure_at(agent.id, j), p);
      ++n_pairs;
    }
  }
  for (const ListenerAgent& agent : world.agents) {
    apply_selections(world, agent.id, out.selections[agent.id]);
  }
  songwriter_drift(world, config, rng);
  ++world.t;
  out.mean_epistemic = n_pairs ? epistemic_sum / static_cast<double>(n_pairs) : 0.0;
  return out;
}

std::vector<double> forced_exposure_pragmatic(const ListenerAgent& agent, const Song& song,
                                              std::size_t horizon, const SimParams& params) {
  std::vector<double> c(horizon);
  for (std::size_t e = 0; e < horizon; ++e) {
    c[e] = pragmatic_value(effective_surprisal(agent, song, e, params), agent);
  }
  return c;
}

}  // namespace tastesim
