#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tastesim/model.hpp"
#include "tastesim/rng.hpp"

namespace tastesim {

/// Songs visible to one agent in one step.
struct VisibilityPool {
  std::size_t agent_id = 0;
  std::vector<std::size_t> song_ids;  // popularity slots first
  std::size_t n_popular_slots = 0;
  std::size_t n_similarity_slots = 0;
};

struct UtilityBreakdown {
  double pragmatic = 0.0;
  double epistemic = 0.0;
  double social = 0.0;
  double total = 0.0;
  double effective_surprisal = 0.0;
};

/// round(pool_size * (1 - pool_shrink * alpha)), half away from zero.
/// Throws ConfigError when the result is smaller than songs_per_step.
std::size_t pool_length(double alpha, const SimParams& params);

/// Number of popularity-ranked slots in a pool of length `pool_len`.
std::size_t popular_slots(double alpha, std::size_t pool_len);

/// Song ids ordered by descending play count; ties are ordered by a seeded
/// shuffle (one index draw per song).
std::vector<std::size_t> popularity_ranking(std::span<const std::uint64_t> plays, Rng& rng);

/// Builds an agent's pool from a shared popularity ranking. The remaining
/// slots are sampled without replacement with weight
///   (1 - eps) * exp(-d / tau) / Z + eps / |candidates|
/// via Gumbel-top-k (one Gumbel per candidate, in song-id order).
VisibilityPool build_pool(const ListenerAgent& agent, const WorldState& world,
                          const ScenarioConfig& config, std::span<const std::size_t> ranking,
                          Rng& rng);

/// Convenience overload that ranks the world's current plays first.
VisibilityPool build_pool(const ListenerAgent& agent, const WorldState& world,
                          const ScenarioConfig& config, Rng& rng);

/// Distance attenuated by familiarity: d / (1 + lambda * e).
double effective_surprisal(const ListenerAgent& agent, const Song& song,
                           std::uint64_t exposure_count, const SimParams& params);

/// Gaussian preference around the agent's sweet spot; always <= 0.
double pragmatic_value(double eff_surprisal, const ListenerAgent& agent);

/// 1 / (1 + beta * e).
double epistemic_value(std::uint64_t exposure_count, const SimParams& params);

UtilityBreakdown utility(const ListenerAgent& agent, const Song& song,
                         std::uint64_t exposure_count, std::uint64_t song_plays,
                         const SimParams& params);

/// Uses the world's own exposure and play counts.
UtilityBreakdown utility(const ListenerAgent& agent, const Song& song, const WorldState& world,
                         const SimParams& params);

/// Draws k distinct indices with the law of successive renormalized softmax
/// sampling over `scores` (Plackett-Luce). Implemented as Gumbel-top-k: one
/// Gumbel draw per score, in index order. Returned in draw order.
std::vector<std::size_t> gumbel_top_k(std::span<const double> scores, std::size_t k, Rng& rng);

/// songs_per_step distinct ids from the pool, sampled by Pr(j) ~ exp(U_i(j))
/// without replacement. `utilities` is aligned with pool.song_ids.
std::vector<std::size_t> select_songs(const VisibilityPool& pool,
                                      std::span<const double> utilities,
                                      const SimParams& params, Rng& rng);

/// Evaluates utilities against the world's play counts and selects.
std::vector<std::size_t> select_songs(const ListenerAgent& agent, const VisibilityPool& pool,
                                      const WorldState& world, const SimParams& params,
                                      Rng& rng);

/// e_ij, n_j and step_plays_j each rise by one for every selected song.
void apply_selections(WorldState& world, std::size_t agent_id,
                      std::span<const std::size_t> selected);

/// Popularity-weighted centroid of song positions; empty while no song has
/// been played.
std::optional<Vec2> popularity_centroid(const WorldState& world);

/// Per source, with probability `conformity`, pulls the center and that
/// source's songs toward the popularity-weighted centroid. One uniform draw
/// per source. Skipped entirely (no draws) while total plays are zero.
void songwriter_drift(WorldState& world, const ScenarioConfig& config, Rng& rng);

struct StepOutcome {
  // selections[i] are agent i's songs, in draw order.
  std::vector<std::vector<std::size_t>> selections;
  // Mean 1/(1 + beta*e) over all (agent, selected song) pairs, evaluated on
  // the exposure counts before this step's increments.
  double mean_epistemic = 0.0;
};

/// One full step: reset step_plays, rank popularity from the start-of-step
/// snapshot, then for each agent in id order build its pool and select; the
/// selections are applied as one batch, then drift runs and t advances.
StepOutcome step(WorldState& world, const ScenarioConfig& config, Rng& rng);

/// Pragmatic values C(e) for e = 0..horizon-1 of repeated forced exposure of
/// one agent to one song (familiarity-attenuated distance fed to the Gaussian
/// preference).
std::vector<double> forced_exposure_pragmatic(const ListenerAgent& agent, const Song& song,
                                              std::size_t horizon, const SimParams& params);

}  // namespace tastesim
