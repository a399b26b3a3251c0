#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tastesim/rng.hpp"

namespace tastesim {

/// Raised for any parameter combination the simulator refuses to run.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Interval {
  double lo;
  double hi;
  double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }
  bool contains(double v) const { return v >= lo && v <= hi; }
  friend bool operator==(Interval, Interval) = default;
};

/// Parameters shared by every institutional scenario.
struct SimParams {
  std::size_t n_agents = 200;
  std::size_t n_songs = 80;
  std::size_t n_steps = 60;
  double gamma = 8.0;
  double beta = 0.3;
  double lambda = 0.5;
  double omega = 0.45;
  std::size_t pool_size = 18;
  double pool_shrink = 0.45;
  std::size_t songs_per_step = 5;

  // Setup distributions and drift rates.
  static constexpr std::size_t feature_dim = 2;
  Interval feature_bounds{0.0, 4.0};
  Interval source_center_bounds{0.5, 3.5};
  double song_noise_sd = 0.3;
  double mu_c_sd = 0.2;
  double sigma_c_sd = 0.15;
  double pref_floor = 0.3;
  double drift_rate_source = 0.12;
  double drift_rate_song = 0.06;

  // Similarity slots of the visibility pool: weight exp(-d / tau) mixed with
  // a uniform discovery mass eps over the remaining candidates.
  double similarity_tau = 1.0;
  double discovery_eps = 0.05;

  friend bool operator==(const SimParams&, const SimParams&) = default;
};

/// Preference distribution for a block of consecutive agents.
struct PreferenceGroup {
  std::string label;
  double mu_c_bar = 1.0;
  double sigma_c_bar = 1.0;
  std::size_t count = 0;

  friend bool operator==(const PreferenceGroup&, const PreferenceGroup&) = default;
};

struct ScenarioConfig {
  std::string name;
  std::size_t k_sources = 8;
  double conformity = 0.1;
  double alpha = 0.65;
  double mu_c_bar = 1.0;
  double sigma_c_bar = 1.0;
  SimParams params;
  // Empty: every agent draws around (mu_c_bar, sigma_c_bar). Otherwise the
  // groups partition the agents in index order and their counts must sum to
  // params.n_agents.
  std::vector<PreferenceGroup> groups;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws ConfigError describing the first violated constraint.
void validate(const ScenarioConfig& config);

inline constexpr std::string_view kPresetNames[] = {"sanremo", "brazil", "kpop", "uk"};

/// One of the four institutional presets. Throws ConfigError listing the
/// valid names when `name` is unknown.
ScenarioConfig preset(std::string_view name);

/// Human-readable label used in tables ("Sanremo", "K-pop", ...). Falls back
/// to the raw name for non-preset scenarios.
std::string display_name(std::string_view scenario_name);

/// Parses `key = value` lines ('#' starts a comment). A `preset` key, if
/// present, seeds the config before the remaining keys are applied in file
/// order. Unknown keys and malformed values raise ConfigError.
ScenarioConfig parse_scenario_text(std::string_view text);
ScenarioConfig load_scenario_file(const std::filesystem::path& path);

/// Inverse of parse_scenario_text for single-group scenarios.
std::string format_scenario_text(const ScenarioConfig& config);

struct Song {
  std::size_t id = 0;
  std::size_t source_id = 0;
  Vec2 position;
};

struct Source {
  std::size_t id = 0;
  Vec2 center;
};

struct ListenerAgent {
  std::size_t id = 0;
  Vec2 model_center;
  double mu_c = 1.0;
  double sigma_c = 1.0;
  std::size_t group = 0;
};

struct WorldState {
  std::size_t t = 0;
  std::vector<Song> songs;
  std::vector<Source> sources;
  std::vector<ListenerAgent> agents;
  // Row-major n_agents x n_songs.
  std::vector<std::uint32_t> exposure;
  std::vector<std::uint64_t> plays;
  std::vector<std::uint64_t> step_plays;

  std::size_t n_agents() const { return agents.size(); }
  std::size_t n_songs() const { return songs.size(); }

  std::uint32_t exposure_at(std::size_t agent, std::size_t song) const {
    return exposure[agent * songs.size() + song];
  }
  std::span<const std::uint32_t> exposure_row(std::size_t agent) const {
    return {exposure.data() + agent * songs.size(), songs.size()};
  }
  std::span<std::uint32_t> exposure_row(std::size_t agent) {
    return {exposure.data() + agent * songs.size(), songs.size()};
  }

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

inline bool operator==(const Song& a, const Song& b) {
  return a.id == b.id && a.source_id == b.source_id && a.position == b.position;
}
inline bool operator==(const Source& a, const Source& b) {
  return a.id == b.id && a.center == b.center;
}
inline bool operator==(const ListenerAgent& a, const ListenerAgent& b) {
  return a.id == b.id && a.model_center == b.model_center && a.mu_c == b.mu_c &&
         a.sigma_c == b.sigma_c && a.group == b.group;
}

/// Builds the t = 0 world. Draw order: K source centers (x then y), then one
/// Gaussian offset per song coordinate, then every agent center, then
/// (mu_c, sigma_c) per agent in index order.
WorldState init_world(const ScenarioConfig& config, Rng& rng);

}  // namespace tastesim
