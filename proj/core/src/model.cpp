#include "tastesim/model.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "tastesim/dynamics.hpp"
#include "tastesim/format.hpp"

namespace tastesim {

namespace {

struct PresetRow {
  std::string_view name;
  std::string_view label;
  std::size_t k_sources;
  double conformity;
  double alpha;
  double mu_c_bar;
  double sigma_c_bar;
};

constexpr PresetRow kPresets[] = {
    {"sanremo", "Sanremo", 3, 0.90, 0.95, 1.0, 0.7},
    {"brazil", "Brazil", 15, 0.02, 0.30, 1.2, 1.2},
    {"kpop", "K-pop", 8, 0.10, 0.65, 1.1, 1.1},
    {"uk", "UK", 12, 0.30, 0.96, 1.0, 1.0},
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end || !std::isfinite(out)) {
    throw ConfigError("invalid number for '" + std::string(key) + "': '" +
                      std::string(value) + "'");
  }
  return out;
}

std::size_t parse_count(std::string_view key, std::string_view value) {
  std::size_t out = 0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("invalid count for '" + std::string(key) + "': '" +
                      std::string(value) + "'");
  }
  return out;
}

using Setter = std::function<void(ScenarioConfig&, std::string_view key, std::string_view value)>;

Setter count_field(std::size_t SimParams::*field) {
  return [field](ScenarioConfig& c, std::string_view k, std::string_view v) {
    c.params.*field = parse_count(k, v);
  };
}
Setter real_field(double SimParams::*field) {
  return [field](ScenarioConfig& c, std::string_view k, std::string_view v) {
    c.params.*field = parse_double(k, v);
  };
}
Setter scenario_real(double ScenarioConfig::*field) {
  return [field](ScenarioConfig& c, std::string_view k, std::string_view v) {
    c.*field = parse_double(k, v);
  };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"name", [](ScenarioConfig& c, std::string_view, std::string_view v) { c.name = v; }},
      {"k_sources",
       [](ScenarioConfig& c, std::string_view k, std::string_view v) {
         c.k_sources = parse_count(k, v);
       }},
      {"conformity", scenario_real(&ScenarioConfig::conformity)},
      {"alpha", scenario_real(&ScenarioConfig::alpha)},
      {"mu_c_bar", scenario_real(&ScenarioConfig::mu_c_bar)},
      {"sigma_c_bar", scenario_real(&ScenarioConfig::sigma_c_bar)},
      {"n_agents", count_field(&SimParams::n_agents)},
      {"n_songs", count_field(&SimParams::n_songs)},
      {"n_steps", count_field(&SimParams::n_steps)},
      {"gamma", real_field(&SimParams::gamma)},
      {"beta", real_field(&SimParams::beta)},
      {"lambda", real_field(&SimParams::lambda)},
      {"omega", real_field(&SimParams::omega)},
      {"pool_size", count_field(&SimParams::pool_size)},
      {"pool_shrink", real_field(&SimParams::pool_shrink)},
      {"songs_per_step", count_field(&SimParams::songs_per_step)},
      {"song_noise_sd", real_field(&SimParams::song_noise_sd)},
      {"mu_c_sd", real_field(&SimParams::mu_c_sd)},
      {"sigma_c_sd", real_field(&SimParams::sigma_c_sd)},
      {"pref_floor", real_field(&SimParams::pref_floor)},
      {"drift_rate_source", real_field(&SimParams::drift_rate_source)},
      {"drift_rate_song", real_field(&SimParams::drift_rate_song)},
      {"similarity_tau", real_field(&SimParams::similarity_tau)},
      {"discovery_eps", real_field(&SimParams::discovery_eps)},
  };
  return table;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void validate(const ScenarioConfig& c) {
  const SimParams& p = c.params;
  require(p.n_agents >= 1 && p.n_songs >= 1 && p.n_steps >= 1 && p.pool_size >= 1 &&
              p.songs_per_step >= 1 && c.k_sources >= 1,
          "all counts must be >= 1");
  require(c.k_sources <= p.n_songs, "k_sources must not exceed n_songs");
  require(c.conformity >= 0.0 && c.conformity <= 1.0, "conformity must lie in [0,1]");
  require(c.alpha >= 0.0 && c.alpha <= 1.0, "alpha must lie in [0,1]");
  for (double rate : {p.gamma, p.beta, p.lambda, p.omega, p.pool_shrink, p.song_noise_sd,
                      p.mu_c_sd, p.sigma_c_sd, p.drift_rate_source, p.drift_rate_song}) {
    require(rate >= 0.0, "rates and fractions must be >= 0");
  }
  require(p.drift_rate_source <= 1.0 && p.drift_rate_song <= 1.0,
          "drift rates must not exceed 1");
  require(p.pref_floor > 0.0, "pref_floor must be > 0");
  require(c.mu_c_bar >= 0.0 && c.sigma_c_bar > 0.0,
          "mu_c_bar must be >= 0 and sigma_c_bar > 0");
  for (const auto& g : c.groups) {
    require(g.mu_c_bar >= 0.0 && g.sigma_c_bar > 0.0,
            "group '" + g.label + "': mu_c_bar must be >= 0 and sigma_c_bar > 0");
  }
  require(p.pool_shrink * c.alpha <= 1.0, "pool_shrink * alpha must not exceed 1");
  require(p.similarity_tau > 0.0, "similarity_tau must be > 0");
  require(p.discovery_eps >= 0.0 && p.discovery_eps <= 1.0, "discovery_eps must lie in [0,1]");
  require(p.songs_per_step <= p.n_songs, "songs_per_step must not exceed n_songs");
  require(p.pool_size <= p.n_songs, "pool_size must not exceed n_songs");
  pool_length(c.alpha, p);  // throws when L(alpha) < songs_per_step
  if (!c.groups.empty()) {
    std::size_t total = 0;
    for (const auto& g : c.groups) total += g.count;
    require(total == p.n_agents, "preference group counts must sum to n_agents");
  }
}

ScenarioConfig preset(std::string_view name) {
  for (const auto& row : kPresets) {
    if (row.name == name) {
      ScenarioConfig c;
      c.name = std::string(row.name);
      c.k_sources = row.k_sources;
      c.conformity = row.conformity;
      c.alpha = row.alpha;
      c.mu_c_bar = row.mu_c_bar;
      c.sigma_c_bar = row.sigma_c_bar;
      return c;
    }
  }
  std::string valid;
  for (const auto& row : kPresets) {
    if (!valid.empty()) valid += ", ";
    valid += row.name;
  }
  throw ConfigError("unknown scenario '" + std::string(name) + "' (valid: " + valid + ")");
}

std::string display_name(std::string_view scenario_name) {
  for (const auto& row : kPresets) {
    if (row.name == scenario_name) return std::string(row.label);
  }
  return std::string(scenario_name);
}

ScenarioConfig parse_scenario_text(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    entries.emplace_back(std::string(trim(line.substr(0, eq))),
                         std::string(trim(line.substr(eq + 1))));
  }

  ScenarioConfig config;
  config.name = "custom";
  for (const auto& [key, value] : entries) {
    if (key == "preset") config = preset(value);
  }
  for (const auto& [key, value] : entries) {
    if (key == "preset") continue;
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(config, key, value);
  }
  validate(config);
  return config;
}

ScenarioConfig load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str());
}

std::string format_scenario_text(const ScenarioConfig& c) {
  const SimParams& p = c.params;
  std::ostringstream out;
  const auto kv = [&out](std::string_view key, const std::string& value) {
    out << key << " = " << value << '\n';
  };
  kv("name", c.name);
  kv("k_sources", std::to_string(c.k_sources));
  kv("conformity", format_double(c.conformity));
  kv("alpha", format_double(c.alpha));
  kv("mu_c_bar", format_double(c.mu_c_bar));
  kv("sigma_c_bar", format_double(c.sigma_c_bar));
  kv("n_agents", std::to_string(p.n_agents));
  kv("n_songs", std::to_string(p.n_songs));
  kv("n_steps", std::to_string(p.n_steps));
  kv("gamma", format_double(p.gamma));
  kv("beta", format_double(p.beta));
  kv("lambda", format_double(p.lambda));
  kv("omega", format_double(p.omega));
  kv("pool_size", std::to_string(p.pool_size));
  kv("pool_shrink", format_double(p.pool_shrink));
  kv("songs_per_step", std::to_string(p.songs_per_step));
  kv("song_noise_sd", format_double(p.song_noise_sd));
  kv("mu_c_sd", format_double(p.mu_c_sd));
  kv("sigma_c_sd", format_double(p.sigma_c_sd));
  kv("pref_floor", format_double(p.pref_floor));
  kv("drift_rate_source", format_double(p.drift_rate_source));
  kv("drift_rate_song", format_double(p.drift_rate_song));
  kv("similarity_tau", format_double(p.similarity_tau));
  kv("discovery_eps", format_double(p.discovery_eps));
  return out.str();
}

WorldState init_world(const ScenarioConfig& config, Rng& rng) {
  validate(config);
  const SimParams& p = config.params;
  WorldState w;

  w.sources.resize(config.k_sources);
  for (std::size_t k = 0; k < config.k_sources; ++k) {
    w.sources[k].id = k;
    const double x = rng.uniform(p.source_center_bounds.lo, p.source_center_bounds.hi);
    const double y = rng.uniform(p.source_center_bounds.lo, p.source_center_bounds.hi);
    w.sources[k].center = {x, y};
  }

  w.songs.resize(p.n_songs);
  for (std::size_t j = 0; j < p.n_songs; ++j) {
    Song& song = w.songs[j];
    song.id = j;
    song.source_id = j % config.k_sources;
    const Vec2 c = w.sources[song.source_id].center;
    const double x = rng.normal(c.x, p.song_noise_sd);
    const double y = rng.normal(c.y, p.song_noise_sd);
    song.position = {p.feature_bounds.clamp(x), p.feature_bounds.clamp(y)};
  }

  w.agents.resize(p.n_agents);
  for (std::size_t i = 0; i < p.n_agents; ++i) {
    w.agents[i].id = i;
    const double x = rng.uniform(p.source_center_bounds.lo, p.source_center_bounds.hi);
    const double y = rng.uniform(p.source_center_bounds.lo, p.source_center_bounds.hi);
    w.agents[i].model_center = {x, y};
  }

  std::vector<PreferenceGroup> groups = config.groups;
  if (groups.empty()) {
    groups.push_back({"all", config.mu_c_bar, config.sigma_c_bar, p.n_agents});
  }
  std::size_t i = 0;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t n = 0; n < groups[g].count; ++n, ++i) {
      ListenerAgent& a = w.agents[i];
      a.group = g;
      a.mu_c = std::max(rng.normal(groups[g].mu_c_bar, p.mu_c_sd), p.pref_floor);
      a.sigma_c = std::max(rng.normal(groups[g].sigma_c_bar, p.sigma_c_sd), p.pref_floor);
    }
  }

  w.exposure.assign(p.n_agents * p.n_songs, 0);
  w.plays.assign(p.n_songs, 0);
  w.step_plays.assign(p.n_songs, 0);
  w.t = 0;
  return w;
}

}  // namespace tastesim
