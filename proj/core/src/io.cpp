#include "tastesim/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <memory>
#include <set>
#include <sstream>

#include <json.hpp>

#include "tastesim/format.hpp"
#include "tastesim/rng.hpp"

#ifndef TASTESIM_VERSION
#define TASTESIM_VERSION "0.0.0"
#endif

namespace tastesim::io {

namespace fs = std::filesystem;

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw std::runtime_error("sha256: digest init failed");
    }
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) {
      throw std::runtime_error("sha256: digest update failed");
    }
  }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), digest.data(), &len) != 1) {
      throw std::runtime_error("sha256: digest final failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
      out.push_back(kHex[digest[i] >> 4]);
      out.push_back(kHex[digest[i] & 0x0f]);
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

std::string alpha_text(double alpha) { return format_double(alpha); }

void append_row(std::string& out, std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (std::string_view f : fields) {
    if (!first) out.push_back(',');
    out += csv_field(f);
    first = false;
  }
  out.push_back('\n');
}

std::vector<Metric> metrics_present(const MetricSeries& s) {
  std::vector<Metric> out;
  for (Metric m : kAllMetrics) {
    if (!s.get(m).empty()) out.push_back(m);
  }
  return out;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

nlohmann::ordered_json scenario_json(const ScenarioConfig& c) {
  const SimParams& p = c.params;
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["k_sources"] = c.k_sources;
  j["conformity"] = c.conformity;
  j["alpha"] = c.alpha;
  j["mu_c_bar"] = c.mu_c_bar;
  j["sigma_c_bar"] = c.sigma_c_bar;
  j["n_agents"] = p.n_agents;
  j["n_songs"] = p.n_songs;
  j["n_steps"] = p.n_steps;
  j["gamma"] = p.gamma;
  j["beta"] = p.beta;
  j["lambda"] = p.lambda;
  j["omega"] = p.omega;
  j["pool_size"] = p.pool_size;
  j["pool_shrink"] = p.pool_shrink;
  j["songs_per_step"] = p.songs_per_step;
  j["feature_bounds"] = {p.feature_bounds.lo, p.feature_bounds.hi};
  j["source_center_bounds"] = {p.source_center_bounds.lo, p.source_center_bounds.hi};
  j["song_noise_sd"] = p.song_noise_sd;
  j["mu_c_sd"] = p.mu_c_sd;
  j["sigma_c_sd"] = p.sigma_c_sd;
  j["pref_floor"] = p.pref_floor;
  j["drift_rate_source"] = p.drift_rate_source;
  j["drift_rate_song"] = p.drift_rate_song;
  j["similarity_tau"] = p.similarity_tau;
  j["discovery_eps"] = p.discovery_eps;
  if (!c.groups.empty()) {
    auto& groups = j["groups"] = nlohmann::ordered_json::array();
    for (const auto& g : c.groups) {
      groups.push_back({{"label", g.label},
                        {"mu_c_bar", g.mu_c_bar},
                        {"sigma_c_bar", g.sigma_c_bar},
                        {"count", g.count}});
    }
  }
  return j;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::string csv_field(std::string_view raw) {
  if (raw.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(raw);
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

OutputFile write_file(const fs::path& outdir, std::string_view relative_path,
                      std::string_view content) {
  const fs::path target = outdir / relative_path;
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  if (ec) throw IoError("cannot create directory '" + target.parent_path().string() + "'");
  std::ofstream out(target, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + target.string() + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw IoError("write failed for '" + target.string() + "'");
  return {std::string(relative_path), content.size(), sha256_hex(content)};
}

std::string series_csv(std::span<const SeriesBlock> blocks) {
  std::string out(kSeriesHeader);
  out.push_back('\n');
  for (const SeriesBlock& b : blocks) {
    const std::string alpha = alpha_text(b.alpha);
    const std::string replicate = std::to_string(b.replicate);
    const auto metrics = metrics_present(*b.series);
    for (std::size_t t = 0; t < b.series->steps(); ++t) {
      const std::string step = std::to_string(t + 1);
      for (Metric m : metrics) {
        append_row(out, {b.experiment, b.scenario, alpha, replicate, step, metric_name(m),
                         format_double(b.series->get(m)[t])});
      }
    }
  }
  return out;
}

std::string bands_csv(std::span<const SeriesBlock> blocks) {
  std::string out(kBandsHeader);
  out.push_back('\n');
  std::size_t begin = 0;
  while (begin < blocks.size()) {
    std::size_t end = begin + 1;
    while (end < blocks.size() && blocks[end].experiment == blocks[begin].experiment &&
           blocks[end].scenario == blocks[begin].scenario &&
           blocks[end].alpha == blocks[begin].alpha) {
      ++end;
    }
    if (end - begin >= 2) {
      const SeriesBlock& head = blocks[begin];
      const std::string alpha = alpha_text(head.alpha);
      for (Metric m : metrics_present(*head.series)) {
        std::vector<std::vector<double>> samples;
        for (std::size_t i = begin; i < end; ++i) {
          const auto s = blocks[i].series->get(m);
          samples.emplace_back(s.begin(), s.end());
        }
        const auto bands = percentile_bands(samples);
        for (std::size_t t = 0; t < bands.size(); ++t) {
          append_row(out, {head.experiment, head.scenario, alpha, std::to_string(t + 1),
                           metric_name(m), format_double(bands[t].p05),
                           format_double(bands[t].mean), format_double(bands[t].p50),
                           format_double(bands[t].p95)});
        }
      }
    }
    begin = end;
  }
  return out;
}

std::string robustness_csv(std::span<const RobustnessRow> rows) {
  std::string out(kRobustnessHeader);
  out.push_back('\n');
  for (const auto& r : rows) {
    append_row(out, {r.prediction, r.measure, format_double(r.estimate), format_double(r.ci_low),
                     format_double(r.ci_high), r.notes});
  }
  return out;
}

std::vector<RobustnessRow> parse_robustness_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      fields.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(fields));
      fields.clear();
    } else {
      field.push_back(c);
    }
  }
  if (!field.empty() || !fields.empty()) {
    fields.push_back(std::move(field));
    records.push_back(std::move(fields));
  }
  if (records.empty()) throw IoError("robustness csv is empty");
  std::vector<RobustnessRow> rows;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() != 6) throw IoError("robustness csv row " + std::to_string(i) + " malformed");
    const auto num = [](const std::string& s) { return s.empty() ? kMissing : std::stod(s); };
    rows.push_back({f[0], f[1], num(f[2]), num(f[3]), num(f[4]), f[5]});
  }
  return rows;
}

std::string snapshot_csv(const ScenarioResults& results) {
  std::string out(kSnapshotHeader);
  out.push_back('\n');
  for (std::size_t s = 0; s < results.configs.size(); ++s) {
    const std::string& name = results.configs[s].name;
    const WorldState& w = results.snapshots[s];
    for (const Source& src : w.sources) {
      append_row(out, {name, "source", std::to_string(src.id), std::to_string(src.id),
                       format_double(src.center.x), format_double(src.center.y), ""});
    }
    for (const Song& song : w.songs) {
      append_row(out, {name, "song", std::to_string(song.id), std::to_string(song.source_id),
                       format_double(song.position.x), format_double(song.position.y),
                       std::to_string(w.plays[song.id])});
    }
    for (const ListenerAgent& a : w.agents) {
      append_row(out, {name, "agent", std::to_string(a.id), "", format_double(a.model_center.x),
                       format_double(a.model_center.y), ""});
    }
  }
  return out;
}

std::vector<ExperimentBlocks> collect_blocks(const ExperimentResults& results) {
  std::vector<ExperimentBlocks> out;

  ExperimentBlocks scen{"scenarios", {}};
  for (std::size_t s = 0; s < results.scenarios.configs.size(); ++s) {
    const auto& cfg = results.scenarios.configs[s];
    for (std::size_t r = 0; r < results.scenarios.runs[s].size(); ++r) {
      scen.blocks.push_back({"scenarios", cfg.name, cfg.alpha, r, &results.scenarios.runs[s][r]});
    }
  }
  out.push_back(std::move(scen));

  ExperimentBlocks sweep{"alpha_sweep", {}};
  for (std::size_t a = 0; a < results.sweep.alpha_grid.size(); ++a) {
    for (std::size_t r = 0; r < results.sweep.runs[a].size(); ++r) {
      sweep.blocks.push_back({"alpha_sweep", results.sweep.base.name,
                              results.sweep.alpha_grid[a], r, &results.sweep.runs[a][r]});
    }
  }
  out.push_back(std::move(sweep));

  ExperimentBlocks cc{"cultural_capital", {}};
  const auto& ccr = results.cultural_capital;
  for (std::size_t r = 0; r < ccr.runs.size(); ++r) {
    cc.blocks.push_back({"cultural_capital", ccr.config.name, ccr.config.alpha, r, &ccr.runs[r]});
  }
  out.push_back(std::move(cc));
  return out;
}

std::vector<OutputFile> write_outputs(const ExperimentResults& results, const fs::path& outdir) {
  std::vector<OutputFile> files;
  const auto groups = collect_blocks(results);
  for (const auto& g : groups) {
    files.push_back(write_file(outdir, "timeseries_" + g.experiment + ".csv", series_csv(g.blocks)));
  }
  files.push_back(write_file(outdir, kSnapshotName, snapshot_csv(results.scenarios)));
  if (results.plan.mode == Mode::Robust) {
    std::vector<SeriesBlock> all;
    for (const auto& g : groups) all.insert(all.end(), g.blocks.begin(), g.blocks.end());
    files.push_back(write_file(outdir, kBandsName, bands_csv(all)));
    files.push_back(
        write_file(outdir, kRobustnessName, robustness_csv(emit_robustness_table(results))));
  }
  return files;
}

void write_manifest(const fs::path& outdir, std::span<const OutputFile> files,
                    const ExperimentPlan& plan, double wall_seconds) {
  nlohmann::ordered_json j;
  j["tool"] = "tastesim";
  j["tool_version"] = TASTESIM_VERSION;
  j["rng_algorithm"] = Rng::kAlgorithmName;
  j["created_utc"] = utc_now();
  j["wall_seconds"] = wall_seconds;

  auto& p = j["plan"];
  p["mode"] = mode_name(plan.mode);
  p["base_seed"] = plan.base_seed;
  p["replicates"] = plan.replicates;
  p["alpha_grid"] = plan.alpha_grid;
  p["n_agents_cc"] = plan.n_agents_cc;
  p["entropy_base"] = entropy_base_name(plan.entropy_base);
  p["show_bands"] = plan.show_bands;
  p["percentile_method"] = "linear interpolation between closest ranks";
  p["last10_window"] = "mean over the final 10 steps";
  auto& scen = p["scenarios"] = nlohmann::ordered_json::array();
  for (const auto& s : plan.scenarios) scen.push_back(scenario_json(s));
  p["sweep_base"] = scenario_json(plan.sweep_base);
  p["cultural_capital"] = scenario_json(cultural_capital_config(plan.n_agents_cc));

  auto& list = j["files"] = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    if (f.relative_path == kManifestName) continue;
    list.push_back({{"path", f.relative_path}, {"bytes", f.bytes}, {"sha256", f.sha256}});
  }
  write_file(outdir, kManifestName, j.dump(2) + "\n");
}

VerifyReport verify_manifest(const fs::path& outdir) {
  VerifyReport report;
  const fs::path manifest_path = outdir / kManifestName;
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) {
    report.ok = false;
    report.problems.push_back(manifest_path.string() + ": missing manifest");
    return report;
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    report.ok = false;
    report.problems.push_back(manifest_path.string() + ": unreadable (" + e.what() + ")");
    return report;
  }

  std::set<std::string> listed;
  for (const auto& entry : j.at("files")) {
    const std::string rel = entry.at("path").get<std::string>();
    listed.insert(rel);
    const fs::path file = outdir / rel;
    std::error_code ec;
    if (!fs::is_regular_file(file, ec)) {
      report.problems.push_back(rel + ": missing");
      continue;
    }
    const auto size = fs::file_size(file, ec);
    if (ec || size != entry.at("bytes").get<std::uintmax_t>()) {
      report.problems.push_back(rel + ": size mismatch");
      continue;
    }
    if (sha256_file(file) != entry.at("sha256").get<std::string>()) {
      report.problems.push_back(rel + ": sha256 mismatch");
    }
  }
  for (const auto& entry : fs::recursive_directory_iterator(outdir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), outdir).generic_string();
    if (rel != kManifestName && !listed.count(rel)) {
      report.problems.push_back(rel + ": not listed in manifest");
    }
  }
  report.ok = report.problems.empty();
  return report;
}

}  // namespace tastesim::io
