#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tastesim/experiments.hpp"

namespace tastesim::io {

/// Filesystem failure; the message always names the offending path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kManifestName = "manifest.json";
inline constexpr std::string_view kRobustnessName = "robustness.csv";
inline constexpr std::string_view kBandsName = "bands.csv";
inline constexpr std::string_view kSnapshotName = "snapshot.csv";

inline constexpr std::string_view kSeriesHeader =
    "experiment,scenario,alpha,replicate,step,metric,value";
inline constexpr std::string_view kBandsHeader =
    "experiment,scenario,alpha,step,metric,p05,mean,p50,p95";
inline constexpr std::string_view kRobustnessHeader =
    "prediction,measure,estimate,ci_low,ci_high,notes";
inline constexpr std::string_view kSnapshotHeader = "scenario,kind,id,source_id,x,y,plays";

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// RFC 4180 quoting when the field holds a comma, quote or line break.
std::string csv_field(std::string_view raw);

struct OutputFile {
  std::string relative_path;
  std::uintmax_t bytes = 0;
  std::string sha256;
};

/// Writes `content` verbatim (binary, LF endings as given) under outdir.
OutputFile write_file(const std::filesystem::path& outdir, std::string_view relative_path,
                      std::string_view content);

/// One run's worth of series rows.
struct SeriesBlock {
  std::string_view experiment;
  std::string_view scenario;
  double alpha = 0.0;
  std::size_t replicate = 0;
  const MetricSeries* series = nullptr;
};

/// Long-format rows (one per step and metric present in the run).
std::string series_csv(std::span<const SeriesBlock> blocks);

/// Bands over replicates for each (experiment, scenario, alpha) group; the
/// blocks of a group must be contiguous.
std::string bands_csv(std::span<const SeriesBlock> blocks);

/// Rows are written in the given order.
std::string robustness_csv(std::span<const RobustnessRow> rows);

/// Parses robustness_csv output back into rows.
std::vector<RobustnessRow> parse_robustness_csv(std::string_view text);

/// Final-step positions: sources, songs (with plays) and listener centers.
std::string snapshot_csv(const ScenarioResults& results);

/// Series blocks of every experiment, grouped by experiment name.
struct ExperimentBlocks {
  std::string experiment;
  std::vector<SeriesBlock> blocks;
};
std::vector<ExperimentBlocks> collect_blocks(const ExperimentResults& results);

/// Writes timeseries_<experiment>.csv per experiment, snapshot.csv, and in
/// robust mode bands.csv and robustness.csv. Returns the files written.
std::vector<OutputFile> write_outputs(const ExperimentResults& results,
                                      const std::filesystem::path& outdir);

/// Writes manifest.json listing `files` (the manifest never lists itself)
/// plus tool version, RNG name, the resolved plan and run timing.
void write_manifest(const std::filesystem::path& outdir, std::span<const OutputFile> files,
                    const ExperimentPlan& plan, double wall_seconds);

struct VerifyReport {
  bool ok = true;
  std::vector<std::string> problems;  // one line per offending file
};

/// Recomputes every listed hash and size; also flags files present in outdir
/// that the manifest does not list.
VerifyReport verify_manifest(const std::filesystem::path& outdir);

}  // namespace tastesim::io
