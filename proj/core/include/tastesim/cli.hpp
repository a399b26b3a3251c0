#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>

#include "tastesim/experiments.hpp"

namespace tastesim::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,
  kVerifyFailure = 2,
  kRuntimeFailure = 3,
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Action { Run, Verify, AifDemo, Help };

struct Request {
  Action action = Action::Run;
  ExperimentPlan plan;
  std::filesystem::path outdir = "tastesim_out";
  bool quiet = false;
  std::string help_text;
};

/// Flags: --mode {paper|robust}, --outdir PATH, --seed INT, --replicates INT,
/// --n_agents_cc INT, --show_bands, --scenario NAME (repeatable),
/// --config FILE (repeatable), --sweep-config FILE, --alpha-grid LIST,
/// --entropy-base {step|cum}, --verify, --aif-demo, --quiet.
/// Throws UsageError on unknown flags or bad values.
Request parse_cli(std::span<const std::string> args);
Request parse_cli(int argc, const char* const* argv);

/// Parses and executes; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Table of reachable trajectory classes for the Dirichlet reference model.
void print_aif_demo(std::ostream& out);

}  // namespace tastesim::cli
