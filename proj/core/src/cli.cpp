#include "tastesim/cli.hpp"

#include <charconv>
#include <chrono>
#include <iomanip>
#include <iostream>
#include <optional>
#include <vector>

#include <CLI11.hpp>

#include "tastesim/aif.hpp"
#include "tastesim/io.hpp"

namespace tastesim::cli {

namespace {

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size()) {
      throw UsageError("--alpha-grid: '" + std::string(item) + "' is not a number");
    }
    grid.push_back(v);
  }
  return grid;
}

}  // namespace

Request parse_cli(std::span<const std::string> args) {
  CLI::App app{"Agent-based music-market simulator with curation, conformity and "
               "cultural-capital experiments",
               "tastesim"};
  app.set_help_flag("-h,--help", "Show this help and exit");

  std::string mode = "paper";
  std::string outdir = "tastesim_out";
  std::uint64_t seed = 123;
  std::optional<std::size_t> replicates;
  std::optional<std::size_t> n_agents_cc;
  bool show_bands = false;
  std::vector<std::string> scenario_names;
  std::vector<std::string> config_files;
  std::string sweep_config;
  std::string alpha_grid;
  std::string entropy_base = "cum";
  bool verify = false;
  bool aif_demo = false;
  bool quiet = false;

  app.add_option("--mode", mode, "Run mode")->check(CLI::IsMember({"paper", "robust"}));
  app.add_option("--outdir", outdir, "Output directory");
  app.add_option("--seed", seed, "Base seed; replicate r uses seed + r");
  app.add_option("--replicates", replicates, "Replicates per experiment (robust default 200)");
  app.add_option("--n_agents_cc", n_agents_cc,
                 "Agents in the cultural-capital experiment (paper 200, robust 100)");
  app.add_flag("--show_bands", show_bands, "Record that percentile bands should be drawn");
  app.add_option("--scenario", scenario_names, "Preset to run (repeatable)")
      ->check(CLI::IsMember({"sanremo", "brazil", "kpop", "uk"}));
  app.add_option("--config", config_files, "Scenario config file (repeatable)");
  app.add_option("--sweep-config", sweep_config, "Config file for the alpha-sweep baseline");
  app.add_option("--alpha-grid", alpha_grid, "Comma-separated alpha values for the sweep");
  app.add_option("--entropy-base", entropy_base, "Series used by the prediction checks")
      ->check(CLI::IsMember({"step", "cum"}));
  app.add_flag("--verify", verify, "Verify an existing output directory against its manifest");
  app.add_flag("--aif-demo", aif_demo, "Print the trajectory-class table and exit");
  app.add_flag("--quiet", quiet, "Suppress progress messages");

  std::vector<const char*> argv;
  argv.push_back("tastesim");
  for (const auto& a : args) argv.push_back(a.c_str());

  Request req;
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    req.action = Action::Help;
    req.help_text = app.help();
    return req;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  req.outdir = outdir;
  req.quiet = quiet;
  if (verify) {
    req.action = Action::Verify;
    return req;
  }
  if (aif_demo) {
    req.action = Action::AifDemo;
    return req;
  }

  ExperimentPlan& plan = req.plan;
  plan.mode = mode == "robust" ? Mode::Robust : Mode::Paper;
  plan.base_seed = seed;
  if (plan.mode == Mode::Paper) {
    if (replicates && *replicates != 1) {
      throw UsageError("--mode paper runs a single replicate; use --mode robust for more");
    }
    plan.replicates = 1;
    plan.n_agents_cc = n_agents_cc.value_or(200);
  } else {
    plan.replicates = replicates.value_or(200);
    plan.n_agents_cc = n_agents_cc.value_or(100);
  }
  if (plan.replicates < 1) throw UsageError("--replicates must be >= 1");
  plan.show_bands = show_bands;
  plan.entropy_base = entropy_base == "step" ? EntropyBase::Step : EntropyBase::Cum;
  if (!alpha_grid.empty()) plan.alpha_grid = parse_grid(alpha_grid);

  try {
    for (const auto& name : scenario_names) plan.scenarios.push_back(preset(name));
    for (const auto& file : config_files) plan.scenarios.push_back(load_scenario_file(file));
    if (plan.scenarios.empty()) {
      for (std::string_view name : kPresetNames) plan.scenarios.push_back(preset(name));
    }
    if (!sweep_config.empty()) plan.sweep_base = load_scenario_file(sweep_config);
    validate(plan);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return req;
}

Request parse_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return parse_cli(args);
}

void print_aif_demo(std::ostream& out) {
  struct Case {
    double initial_surprisal;
    aif::PreferenceParams prefs;
  };
  const Case cases[] = {
      {2.5, {1.0, 0.5}}, {1.8, {1.0, 0.5}}, {0.9, {1.0, 0.5}},
      {0.6, {1.0, 0.5}}, {0.2, {2.0, 0.5}}, {0.3, {3.0, 0.6}},
  };
  constexpr std::size_t kHorizon = 20;
  out << "initial_I  mu_c  sigma_c  class\n";
  for (const Case& c : cases) {
    const auto cls = aif::classify_trajectory(c.initial_surprisal, c.prefs, kHorizon);
    out << std::left << std::setw(11) << c.initial_surprisal << std::setw(6) << c.prefs.mu_c
        << std::setw(9) << c.prefs.sigma_c << aif::trajectory_name(cls) << '\n';
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Request req;
  try {
    req = parse_cli(argc, argv);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return kUsageError;
  }

  switch (req.action) {
    case Action::Help:
      out << req.help_text;
      return kSuccess;
    case Action::AifDemo:
      print_aif_demo(out);
      return kSuccess;
    case Action::Verify: {
      try {
        const auto report = io::verify_manifest(req.outdir);
        if (report.ok) {
          out << "verified " << req.outdir.string() << '\n';
          return kSuccess;
        }
        for (const auto& p : report.problems) err << "verify: " << p << '\n';
        return kVerifyFailure;
      } catch (const std::exception& e) {
        err << "verify: " << e.what() << '\n';
        return kVerifyFailure;
      }
    }
    case Action::Run:
      break;
  }

  try {
    const auto start = std::chrono::steady_clock::now();
    const auto progress = [&](std::string_view msg) {
      if (!req.quiet) err << "[tastesim] " << msg << '\n';
    };
    const ExperimentResults results = run_all(req.plan, progress);
    const auto files = io::write_outputs(results, req.outdir);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    io::write_manifest(req.outdir, files, req.plan, wall);
    progress("wrote " + std::to_string(files.size() + 1) + " files to " + req.outdir.string());
    return kSuccess;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
}

}  // namespace tastesim::cli
