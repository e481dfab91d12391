#include "mvg/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <exception>
#include <iostream>

namespace mvg::cli {

namespace {

void configure_logging() {
  const char* env = std::getenv("MVG_LOG");
  const std::string level = env ? env : "info";
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    if (level != "info") spdlog::warn("MVG_LOG: unknown level \"{}\", using info", level);
    spdlog::set_level(spdlog::level::info);
  }
  spdlog::set_pattern("[%l] %v");
}

}  // namespace

int run(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Progressive disease-state simulation on synthetic image families"};
  app.require_subcommand(1);

  CliOptions opts;
  std::string out, seeds;
  int jobs = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "run configuration (JSON)")->required();
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--seeds", seeds, "comma-separated seed list (overrides the config)");
    sub->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  };
  struct Entry {
    const char* name;
    const char* help;
    int (*fn)(const CliOptions&);
  };
  const Entry entries[] = {
      {"simulate", "run PIE trajectories and write states, heatmaps, deltas and metrics", cmd_simulate},
      {"video", "generate transition clips between consecutive states", cmd_video},
      {"ablate", "sweep strength, stage count and blend grids", cmd_ablate},
      {"verify-bounds", "check the convergence and drift bounds on the pure-PIE suite", cmd_verify_bounds},
      {"metrics", "recompute metric tables for existing trajectories", cmd_metrics},
  };
  std::vector<std::pair<CLI::App*, int (*)(const CliOptions&)>> subs;
  for (const auto& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    add_common(sub);
    subs.emplace_back(sub, e.fn);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    if (!out.empty()) opts.out = out;
    if (!seeds.empty()) opts.seeds = parse_seed_list(seeds);
    if (jobs > 0) opts.jobs = jobs;
    for (const auto& [sub, fn] : subs) {
      if (sub->parsed()) return fn(opts);
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 2;
  }
  return 2;
}

}  // namespace mvg::cli
