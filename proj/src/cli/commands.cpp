#include "mvg/cli.hpp"
#include "mvg/io.hpp"
#include "mvg/transition.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

namespace mvg::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kKidReferenceSeed = 0x4b4944;

std::string numbered(const char* stem, std::size_t n, const char* ext) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu%s", stem, n, ext);
  return buf;
}

fs::path seed_dir(const RunConfig& cfg, std::uint64_t seed) {
  return fs::path(cfg.out) / ("seed_" + std::to_string(seed));
}

json manifest_base(const RunConfig& cfg, const std::string& command) {
  json hashed = cfg.raw;
  hashed.erase("jobs");
  return json{{"command", command},
              {"complete", false},
              {"config_hash", config_hash(hashed)},
              {"library_version", MVG_VERSION},
              {"schedule", cfg.schedule.describe()},
              {"config", cfg.raw}};
}

void write_manifest(const fs::path& path, const json& m) { io::write_text(path, m.dump(2) + "\n"); }

void write_image(const fs::path& dir, const std::string& stem, const Tensor& t) {
  io::write_tensor(dir / (stem + ".mvgt"), t);
  io::write_pgm(dir / (stem + ".pgm"), t);
}

Trajectory load_trajectory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("trajectory not found: " + dir.string());
  Trajectory traj;
  for (std::size_t n = 0;; ++n) {
    const fs::path p = dir / numbered("state", n, ".mvgt");
    if (!fs::exists(p)) break;
    traj.states.push_back(io::read_tensor(p));
  }
  if (traj.states.empty()) throw std::runtime_error("trajectory has no states: " + dir.string());
  for (std::size_t n = 1; n < traj.states.size(); ++n) {
    traj.step_deltas.push_back(distance(traj.states[n], traj.states[n - 1]));
  }
  traj.config.N = static_cast<int>(traj.step_deltas.size());
  return traj;
}

io::CsvWriter metrics_csv() { return io::CsvWriter({"run_id", "stage", "conf", "clip_i", "kid", "mae"}); }

void add_metric_row(io::CsvWriter& csv, const std::string& run_id, const StageMetrics& r) {
  csv.row({run_id, std::to_string(r.stage), io::CsvWriter::num(r.conf), io::CsvWriter::num(r.clip_i),
           io::CsvWriter::num(r.kid), io::CsvWriter::num(r.mae)});
}

// Per-seed metrics files plus the seed-averaged summary (with set-level KID).
void write_metric_tables(const Context& ctx, const std::vector<Trajectory>& runs) {
  const RunConfig& cfg = ctx.cfg;
  std::vector<std::vector<StageMetrics>> per_run(runs.size());
  parallel_for(runs.size(), cfg.jobs, [&](std::size_t i) {
    per_run[i] = stage_metrics(ctx, runs[i]);
    io::CsvWriter csv = metrics_csv();
    for (const auto& r : per_run[i]) add_metric_row(csv, "seed_" + std::to_string(cfg.seeds[i]), r);
    csv.save(seed_dir(cfg, cfg.seeds[i]) / "metrics.csv");
  });

  const std::size_t stages = runs.front().states.size();
  const bool with_kid = cfg.wants("kid") && runs.size() >= 2;
  std::vector<Tensor> reference;
  if (with_kid) reference = toy::sample(ctx.model, cfg.target, cfg.kid_reference, kKidReferenceSeed);
  io::CsvWriter summary = metrics_csv();
  for (std::size_t n = 0; n < stages; ++n) {
    StageMetrics mean;
    mean.stage = static_cast<int>(n);
    for (const auto& rows : per_run) {
      mean.conf += rows[n].conf;
      mean.clip_i += rows[n].clip_i;
      mean.mae += rows[n].mae;
    }
    const double inv = 1.0 / static_cast<double>(runs.size());
    mean.conf *= inv;
    mean.clip_i *= inv;
    mean.mae *= inv;
    mean.kid = std::numeric_limits<double>::quiet_NaN();
    if (with_kid) {
      std::vector<Tensor> states;
      for (const auto& r : runs) states.push_back(r.states[n]);
      mean.kid = kid(states, reference, *ctx.embedder);
    }
    add_metric_row(summary, "mean", mean);
  }
  summary.save(fs::path(cfg.out) / "summary.csv");
}

void write_trajectory(const Context& ctx, const Trajectory& traj, std::uint64_t seed) {
  const fs::path dir = seed_dir(ctx.cfg, seed);
  fs::create_directories(dir);
  json m = manifest_base(ctx.cfg, "simulate");
  m["seed"] = seed;
  m["stages"] = traj.stages();
  write_manifest(dir / "manifest.json", m);

  for (std::size_t n = 0; n < traj.states.size(); ++n) {
    write_image(dir, numbered("state", n, ""), traj.states[n]);
    if (n > 0) write_image(dir, numbered("heatmap", n, ""), diff_heatmap(traj.states[n], traj.states[0]));
  }
  io::CsvWriter deltas({"stage", "delta"});
  for (std::size_t n = 0; n < traj.step_deltas.size(); ++n) {
    deltas.row({std::to_string(n + 1), io::CsvWriter::num(traj.step_deltas[n])});
  }
  deltas.save(dir / "deltas.csv");
  m["complete"] = true;
  write_manifest(dir / "manifest.json", m);
}

}  // namespace

int cmd_simulate(const CliOptions& opts) {
  const Context ctx(resolve(opts));
  const RunConfig& cfg = ctx.cfg;
  fs::create_directories(cfg.out);
  json top = manifest_base(cfg, "simulate");
  top["seeds"] = cfg.seeds;
  write_manifest(fs::path(cfg.out) / "manifest.json", top);

  const Tensor x0 = ctx.start_image();
  std::vector<Trajectory> runs(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
    PieConfig pc = cfg.pie;
    pc.seed = cfg.seeds[i];
    spdlog::info("simulate: seed {} ({} stages)", pc.seed, pc.N);
    runs[i] = pie_run(x0, cfg.target, pc, *ctx.denoiser, ctx.mask, ctx.schedule);
    write_trajectory(ctx, runs[i], pc.seed);
  });
  write_metric_tables(ctx, runs);

  top["complete"] = true;
  write_manifest(fs::path(cfg.out) / "manifest.json", top);
  spdlog::info("simulate: wrote {} run(s) to {}", runs.size(), cfg.out);
  return 0;
}

int cmd_metrics(const CliOptions& opts) {
  const Context ctx(resolve(opts));
  std::vector<Trajectory> runs;
  for (std::uint64_t seed : ctx.cfg.seeds) runs.push_back(load_trajectory(seed_dir(ctx.cfg, seed)));
  for (const auto& r : runs) {
    if (r.states.size() != runs.front().states.size()) {
      throw std::runtime_error("metrics: trajectories differ in length");
    }
  }
  write_metric_tables(ctx, runs);
  spdlog::info("metrics: wrote summary for {} run(s)", runs.size());
  return 0;
}

int cmd_video(const CliOptions& opts) {
  const Context ctx(resolve(opts));
  const RunConfig& cfg = ctx.cfg;
  const fs::path src = cfg.video.trajectory.empty() ? seed_dir(cfg, cfg.seeds.front())
                                                    : fs::path(cfg.video.trajectory);
  const Trajectory traj = load_trajectory(src);
  const int N = traj.stages();
  if (N < 1) throw std::runtime_error("video: trajectory " + src.string() + " has a single state");
  const fs::path out = fs::path(cfg.out) / "video";
  fs::create_directories(out);
  json m = manifest_base(cfg, "video");
  m["trajectory"] = src.string();
  m["K"] = cfg.video.K;
  write_manifest(out / "manifest.json", m);

  std::vector<VideoClip> clips(static_cast<std::size_t>(N));
  json clip_info = json::array();
  const std::uint64_t base_seed = cfg.seeds.front();
  parallel_for(clips.size(), cfg.jobs, [&](std::size_t i) {
    const std::uint64_t seed = base_seed * 1000003ull + i;
    const Condition y0 = interpolate_condition(cfg.source, cfg.target, static_cast<double>(i) / N);
    const Condition y1 = interpolate_condition(cfg.source, cfg.target, static_cast<double>(i + 1) / N);
    const VideoClip skel = make_clip_skeleton(traj.states[i], traj.states[i + 1], cfg.video.K, seed);
    clips[i] = generate_transition(skel, ctx.mask, *ctx.denoiser, ctx.schedule, y0, y1,
                                   cfg.video.gamma, seed);
  });
  for (std::size_t i = 0; i < clips.size(); ++i) {
    clip_info.push_back({{"clip", i}, {"start_state", i}, {"end_state", i + 1},
                         {"seed", base_seed * 1000003ull + i}, {"K", cfg.video.K}});
  }
  if (cfg.video.inject_seam_break >= 1 && cfg.video.inject_seam_break < N) {
    clips[static_cast<std::size_t>(cfg.video.inject_seam_break)].frames.front().values().array() += 1e-3;
  }
  const VideoClip video = concat_clips(clips);
  for (Index j = 0; j < video.length(); ++j) {
    char stem[32];
    std::snprintf(stem, sizeof stem, "frame_%04ld", static_cast<long>(j));
    write_image(out, stem, video.frames[static_cast<std::size_t>(j)]);
  }
  m["clips"] = clip_info;
  m["frames"] = video.length();
  m["complete"] = true;
  write_manifest(out / "manifest.json", m);
  spdlog::info("video: {} frames from {} clip(s)", video.length(), N);
  return 0;
}

}  // namespace mvg::cli
