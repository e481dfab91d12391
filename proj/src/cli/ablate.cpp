#include "mvg/cli.hpp"
#include "mvg/io.hpp"

#include <spdlog/spdlog.h>

namespace mvg::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kKidReferenceSeed = 0x4b4944;

struct Sweep {
  const Context& ctx;
  std::vector<Tensor> starts;
  std::vector<Tensor> reference;

  AblationRow point(PieConfig pc) const {
    const auto& seeds = ctx.cfg.seeds;
    const std::size_t runs = starts.size() * seeds.size();
    std::vector<double> conf(runs), clip(runs);
    std::vector<Tensor> finals(runs);
    parallel_for(runs, ctx.cfg.jobs, [&](std::size_t r) {
      PieConfig local = pc;
      local.seed = seeds[r % seeds.size()];
      const Tensor& x0 = starts[r / seeds.size()];
      const Trajectory traj = pie_run(x0, ctx.cfg.target, local, *ctx.denoiser, ctx.mask, ctx.schedule);
      finals[r] = traj.states.back();
      conf[r] = confidence(finals[r], ctx.cfg.target, ctx.model);
      clip[r] = pc.N >= 1 ? clip_i(traj, *ctx.embedder) : 1.0;
    });
    AblationRow row;
    row.gamma = pc.gamma;
    row.N = pc.N;
    row.beta1 = pc.beta1;
    row.beta2 = pc.beta2;
    for (std::size_t r = 0; r < runs; ++r) {
      row.conf += conf[r] / static_cast<double>(runs);
      row.clip_i += clip[r] / static_cast<double>(runs);
    }
    row.kid = finals.size() >= 2 ? kid(finals, reference, *ctx.embedder)
                                 : std::numeric_limits<double>::quiet_NaN();
    spdlog::info("ablate: gamma={} N={} beta1={} beta2={} conf={:.4f} clip_i={:.4f} kid={:.4f}",
                 row.gamma, row.N, row.beta1, row.beta2, row.conf, row.clip_i, row.kid);
    return row;
  }
};

}  // namespace

AblationTables run_ablation(const Context& ctx) {
  const RunConfig& cfg = ctx.cfg;
  Sweep sweep{ctx, {}, {}};
  if (cfg.start.kind == StartSpec::Kind::kSample) {
    sweep.starts = toy::sample(ctx.model, cfg.source, cfg.ablation.starts, cfg.start.seed);
  } else {
    sweep.starts.assign(static_cast<std::size_t>(cfg.ablation.starts), ctx.start_image());
  }
  sweep.reference = toy::sample(ctx.model, cfg.target, cfg.kid_reference, kKidReferenceSeed);

  AblationTables tables;
  for (double g : cfg.ablation.gammas) {
    PieConfig pc = cfg.pie;
    pc.gamma = g;
    pc.validate(ctx.schedule);
    tables.gamma.push_back(sweep.point(pc));
  }
  for (int n : cfg.ablation.steps) {
    PieConfig pc = cfg.pie;
    pc.N = n;
    pc.gamma = cfg.ablation.gamma_for_steps;
    pc.validate(ctx.schedule);
    tables.steps.push_back(sweep.point(pc));
  }
  for (double b1 : cfg.ablation.beta1s) {
    for (double b2 : cfg.ablation.beta2s) {
      PieConfig pc = cfg.pie;
      pc.beta1 = b1;
      pc.beta2 = b2;
      pc.validate(ctx.schedule);
      tables.beta.push_back(sweep.point(pc));
    }
  }
  return tables;
}

int cmd_ablate(const CliOptions& opts) {
  const Context ctx(resolve(opts));
  const fs::path out(ctx.cfg.out);
  fs::create_directories(out);
  json hashed = ctx.cfg.raw;
  hashed.erase("jobs");
  json m{{"command", "ablate"},
         {"complete", false},
         {"config_hash", config_hash(hashed)},
         {"library_version", MVG_VERSION},
         {"schedule", ctx.cfg.schedule.describe()},
         {"config", ctx.cfg.raw}};
  io::write_text(out / "manifest.json", m.dump(2) + "\n");

  const AblationTables t = run_ablation(ctx);
  using io::CsvWriter;
  CsvWriter g({"gamma", "conf", "clip_i", "kid"});
  for (const auto& r : t.gamma) {
    g.row({CsvWriter::num(r.gamma), CsvWriter::num(r.conf), CsvWriter::num(r.clip_i), CsvWriter::num(r.kid)});
  }
  g.save(out / "table_gamma.csv");
  CsvWriter n({"N", "conf", "clip_i", "kid"});
  for (const auto& r : t.steps) {
    n.row({std::to_string(r.N), CsvWriter::num(r.conf), CsvWriter::num(r.clip_i), CsvWriter::num(r.kid)});
  }
  n.save(out / "table_steps.csv");
  CsvWriter b({"beta1", "beta2", "conf", "clip_i", "kid"});
  for (const auto& r : t.beta) {
    b.row({CsvWriter::num(r.beta1), CsvWriter::num(r.beta2), CsvWriter::num(r.conf),
           CsvWriter::num(r.clip_i), CsvWriter::num(r.kid)});
  }
  b.save(out / "table_beta.csv");
  m["complete"] = true;
  io::write_text(out / "manifest.json", m.dump(2) + "\n");
  return 0;
}

}  // namespace mvg::cli
