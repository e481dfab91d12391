#include "mvg/cli.hpp"
#include "mvg/io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mvg::cli {

namespace fs = std::filesystem;

VerifyReport run_verification(const RunConfig& cfg) {
  const VerifySpec& v = cfg.verify;
  const NoiseSchedule s = build_schedule(v.T, v.beta, v.beta);
  const Tensor x0 = toy::render_blob(cfg.domain, cfg.source.class_id, cfg.source.severity);
  const Tensor mu = toy::render_blob(cfg.domain, cfg.target.class_id, cfg.target.severity);
  const GmmModel prior =
      GmmModel::single_class(cfg.domain.plane(), 0, Mixture::single(mu.values(), v.prior_variance));
  const GmmDenoiser d(prior, s);
  const RoiMask full = RoiMask::constant(cfg.domain.plane(), 1.0);

  PieConfig pc;
  pc.N = v.stages;
  pc.gamma = std::min(1.0, 1.0 / v.T + 1e-12);  // one step per stage
  pc.beta1 = 1.0;
  pc.beta2 = 1.0;
  pc.stop_step = v.stop_step;

  VerifyReport rep;
  rep.seeds = v.seeds;
  std::vector<Trajectory> runs(static_cast<std::size_t>(v.seeds));
  std::vector<double> c2(runs.size(), 0.0);
  parallel_for(runs.size(), cfg.jobs, [&](std::size_t i) {
    PieConfig local = pc;
    local.seed = i;
    const ProbeRecorder rec(d);
    runs[i] = pie_run(x0, Condition(), local, rec, full, s);
    c2[i] = measure_c2(d, rec.probes());
  });
  rep.C1 = norm(x0);
  rep.C2 = *std::max_element(c2.begin(), c2.end());

  bool all_zero = true;
  for (const auto& r : runs) {
    for (double dl : r.step_deltas) all_zero = all_zero && dl == 0.0;
  }
  rep.slope_target = 0.5 * std::log(s.alpha_bar(v.stop_step + 1));
  if (all_zero && v.inject_drift_excess <= 0.0) {
    rep.degenerate = true;
    rep.slope_ok = rep.drift_ok = rep.envelope_ok = rep.nmin_ok = true;
    rep.drift_ok_seeds = rep.envelope_ok_seeds = rep.nmin_ok_seeds = v.seeds;
    for (const auto& r : runs) rep.deltas.push_back(r.step_deltas);
    return rep;
  }

  rep.bound = prop2_bound(s, rep.C1, rep.C2, v.delta, v.stop_step);
  if (v.inject_drift_excess > 0.0) {
    Trajectory& t = runs.front();
    Tensor push = x0;
    push[0] += rep.bound.kappa + v.inject_drift_excess;
    t.states.back() = push;
    t.step_deltas.back() = distance(t.states.back(), t.states[t.states.size() - 2]);
  }

  const Trajectory mean = mean_trajectory(runs);
  try {
    rep.slope = step_decay_fit(mean, v.burn_in);
    rep.slope_ok = std::abs(rep.slope - rep.slope_target) <= v.slope_tolerance * std::abs(rep.slope_target);
  } catch (const std::invalid_argument& e) {
    rep.failures.push_back(std::string("slope fit: ") + e.what());
  }

  for (std::size_t i = 0; i < runs.size(); ++i) {
    const Trajectory& t = runs[i];
    rep.deltas.push_back(t.step_deltas);
    const double drift = distance(t.states.back(), t.states.front());
    rep.max_drift = std::max(rep.max_drift, drift);
    if (drift <= rep.bound.kappa) ++rep.drift_ok_seeds;

    bool env = true;
    int first_below = -1;
    for (int n = 1; n <= t.stages(); ++n) {
      const double dl = t.step_deltas[static_cast<std::size_t>(n - 1)];
      if (n >= v.envelope_from && dl > rep.bound.envelope(n)) env = false;
      if (first_below < 0 && dl < v.delta) first_below = n;
    }
    if (env) ++rep.envelope_ok_seeds;
    if (first_below > 0 && first_below <= rep.bound.n_min) ++rep.nmin_ok_seeds;
  }
  rep.drift_ok = rep.drift_ok_seeds == v.seeds;
  rep.envelope_ok = rep.envelope_ok_seeds == v.seeds;
  rep.nmin_ok = rep.nmin_ok_seeds >= v.min_seeds_nmin;

  std::ostringstream msg;
  if (!rep.slope_ok) {
    msg.str("");
    msg << "decay slope " << rep.slope << " is not within " << v.slope_tolerance * 100
        << "% of " << rep.slope_target;
    rep.failures.push_back(msg.str());
  }
  if (!rep.drift_ok) {
    msg.str("");
    msg << "drift exceeds kappa=" << rep.bound.kappa << " in " << v.seeds - rep.drift_ok_seeds
        << " seed(s), max drift " << rep.max_drift;
    rep.failures.push_back(msg.str());
  }
  if (!rep.envelope_ok) {
    msg.str("");
    msg << "envelope exceeded for n>=" << v.envelope_from << " in "
        << v.seeds - rep.envelope_ok_seeds << " seed(s)";
    rep.failures.push_back(msg.str());
  }
  if (!rep.nmin_ok) {
    msg.str("");
    msg << "n_min=" << rep.bound.n_min << " bounds the first stage with delta<" << v.delta
        << " in only " << rep.nmin_ok_seeds << "/" << v.seeds << " seeds (need "
        << v.min_seeds_nmin << ")";
    rep.failures.push_back(msg.str());
  }
  return rep;
}

int cmd_verify_bounds(const CliOptions& opts) {
  const RunConfig cfg = resolve(opts);
  const fs::path out(cfg.out);
  fs::create_directories(out);
  const VerifyReport rep = run_verification(cfg);

  io::CsvWriter csv({"seed", "stage", "delta", "envelope"});
  for (std::size_t i = 0; i < rep.deltas.size(); ++i) {
    for (std::size_t n = 0; n < rep.deltas[i].size(); ++n) {
      const int stage = static_cast<int>(n) + 1;
      csv.row({std::to_string(i), std::to_string(stage), io::CsvWriter::num(rep.deltas[i][n]),
               io::CsvWriter::num(rep.degenerate ? 0.0 : rep.bound.envelope(stage))});
    }
  }
  csv.save(out / "verify_deltas.csv");

  json hashed = cfg.raw;
  hashed.erase("jobs");
  json report{{"command", "verify-bounds"},
              {"complete", true},
              {"config_hash", config_hash(hashed)},
              {"library_version", MVG_VERSION},
              {"passed", rep.passed()},
              {"degenerate", rep.degenerate},
              {"C1", rep.C1},
              {"C2", rep.C2},
              {"alpha0", rep.bound.alpha0},
              {"alpha1", rep.bound.alpha1},
              {"lambda", rep.bound.lambda},
              {"C", rep.bound.C},
              {"n_min", rep.bound.n_min},
              {"kappa", rep.bound.kappa},
              {"slope", rep.slope},
              {"slope_target", rep.slope_target},
              {"max_drift", rep.max_drift},
              {"checks",
               {{"slope", rep.slope_ok},
                {"drift", {{"ok", rep.drift_ok}, {"seeds", rep.drift_ok_seeds}}},
                {"envelope", {{"ok", rep.envelope_ok}, {"seeds", rep.envelope_ok_seeds}}},
                {"n_min", {{"ok", rep.nmin_ok}, {"seeds", rep.nmin_ok_seeds}}}}},
              {"failures", rep.failures},
              {"config", cfg.raw}};
  io::write_text(out / "verify_report.json", report.dump(2) + "\n");

  spdlog::info("verify-bounds: slope {:.5f} vs {:.5f}, max drift {:.4f} vs kappa {:.4f}, n_min {}",
               rep.slope, rep.slope_target, rep.max_drift, rep.bound.kappa, rep.bound.n_min);
  for (const auto& f : rep.failures) spdlog::error("verify-bounds: {}", f);
  return rep.passed() ? 0 : 1;
}

}  // namespace mvg::cli
