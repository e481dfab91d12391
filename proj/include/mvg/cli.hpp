#pragma once

#include "mvg/condition.hpp"
#include "mvg/denoiser.hpp"
#include "mvg/gmm.hpp"
#include "mvg/metrics.hpp"
#include "mvg/pie.hpp"
#include "mvg/schedule.hpp"
#include "mvg/toydata.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mvg::cli {

using nlohmann::json;

struct ScheduleSpec {
  int T = 50;
  // Both unset means the rescaled default ramp.
  std::optional<double> beta_start;
  std::optional<double> beta_end;

  NoiseSchedule build() const;
  json describe() const;
};

struct MaskSpec {
  enum class Kind { kDisk, kRect, kFull, kEmpty, kFile } kind = Kind::kDisk;
  toy::MaskParams params{7.5, 7.5, 7.0, 0, 0, 0, 0, 2.0};
  std::string path;

  RoiMask build(const toy::DomainSpec& domain) const;
};

struct StartSpec {
  enum class Kind { kSample, kMean, kFile } kind = Kind::kSample;
  std::uint64_t seed = 0;
  std::string path;
};

struct EmbedderSpec {
  enum class Kind { kProjection, kIdentity } kind = Kind::kProjection;
  Index features = 64;
  std::uint64_t seed = 0;

  std::unique_ptr<Embedder> build(Index input_dim) const;
};

struct DenoiserSpec {
  enum class Kind { kGmm, kParzen } kind = Kind::kGmm;
  int samples = 2000;  // parzen dataset size
  std::uint64_t seed = 0;
};

struct VideoSpec {
  int K = 8;
  double gamma = 0.3;
  std::string trajectory;      // defaults to <out>/seed_<first seed>
  int inject_seam_break = -1;  // debug: perturb the head of this clip
};

struct AblationSpec {
  std::vector<double> gammas{0.1, 0.2, 0.4, 0.6, 0.8};
  std::vector<int> steps{1, 5, 10, 50, 100};
  double gamma_for_steps = 0.5;
  std::vector<double> beta1s{0.01, 0.1, 0.2};
  std::vector<double> beta2s{1.0, 0.75, 0.5};
  int starts = 8;
};

struct VerifySpec {
  int T = 2;
  double beta = 0.1;
  int stop_step = 1;
  int stages = 100;
  int seeds = 50;
  double delta = 0.01;
  int burn_in = 5;
  int envelope_from = 5;
  double prior_variance = 1.0;
  double slope_tolerance = 0.2;
  int min_seeds_nmin = 45;
  double inject_drift_excess = 0.0;  // debug: push seed 0 past kappa
};

/// Everything a command needs, parsed from one JSON document.
struct RunConfig {
  toy::DomainSpec domain = toy::DomainSpec::default_spec();
  ScheduleSpec schedule;
  PieConfig pie;
  MaskSpec mask;
  Condition source{0, 0.0};
  Condition target{1, 1.0};
  StartSpec start;
  DenoiserSpec denoiser;
  std::vector<std::string> metrics{"conf", "clip_i", "kid", "mae"};
  EmbedderSpec embedder;
  std::string mae_reference;
  int kid_reference = 200;  // target samples for KID
  std::vector<std::uint64_t> seeds{0};
  std::string out = "out";
  int jobs = 1;
  VideoSpec video;
  AblationSpec ablation;
  VerifySpec verify;

  json raw;  // the document as parsed, after command-line overrides

  bool wants(const std::string& metric) const;
};

/// Throws std::invalid_argument on unknown keys, wrong types or bad values,
/// and std::runtime_error when a referenced file does not exist.
RunConfig parse_config(const json& doc);
RunConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64 of the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string config_hash(const json& doc);

/// Options shared by every subcommand; empty fields leave the file's values.
struct CliOptions {
  std::filesystem::path config;
  std::optional<std::string> out;
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<int> jobs;
};

/// Parses "1,2,3".  Throws std::invalid_argument on junk.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

RunConfig resolve(const CliOptions& opts);

/// Runs fn(0..n-1) on up to `jobs` threads.  The first exception thrown by
/// any task is rethrown after all threads join.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// The pieces of a run shared by every command.
struct Context {
  RunConfig cfg;
  NoiseSchedule schedule;
  GmmModel model;
  RoiMask mask;
  std::unique_ptr<Denoiser> denoiser;
  std::unique_ptr<Embedder> embedder;

  explicit Context(RunConfig config);
  // The denoiser keeps references into this object.
  Context(const Context&) = delete;
  Context& operator=(const Context&) = delete;

  Tensor start_image() const;
  /// MAE reference: the configured file, else the target conditional mean.
  Tensor mae_reference() const;
};

struct StageMetrics {
  int stage = 0;
  double conf = 0.0;
  double clip_i = 0.0;  // cosine to the initial state
  double kid = 0.0;     // NaN when not computed
  double mae = 0.0;
};

std::vector<StageMetrics> stage_metrics(const Context& ctx, const Trajectory& traj);

struct AblationRow {
  double gamma = 0.0;
  int N = 0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double conf = 0.0;
  double clip_i = 0.0;
  double kid = 0.0;
};

struct AblationTables {
  std::vector<AblationRow> gamma;
  std::vector<AblationRow> steps;
  std::vector<AblationRow> beta;
};

/// Each grid point runs ablation.starts start images x cfg.seeds PIE seeds.
AblationTables run_ablation(const Context& ctx);

struct VerifyReport {
  ConvergenceBound bound;
  bool degenerate = false;  // every delta is zero, nothing to fit
  double C1 = 0.0;
  double C2 = 0.0;
  double slope = 0.0;
  double slope_target = 0.0;
  bool slope_ok = false;
  int drift_ok_seeds = 0;
  double max_drift = 0.0;
  bool drift_ok = false;
  int envelope_ok_seeds = 0;
  bool envelope_ok = false;
  int nmin_ok_seeds = 0;
  bool nmin_ok = false;
  int seeds = 0;
  std::vector<std::vector<double>> deltas;  // per seed
  std::vector<std::string> failures;

  bool passed() const { return slope_ok && drift_ok && envelope_ok && nmin_ok; }
};

/// The pure-PIE suite: full mask, unit blends, one reverse step per stage
/// landing on abar(stop_step), single-Gaussian prior with the target blob as
/// mean, start at the source blob.
VerifyReport run_verification(const RunConfig& cfg);

int cmd_simulate(const CliOptions& opts);
int cmd_video(const CliOptions& opts);
int cmd_ablate(const CliOptions& opts);
int cmd_verify_bounds(const CliOptions& opts);
int cmd_metrics(const CliOptions& opts);

/// Subcommand dispatch for the executable; returns the exit status.
int run(int argc, char** argv);

}  // namespace mvg::cli
