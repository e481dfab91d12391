#include "mvg/cli.hpp"
#include "mvg/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace mvg::cli {

namespace fs = std::filesystem;

namespace {

void allow_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw std::invalid_argument(where + ": expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) {
      throw std::invalid_argument(where + ": unknown key \"" + key + "\"");
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& dst, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    dst = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument(where + "." + key + ": wrong type");
  }
}

std::pair<double, double> read_pair(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw std::invalid_argument(where + ": expected [row, col]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

Condition read_condition(const json& v, const std::string& where) {
  allow_keys(v, where, {"class", "severity"});
  int cls = 0;
  double sev = 0.0;
  read(v, "class", cls, where);
  read(v, "severity", sev, where);
  if (sev < 0.0 || sev > 1.0) throw std::invalid_argument(where + ".severity outside [0,1]");
  return Condition(cls, sev);
}

void require_file(const std::string& path, const std::string& what) {
  if (!path.empty() && !fs::exists(path)) {
    throw std::runtime_error(what + ": file not found: " + path);
  }
}

void parse_domain(const json& d, toy::DomainSpec& spec) {
  const std::string w = "domain";
  allow_keys(d, w, {"height", "width", "sigma", "feather", "radius_gain", "intensity_gain",
                    "severity_grid", "classes"});
  read(d, "height", spec.height, w);
  read(d, "width", spec.width, w);
  read(d, "sigma", spec.sigma, w);
  read(d, "feather", spec.feather, w);
  read(d, "radius_gain", spec.radius_gain, w);
  read(d, "intensity_gain", spec.intensity_gain, w);
  read(d, "severity_grid", spec.severity_grid, w);
  if (d.contains("classes")) {
    if (!d["classes"].is_array()) throw std::invalid_argument("domain.classes: expected a list");
    spec.classes.clear();
    for (const auto& c : d["classes"]) {
      const std::string cw = "domain.classes[]";
      allow_keys(c, cw, {"id", "center", "base_radius", "base_intensity"});
      toy::ClassSpec cs;
      read(c, "id", cs.class_id, cw);
      if (c.contains("center")) {
        std::tie(cs.center_row, cs.center_col) = read_pair(c["center"], cw + ".center");
      }
      read(c, "base_radius", cs.base_radius, cw);
      read(c, "base_intensity", cs.base_intensity, cw);
      spec.classes.push_back(cs);
    }
  }
  spec.validate();
}

}  // namespace

NoiseSchedule ScheduleSpec::build() const {
  if (beta_start.has_value() != beta_end.has_value()) {
    throw std::invalid_argument("schedule: give both beta_start and beta_end or neither");
  }
  if (beta_start) return build_schedule(T, *beta_start, *beta_end);
  return build_default_schedule(T);
}

json ScheduleSpec::describe() const {
  const NoiseSchedule s = build();
  return json{{"T", T},
              {"beta_start", s.beta(1)},
              {"beta_end", s.beta(T)},
              {"alpha_bar_T", s.alpha_bar(T)},
              {"ramp", beta_start ? "linear" : "linear_default"}};
}

RoiMask MaskSpec::build(const toy::DomainSpec& domain) const {
  switch (kind) {
    case Kind::kDisk:
      return toy::make_mask(domain, toy::MaskKind::kDisk, params);
    case Kind::kRect:
      return toy::make_mask(domain, toy::MaskKind::kRect, params);
    case Kind::kFull:
      return toy::make_mask(domain, toy::MaskKind::kFull);
    case Kind::kEmpty:
      return toy::make_mask(domain, toy::MaskKind::kEmpty);
    case Kind::kFile: {
      Tensor w = io::read_tensor(path);
      if (w.dims() != domain.plane()) {
        throw std::invalid_argument("mask file " + path + " has shape " +
                                    shape_string(w.dims()) + ", expected " +
                                    shape_string(domain.plane()));
      }
      return RoiMask(std::move(w));
    }
  }
  throw std::invalid_argument("mask: unknown kind");
}

std::unique_ptr<Embedder> EmbedderSpec::build(Index input_dim) const {
  if (kind == Kind::kIdentity) return std::make_unique<IdentityEmbedder>(input_dim);
  return std::make_unique<RandomProjectionEmbedder>(input_dim, features, seed);
}

bool RunConfig::wants(const std::string& metric) const {
  return std::find(metrics.begin(), metrics.end(), metric) != metrics.end();
}

RunConfig parse_config(const json& doc) {
  allow_keys(doc, "config",
             {"domain", "schedule", "pie", "mask", "source", "target", "start", "denoiser",
              "metrics", "embedder", "mae_reference", "kid_reference", "seeds", "out", "jobs",
              "video", "ablation", "verify"});
  RunConfig cfg;
  cfg.raw = doc;
  if (doc.contains("domain")) parse_domain(doc["domain"], cfg.domain);

  if (doc.contains("schedule")) {
    const json& s = doc["schedule"];
    allow_keys(s, "schedule", {"T", "beta_start", "beta_end"});
    read(s, "T", cfg.schedule.T, "schedule");
    if (s.contains("beta_start")) cfg.schedule.beta_start = s["beta_start"].get<double>();
    if (s.contains("beta_end")) cfg.schedule.beta_end = s["beta_end"].get<double>();
  }
  const NoiseSchedule schedule = cfg.schedule.build();

  if (doc.contains("pie")) {
    const json& p = doc["pie"];
    const std::string w = "pie";
    allow_keys(p, w, {"N", "gamma", "beta1", "beta2", "stop_step", "composite_base"});
    read(p, "N", cfg.pie.N, w);
    read(p, "gamma", cfg.pie.gamma, w);
    read(p, "beta1", cfg.pie.beta1, w);
    read(p, "beta2", cfg.pie.beta2, w);
    read(p, "stop_step", cfg.pie.stop_step, w);
    std::string base = "origin";
    read(p, "composite_base", base, w);
    if (base == "origin") {
      cfg.pie.base = CompositeBase::kOrigin;
    } else if (base == "previous") {
      cfg.pie.base = CompositeBase::kPrevious;
    } else {
      throw std::invalid_argument("pie.composite_base: expected origin or previous");
    }
  }
  cfg.pie.validate(schedule);

  if (doc.contains("mask")) {
    const json& m = doc["mask"];
    const std::string w = "mask";
    allow_keys(m, w, {"kind", "center", "radius", "feather", "rows", "cols", "path"});
    std::string kind = "disk";
    read(m, "kind", kind, w);
    auto& p = cfg.mask.params;
    if (kind == "disk") {
      cfg.mask.kind = MaskSpec::Kind::kDisk;
      if (m.contains("center")) std::tie(p.center_row, p.center_col) = read_pair(m["center"], "mask.center");
      read(m, "radius", p.radius, w);
      read(m, "feather", p.feather, w);
    } else if (kind == "rect") {
      cfg.mask.kind = MaskSpec::Kind::kRect;
      const auto rows = read_pair(m.value("rows", json::array({0, 0})), "mask.rows");
      const auto cols = read_pair(m.value("cols", json::array({0, 0})), "mask.cols");
      p.row0 = static_cast<Index>(rows.first);
      p.row1 = static_cast<Index>(rows.second);
      p.col0 = static_cast<Index>(cols.first);
      p.col1 = static_cast<Index>(cols.second);
    } else if (kind == "full") {
      cfg.mask.kind = MaskSpec::Kind::kFull;
    } else if (kind == "empty") {
      cfg.mask.kind = MaskSpec::Kind::kEmpty;
    } else if (kind == "file") {
      cfg.mask.kind = MaskSpec::Kind::kFile;
      read(m, "path", cfg.mask.path, w);
      if (cfg.mask.path.empty()) throw std::invalid_argument("mask.path: required for kind file");
      require_file(cfg.mask.path, "mask.path");
    } else {
      throw std::invalid_argument("mask.kind: unknown kind \"" + kind + "\"");
    }
  }
  cfg.mask.build(cfg.domain);

  if (doc.contains("source")) cfg.source = read_condition(doc["source"], "source");
  if (doc.contains("target")) cfg.target = read_condition(doc["target"], "target");
  for (const Condition* c : {&cfg.source, &cfg.target}) {
    cfg.domain.class_spec(c->class_id);
  }

  if (doc.contains("start")) {
    const json& s = doc["start"];
    allow_keys(s, "start", {"kind", "seed", "path"});
    std::string kind = "sample";
    read(s, "kind", kind, "start");
    read(s, "seed", cfg.start.seed, "start");
    read(s, "path", cfg.start.path, "start");
    if (kind == "sample") {
      cfg.start.kind = StartSpec::Kind::kSample;
    } else if (kind == "mean") {
      cfg.start.kind = StartSpec::Kind::kMean;
    } else if (kind == "file") {
      cfg.start.kind = StartSpec::Kind::kFile;
      if (cfg.start.path.empty()) throw std::invalid_argument("start.path: required for kind file");
      require_file(cfg.start.path, "start.path");
    } else {
      throw std::invalid_argument("start.kind: unknown kind \"" + kind + "\"");
    }
  }

  if (doc.contains("denoiser")) {
    const json& d = doc["denoiser"];
    allow_keys(d, "denoiser", {"kind", "samples", "seed"});
    std::string kind = "gmm";
    read(d, "kind", kind, "denoiser");
    read(d, "samples", cfg.denoiser.samples, "denoiser");
    read(d, "seed", cfg.denoiser.seed, "denoiser");
    if (kind == "gmm") {
      cfg.denoiser.kind = DenoiserSpec::Kind::kGmm;
    } else if (kind == "parzen") {
      cfg.denoiser.kind = DenoiserSpec::Kind::kParzen;
      if (cfg.denoiser.samples < 1) throw std::invalid_argument("denoiser.samples must be >= 1");
    } else {
      throw std::invalid_argument("denoiser.kind: unknown kind \"" + kind + "\"");
    }
  }

  read(doc, "metrics", cfg.metrics, "config");
  for (const auto& m : cfg.metrics) {
    if (m != "conf" && m != "clip_i" && m != "kid" && m != "mae") {
      throw std::invalid_argument("metrics: unknown metric \"" + m + "\"");
    }
  }
  if (doc.contains("embedder")) {
    const json& e = doc["embedder"];
    allow_keys(e, "embedder", {"kind", "features", "seed"});
    std::string kind = "projection";
    read(e, "kind", kind, "embedder");
    read(e, "features", cfg.embedder.features, "embedder");
    read(e, "seed", cfg.embedder.seed, "embedder");
    if (kind == "projection") {
      cfg.embedder.kind = EmbedderSpec::Kind::kProjection;
    } else if (kind == "identity") {
      cfg.embedder.kind = EmbedderSpec::Kind::kIdentity;
    } else {
      throw std::invalid_argument("embedder.kind: unknown kind \"" + kind + "\"");
    }
  }
  read(doc, "mae_reference", cfg.mae_reference, "config");
  require_file(cfg.mae_reference, "mae_reference");
  read(doc, "kid_reference", cfg.kid_reference, "config");
  if (cfg.kid_reference < 2) throw std::invalid_argument("kid_reference must be >= 2");
  read(doc, "seeds", cfg.seeds, "config");
  if (cfg.seeds.empty()) throw std::invalid_argument("seeds: need at least one seed");
  read(doc, "out", cfg.out, "config");
  read(doc, "jobs", cfg.jobs, "config");
  if (cfg.jobs < 1) throw std::invalid_argument("jobs must be >= 1");

  if (doc.contains("video")) {
    const json& v = doc["video"];
    allow_keys(v, "video", {"K", "gamma", "trajectory", "inject_seam_break"});
    read(v, "K", cfg.video.K, "video");
    read(v, "gamma", cfg.video.gamma, "video");
    read(v, "trajectory", cfg.video.trajectory, "video");
    read(v, "inject_seam_break", cfg.video.inject_seam_break, "video");
    if (cfg.video.K < 2) throw std::invalid_argument("video.K must be >= 2");
  }

  if (doc.contains("ablation")) {
    const json& a = doc["ablation"];
    const std::string w = "ablation";
    allow_keys(a, w, {"gammas", "steps", "gamma_for_steps", "beta1s", "beta2s", "starts"});
    read(a, "gammas", cfg.ablation.gammas, w);
    read(a, "steps", cfg.ablation.steps, w);
    read(a, "gamma_for_steps", cfg.ablation.gamma_for_steps, w);
    read(a, "beta1s", cfg.ablation.beta1s, w);
    read(a, "beta2s", cfg.ablation.beta2s, w);
    read(a, "starts", cfg.ablation.starts, w);
    if (cfg.ablation.starts < 1) throw std::invalid_argument("ablation.starts must be >= 1");
  }

  if (doc.contains("verify")) {
    const json& v = doc["verify"];
    const std::string w = "verify";
    allow_keys(v, w, {"T", "beta", "stop_step", "stages", "seeds", "delta", "burn_in",
                      "envelope_from", "prior_variance", "slope_tolerance", "min_seeds_nmin",
                      "inject_drift_excess"});
    auto& s = cfg.verify;
    read(v, "T", s.T, w);
    read(v, "beta", s.beta, w);
    read(v, "stop_step", s.stop_step, w);
    read(v, "stages", s.stages, w);
    read(v, "seeds", s.seeds, w);
    read(v, "delta", s.delta, w);
    read(v, "burn_in", s.burn_in, w);
    read(v, "envelope_from", s.envelope_from, w);
    read(v, "prior_variance", s.prior_variance, w);
    read(v, "slope_tolerance", s.slope_tolerance, w);
    read(v, "min_seeds_nmin", s.min_seeds_nmin, w);
    read(v, "inject_drift_excess", s.inject_drift_excess, w);
    if (s.T < 1 || s.stop_step < 0 || s.stop_step >= s.T || s.stages < 1 || s.seeds < 1 ||
        !(s.delta > 0) || !(s.prior_variance > 0)) {
      throw std::invalid_argument("verify: invalid suite parameters");
    }
  }
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw std::runtime_error("config not found: " + path.string());
  json doc;
  try {
    doc = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

std::string config_hash(const json& doc) {
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw std::invalid_argument("--seeds: not an unsigned integer: \"" + item + "\"");
    }
    seeds.push_back(v);
  }
  if (seeds.empty()) throw std::invalid_argument("--seeds: empty list");
  return seeds;
}

RunConfig resolve(const CliOptions& opts) {
  if (!fs::exists(opts.config)) {
    throw std::runtime_error("config not found: " + opts.config.string());
  }
  json doc = json::parse(io::read_text(opts.config));
  if (opts.out) doc["out"] = *opts.out;
  if (opts.seeds) doc["seeds"] = *opts.seeds;
  if (opts.jobs) doc["jobs"] = *opts.jobs;
  return parse_config(doc);
}

}  // namespace mvg::cli
