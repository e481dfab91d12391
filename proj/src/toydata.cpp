#include "mvg/toydata.hpp"

#include "mvg/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mvg::toy {

namespace {

// 1 inside radius - f/2, 0 outside radius + f/2, raised-cosine in between.
double cosine_edge(double r, double radius, double feather) {
  if (feather <= 0.0) return r <= radius ? 1.0 : 0.0;
  const double inner = radius - 0.5 * feather;
  if (r <= inner) return 1.0;
  if (r >= radius + 0.5 * feather) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (r - inner) / feather));
}

}  // namespace

DomainSpec DomainSpec::default_spec() {
  DomainSpec spec;
  spec.classes = {{0, 7.5, 7.5, 2.0, 0.2}, {1, 7.5, 7.5, 3.0, 0.4}};
  return spec;
}

void DomainSpec::validate() const {
  if (height < 1 || width < 1) {
    throw std::invalid_argument("domain: empty image plane");
  }
  if (classes.empty()) throw std::invalid_argument("domain: no classes");
  if (severity_grid.empty()) {
    throw std::invalid_argument("domain: empty severity grid");
  }
  if (!(sigma > 0.0)) throw std::invalid_argument("domain: sigma must be > 0");
  if (feather < 0.0) throw std::invalid_argument("domain: negative feather");
  const double max_radius = 0.5 * static_cast<double>(std::min(height, width));
  for (const auto& c : classes) {
    if (c.center_row < 0 || c.center_row > height - 1 || c.center_col < 0 ||
        c.center_col > width - 1) {
      throw std::invalid_argument("domain: class " +
                                  std::to_string(c.class_id) +
                                  " center outside the plane");
    }
    for (double s : severity_grid) {
      if (s < 0.0 || s > 1.0) {
        throw std::invalid_argument("domain: severity grid outside [0,1]");
      }
      const double radius = c.base_radius + radius_gain * s;
      const double intensity = c.base_intensity + intensity_gain * s;
      if (radius < 0.0 || radius > max_radius) {
        throw std::invalid_argument(
            "domain: class " + std::to_string(c.class_id) + " radius " +
            std::to_string(radius) + " exceeds min(H,W)/2");
      }
      if (intensity < 0.0 || intensity > 1.0) {
        throw std::invalid_argument("domain: class " +
                                    std::to_string(c.class_id) +
                                    " intensity outside [0,1]");
      }
    }
  }
}

const ClassSpec& DomainSpec::class_spec(int class_id) const {
  for (const auto& c : classes) {
    if (c.class_id == class_id) return c;
  }
  throw std::invalid_argument("domain: unknown class " +
                              std::to_string(class_id));
}

Tensor render_blob(const DomainSpec& spec, int class_id, double severity) {
  const ClassSpec& c = spec.class_spec(class_id);
  const double radius = c.base_radius + spec.radius_gain * severity;
  const double intensity = c.base_intensity + spec.intensity_gain * severity;
  Tensor img(spec.plane());
  for (Index i = 0; i < spec.height; ++i) {
    for (Index j = 0; j < spec.width; ++j) {
      const double r = std::hypot(static_cast<double>(i) - c.center_row,
                                  static_cast<double>(j) - c.center_col);
      img[i * spec.width + j] = intensity * cosine_edge(r, radius, spec.feather);
    }
  }
  return img;
}

GmmModel build_domain(const DomainSpec& spec) {
  spec.validate();
  std::vector<GmmModel::ClassEntry> classes;
  const double var = spec.sigma * spec.sigma;
  for (const auto& c : spec.classes) {
    GmmModel::ClassEntry e;
    e.class_id = c.class_id;
    for (double s : spec.severity_grid) {
      e.anchors.push_back(
          {s, Mixture::single(render_blob(spec, c.class_id, s).values(), var)});
    }
    classes.push_back(std::move(e));
  }
  return GmmModel(spec.plane(), std::move(classes));
}

std::vector<Tensor> sample(const GmmModel& m, const Condition& y, int n,
                           std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  const Mixture mix = m.conditional(y);
  const NoiseStream stream(seed);
  std::vector<Tensor> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto stage = static_cast<std::uint32_t>(i);
    Index k = 0;
    if (mix.components() > 1) {
      double u = stream.uniform(StreamTag::kSample, stage, 0, 0);
      while (k + 1 < mix.components() && u > mix.weights(k)) {
        u -= mix.weights(k);
        ++k;
      }
    }
    Tensor z = stream.normal_tensor(m.image_shape(), StreamTag::kSample, stage, 1);
    out.push_back(
        z.with_values(mix.means.col(k) + std::sqrt(mix.variances(k)) * z.values()));
  }
  return out;
}

RoiMask make_mask(const DomainSpec& spec, MaskKind kind,
                  const MaskParams& p) {
  const Shape plane = spec.plane();
  switch (kind) {
    case MaskKind::kFull:
      return RoiMask::constant(plane, 1.0);
    case MaskKind::kEmpty:
      return RoiMask::constant(plane, 0.0);
    case MaskKind::kDisk: {
      if (p.center_row < 0 || p.center_row > spec.height - 1 ||
          p.center_col < 0 || p.center_col > spec.width - 1) {
        throw std::invalid_argument("make_mask: disk center outside the plane");
      }
      if (p.radius < 0.0 || p.feather < 0.0) {
        throw std::invalid_argument("make_mask: negative radius or feather");
      }
      Tensor w(plane);
      for (Index i = 0; i < spec.height; ++i) {
        for (Index j = 0; j < spec.width; ++j) {
          const double r = std::hypot(static_cast<double>(i) - p.center_row,
                                      static_cast<double>(j) - p.center_col);
          w[i * spec.width + j] = cosine_edge(r, p.radius, p.feather);
        }
      }
      return RoiMask(std::move(w));
    }
    case MaskKind::kRect: {
      if (p.row0 < 0 || p.col0 < 0 || p.row1 >= spec.height ||
          p.col1 >= spec.width || p.row0 > p.row1 || p.col0 > p.col1) {
        throw std::invalid_argument("make_mask: rectangle outside the plane");
      }
      Tensor w(plane);
      for (Index i = p.row0; i <= p.row1; ++i) {
        for (Index j = p.col0; j <= p.col1; ++j) w[i * spec.width + j] = 1.0;
      }
      return RoiMask(std::move(w));
    }
  }
  throw std::invalid_argument("make_mask: unknown kind");
}

}  // namespace mvg::toy
