#pragma once

#include "mvg/condition.hpp"
#include "mvg/gmm.hpp"
#include "mvg/mask.hpp"
#include "mvg/tensor.hpp"

#include <cstdint>
#include <vector>

namespace mvg::toy {

/// A lesion class: a blob at a fixed center whose radius and intensity grow
/// with severity s as  radius = base_radius + radius_gain * s  and
/// intensity = base_intensity + intensity_gain * s.
struct ClassSpec {
  int class_id = 0;
  double center_row = 7.5;
  double center_col = 7.5;
  double base_radius = 2.0;
  double base_intensity = 0.2;
};

/// "Growing blob" image family.  Pixel (i, j) sits at coordinates (i, j).
struct DomainSpec {
  Index height = 16;
  Index width = 16;
  std::vector<ClassSpec> classes;
  double radius_gain = 3.0;
  double intensity_gain = 0.6;
  double sigma = 0.05;  // isotropic pixel noise
  double feather = 1.0;  // width of the cosine edge, pixels
  std::vector<double> severity_grid{0.0, 0.25, 0.5, 0.75, 1.0};

  Shape plane() const { return {height, width}; }

  /// Two concentric classes on a 16x16 plane: class 0 uses the base map
  /// (radius 2, intensity 0.2), class 1 starts larger and brighter
  /// (radius 3, intensity 0.4).
  static DomainSpec default_spec();

  /// Throws std::invalid_argument on bad geometry or intensities.
  void validate() const;

  const ClassSpec& class_spec(int class_id) const;
};

/// Noise-free blob image for (class, severity).
Tensor render_blob(const DomainSpec& spec, int class_id, double severity);

/// One isotropic component per (class, severity grid point); mean = rendered
/// blob, variance = sigma^2.
GmmModel build_domain(const DomainSpec& spec);

/// n i.i.d. draws from m.conditional(y); deterministic in seed.
std::vector<Tensor> sample(const GmmModel& m, const Condition& y, int n,
                           std::uint64_t seed);

enum class MaskKind { kDisk, kRect, kFull, kEmpty };

struct MaskParams {
  double center_row = 0.0;
  double center_col = 0.0;
  double radius = 0.0;
  Index row0 = 0, col0 = 0, row1 = 0, col1 = 0;  // inclusive rectangle
  double feather = 0.0;  // 0 gives a binary disk
};

/// Throws std::invalid_argument for geometry outside the plane.
RoiMask make_mask(const DomainSpec& spec, MaskKind kind,
                  const MaskParams& params = {});

}  // namespace mvg::toy
