#pragma once

#include <algorithm>

namespace mvg {

/// Conditioning label: a class and a severity in [0,1].
///
/// A condition may also carry a secondary (class, severity) pair with a
/// blend weight; the model then mixes the two conditional distributions.
/// This is how walks between different classes are expressed.
struct Condition {
  int class_id = 0;
  double severity = 0.0;

  int blend_class = -1;
  double blend_severity = 0.0;
  double blend_weight = 0.0;

  Condition() = default;
  Condition(int cls, double sev)
      : class_id(cls), severity(std::clamp(sev, 0.0, 1.0)) {}

  bool blended() const { return blend_class >= 0 && blend_weight > 0.0; }

  friend bool operator==(const Condition&, const Condition&) = default;
};

/// Condition at weight w in [0,1] on the way from `from` to `to`.
/// w == 0 returns `from` and w == 1 returns `to` exactly.  Same-class
/// endpoints interpolate severity; different classes produce a blend.
inline Condition interpolate_condition(const Condition& from,
                                       const Condition& to, double w) {
  w = std::clamp(w, 0.0, 1.0);
  if (w == 0.0) return from;
  if (w == 1.0) return to;
  if (from.class_id == to.class_id && !from.blended() && !to.blended()) {
    return Condition(from.class_id,
                     (1.0 - w) * from.severity + w * to.severity);
  }
  Condition c(from.class_id, from.severity);
  c.blend_class = to.class_id;
  c.blend_severity = to.severity;
  c.blend_weight = w;
  return c;
}

}  // namespace mvg
