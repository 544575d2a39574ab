#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "liefm/groups.hpp"
#include "liefm/rng.hpp"

namespace liefm {

/// Group elements with optional per-sample times.
struct SampleBatch {
  std::vector<GroupElement> elements;
  std::vector<double> times;  // empty, or one per element

  std::size_t size() const { return elements.size(); }
};

/**
 * Named toy distribution with parameter overrides.
 *
 * Text form: `name` or `name:key=value,key=value`, optionally prefixed by the
 * group id (`se2-hline`). For product groups, factor specs are joined with
 * '+' (`hline+gaussian`); a single name is applied to every factor.
 *
 * Presets (all groups unless noted):
 *   point     point mass at exp(at * (1, ..., 1)); `at` defaults to 0
 *   gaussian  R^d only: N(at * 1, sigma^2 I), sigma 0.3
 *   hline     horizontal line, s ~ U[-extent, extent], jitter sigma 0.05
 *   vline     vertical line, same parameters
 *   circle    radius-`radius` circle (0.7) with tangent orientation, jitter 0.05
 *
 * On SE(2) lines carry the orientation of the line (0 or pi/2). On SO(3),
 * with the arrow picture (position R e3, direction R e1), lines are 90 degree
 * great-circle arcs exp(s A_axis) R_base with extent pi/4, and the circle is
 * a full great circle; jitter is R exp(sigma xi), xi ~ N(0, I). On R^2 the
 * line and circle presets are the position parts of the SE(2) ones.
 */
struct DistributionSpec {
  std::string name;
  std::map<std::string, double> params;

  /// Throws UsageError on malformed text.
  static DistributionSpec parse(std::string_view text);
  std::string to_string() const;

  double param(const std::string& key, double fallback) const;
};

/// Sampler bound to a group; draws i.i.d. valid elements.
class Distribution {
 public:
  using DrawFn = std::function<GroupElement(Rng&)>;

  Distribution(std::string description, DrawFn draw) : description_(std::move(description)), draw_(std::move(draw)) {}

  GroupElement draw(Rng& rng) const { return draw_(rng); }
  /// n >= 1 samples; throws UsageError otherwise.
  SampleBatch sample(int n, Rng& rng) const;
  const std::string& description() const { return description_; }

 private:
  std::string description_;
  DrawFn draw_;
};

/// Resolve `spec_text` against `group`. Throws UsageError for unknown ids.
Distribution make_distribution(const Group& group, std::string_view spec_text);

/// Draw n samples; same (spec, n, seed) gives the same batch.
SampleBatch sample(const Group& group, std::string_view spec_text, int n, Rng& rng);

}  // namespace liefm
