#include "liefm/data.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace liefm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLineSigma = 0.05;
constexpr double kGaussianSigma = 0.3;
constexpr double kCircleRadius = 0.7;

const std::set<std::string> kKnownKeys = {"sigma", "extent", "radius", "at"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void unknown_preset(const std::string& name, const std::string& group) {
  throw UsageError("unknown distribution '" + name + "' for group " + group);
}

Eigen::Vector3d normal3(Rng& rng) { return {rng.normal(), rng.normal(), rng.normal()}; }

Distribution::DrawFn translation_draw(const TranslationGroup& g, const DistributionSpec& spec) {
  const int d = g.dim();
  const double at = spec.param("at", 0.0);
  if (spec.name == "point") {
    const Eigen::VectorXd p = Eigen::VectorXd::Constant(d, at);
    return [p](Rng&) { return GroupElement{p}; };
  }
  if (spec.name == "gaussian") {
    const double sigma = spec.param("sigma", kGaussianSigma);
    return [d, at, sigma](Rng& rng) {
      Eigen::VectorXd p(d);
      for (int i = 0; i < d; ++i) p[i] = at + sigma * rng.normal();
      return GroupElement{p};
    };
  }
  if (d != 2) unknown_preset(spec.name, g.name());
  const double sigma = spec.param("sigma", kLineSigma);
  if (spec.name == "hline" || spec.name == "vline") {
    const double extent = spec.param("extent", 1.0);
    const bool vertical = spec.name == "vline";
    return [sigma, extent, vertical](Rng& rng) {
      const double s = rng.uniform(-extent, extent);
      Eigen::Vector2d p = vertical ? Eigen::Vector2d(0.0, s) : Eigen::Vector2d(s, 0.0);
      p += sigma * Eigen::Vector2d(rng.normal(), rng.normal());
      return GroupElement{p};
    };
  }
  if (spec.name == "circle") {
    const double radius = spec.param("radius", kCircleRadius);
    return [sigma, radius](Rng& rng) {
      const double phi = rng.uniform(0.0, 2.0 * kPi);
      Eigen::Vector2d p(radius * std::cos(phi), radius * std::sin(phi));
      p += sigma * Eigen::Vector2d(rng.normal(), rng.normal());
      return GroupElement{p};
    };
  }
  unknown_preset(spec.name, g.name());
}

Distribution::DrawFn se2_draw(const DistributionSpec& spec) {
  if (spec.name == "point") {
    const double at = spec.param("at", 0.0);
    const GroupElement p = SE2Group::pack(se2_exp(Eigen::Vector3d::Constant(at)));
    return [p](Rng&) { return p; };
  }
  const double sigma = spec.param("sigma", kLineSigma);
  auto jitter = [sigma](SE2Element e, Rng& rng) {
    e.x += sigma * rng.normal();
    e.y += sigma * rng.normal();
    e.theta = wrap_angle(e.theta + sigma * rng.normal());
    return SE2Group::pack(e);
  };
  if (spec.name == "hline" || spec.name == "vline") {
    const double extent = spec.param("extent", 1.0);
    const bool vertical = spec.name == "vline";
    return [extent, vertical, jitter](Rng& rng) {
      const double s = rng.uniform(-extent, extent);
      const SE2Element e = vertical ? SE2Element{0.0, s, 0.5 * kPi} : SE2Element{s, 0.0, 0.0};
      return jitter(e, rng);
    };
  }
  if (spec.name == "circle") {
    const double radius = spec.param("radius", kCircleRadius);
    return [radius, jitter](Rng& rng) {
      const double phi = rng.uniform(0.0, 2.0 * kPi);
      const double x = radius * std::cos(phi);
      const double y = radius * std::sin(phi);
      // Counter-clockwise tangent direction.
      return jitter({x, y, wrap_angle(std::atan2(y, x) + 0.5 * kPi)}, rng);
    };
  }
  unknown_preset(spec.name, "se2");
}

Eigen::Matrix3d columns(const Eigen::Vector3d& c0, const Eigen::Vector3d& c1, const Eigen::Vector3d& c2) {
  Eigen::Matrix3d m;
  m << c0, c1, c2;
  return m;
}

Distribution::DrawFn so3_draw(const DistributionSpec& spec) {
  if (spec.name == "point") {
    const double at = spec.param("at", 0.0);
    const GroupElement p = SO3Group::pack(so3_exp(Eigen::Vector3d::Constant(at)));
    return [p](Rng&) { return p; };
  }
  const double sigma = spec.param("sigma", kLineSigma);
  const Eigen::Vector3d ex = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d ey = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d ez = Eigen::Vector3d::UnitZ();

  Eigen::Vector3d axis;
  Eigen::Matrix3d base;
  double lo = 0.0;
  double hi = 0.0;
  if (spec.name == "hline") {
    // Equator arc through +x, arrows pointing east.
    axis = ez;
    base = columns(ey, ez, ex);
  } else if (spec.name == "vline") {
    // Meridian arc through +x, arrows pointing along the meridian.
    axis = ey;
    base = columns(ez, -ey, ex);
  } else if (spec.name == "circle") {
    // Great circle in the y-z plane, arrows tangent to it.
    axis = ex;
    base = columns(ez, ex, ey);
  } else {
    unknown_preset(spec.name, "so3");
  }
  if (spec.name == "circle") {
    hi = 2.0 * kPi;
  } else {
    const double extent = spec.param("extent", 0.25 * kPi);
    lo = -extent;
    hi = extent;
  }
  return [axis, base, lo, hi, sigma](Rng& rng) {
    const double s = rng.uniform(lo, hi);
    Eigen::Matrix3d r = so3_exp(s * axis).matrix * base;
    if (sigma > 0.0) r = r * so3_exp(sigma * normal3(rng)).matrix;
    return SO3Group::pack({r});
  };
}

std::string strip_group_prefix(const Group& group, std::string text) {
  const std::string prefix = group.name() + "-";
  if (text.rfind(prefix, 0) == 0) text = text.substr(prefix.size());
  return text;
}

Distribution::DrawFn make_draw(const Group& group, std::string text) {
  text = strip_group_prefix(group, std::move(text));
  if (group.kind() != GroupKind::product) {
    const DistributionSpec spec = DistributionSpec::parse(text);
    if (group.kind() == GroupKind::translation) {
      return translation_draw(static_cast<const TranslationGroup&>(group), spec);
    }
    return group.kind() == GroupKind::se2 ? se2_draw(spec) : so3_draw(spec);
  }
  const auto& prod = static_cast<const ProductGroup&>(group);
  std::vector<std::string> parts = split(text, '+');
  if (parts.size() == 1) parts.assign(prod.factor_count(), parts.front());
  if (parts.size() != prod.factor_count()) {
    throw UsageError("distribution '" + text + "' has " + std::to_string(parts.size()) + " factor specs but " +
                     group.name() + " has " + std::to_string(prod.factor_count()) + " factors");
  }
  std::vector<Distribution::DrawFn> draws;
  for (std::size_t i = 0; i < parts.size(); ++i) draws.push_back(make_draw(*prod.factors()[i], parts[i]));
  const auto joined = std::make_shared<const ProductGroup>(prod.factors());
  return [draws, joined](Rng& rng) {
    std::vector<GroupElement> elements;
    for (const auto& d : draws) elements.push_back(d(rng));
    return joined->join(elements);
  };
}

}  // namespace

DistributionSpec DistributionSpec::parse(std::string_view text) {
  DistributionSpec spec;
  const auto colon = text.find(':');
  spec.name = trim(text.substr(0, colon));
  if (spec.name.empty()) throw UsageError("empty distribution name in '" + std::string(text) + "'");
  if (colon == std::string_view::npos) return spec;
  for (const auto& kv : split(text.substr(colon + 1), ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("expected key=value in distribution spec, got '" + kv + "'");
    const std::string key = trim(kv.substr(0, eq));
    if (!kKnownKeys.count(key)) throw UsageError("unknown distribution parameter '" + key + "'");
    const std::string value = trim(kv.substr(eq + 1));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != value.size() || value.empty() || !std::isfinite(v)) {
      throw UsageError("bad value for distribution parameter '" + key + "': '" + value + "'");
    }
    if ((key == "sigma" || key == "extent" || key == "radius") && v < 0.0) {
      throw UsageError("distribution parameter '" + key + "' must be >= 0");
    }
    spec.params[key] = v;
  }
  return spec;
}

std::string DistributionSpec::to_string() const {
  std::ostringstream out;
  out << name;
  char sep = ':';
  for (const auto& [k, v] : params) {
    out << sep << k << '=' << v;
    sep = ',';
  }
  return out.str();
}

double DistributionSpec::param(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

SampleBatch Distribution::sample(int n, Rng& rng) const {
  if (n < 1) throw UsageError("sample: n must be >= 1, got " + std::to_string(n));
  SampleBatch batch;
  batch.elements.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) batch.elements.push_back(draw_(rng));
  return batch;
}

Distribution make_distribution(const Group& group, std::string_view spec_text) {
  const std::string text = strip_group_prefix(group, trim(spec_text));
  return Distribution(group.name() + "-" + text, make_draw(group, text));
}

SampleBatch sample(const Group& group, std::string_view spec_text, int n, Rng& rng) {
  return make_distribution(group, spec_text).sample(n, rng);
}

}  // namespace liefm
