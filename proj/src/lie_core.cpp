#include "liefm/lie_core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace liefm {

MetricWeights::MetricWeights(Eigen::VectorXd weights) : weights_(std::move(weights)) {
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] <= 0.0) {
      throw UsageError("metric weights must be finite and positive");
    }
  }
}

MetricWeights MetricWeights::unit(int dim) { return MetricWeights(Eigen::VectorXd::Ones(dim)); }

void Group::check_element(const GroupElement& g, const char* what) const {
  if (g.payload.size() != payload_size()) {
    std::ostringstream msg;
    msg << what << ": expected a " << name() << " element with " << payload_size() << " payload entries, got "
        << g.payload.size();
    throw UsageError(msg.str());
  }
}

void Group::check_algebra(const AlgebraVector& a, const char* what) const {
  if (a.size() != dim()) {
    std::ostringstream msg;
    msg << what << ": expected " << dim() << " algebra components for " << name() << ", got " << a.size();
    throw UsageError(msg.str());
  }
}

GroupElement Group::identity() const { return do_identity(); }

GroupElement Group::product(const GroupElement& g, const GroupElement& h) const {
  check_element(g, "product");
  check_element(h, "product");
  return do_product(g, h);
}

GroupElement Group::inverse(const GroupElement& g) const {
  check_element(g, "inverse");
  return do_inverse(g);
}

GroupElement Group::exp(const AlgebraVector& a) const {
  check_algebra(a, "exp");
  return do_exp(a);
}

AlgebraVector Group::log(const GroupElement& g) const {
  check_element(g, "log");
  return do_log(g);
}

Eigen::VectorXd Group::features(const GroupElement& g) const {
  check_element(g, "features");
  return do_features(g);
}

double Group::defect(const GroupElement& g) const {
  check_element(g, "defect");
  if (!g.payload.allFinite()) return std::numeric_limits<double>::infinity();
  return do_defect(g);
}

GroupElement product(const Group& group, const GroupElement& g, const GroupElement& h) {
  return group.product(g, h);
}
GroupElement inverse(const Group& group, const GroupElement& g) { return group.inverse(g); }
GroupElement exp(const Group& group, const AlgebraVector& a) { return group.exp(a); }
AlgebraVector log(const Group& group, const GroupElement& g) { return group.log(g); }

AlgebraVector left_pushforward(const Group& group, const GroupElement& g, const AlgebraVector& a) {
  group.check_element(g, "left_pushforward");
  group.check_algebra(a, "left_pushforward");
  return a;
}

double metric_sq_norm(const AlgebraVector& a, const MetricWeights& weights) {
  if (a.size() != weights.dim()) {
    throw UsageError("metric_sq_norm: algebra vector has " + std::to_string(a.size()) + " components but " +
                     std::to_string(weights.dim()) + " weights were given");
  }
  return (weights.values().array() * a.array().square()).sum();
}

double distance(const Group& group, const GroupElement& g, const GroupElement& h) {
  const AlgebraVector c = group.log(group.product(group.inverse(g), h));
  return std::sqrt(c.squaredNorm());
}

GroupElement exp_curve(const Group& group, const GroupElement& g0, const GroupElement& g1, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw UsageError("exp_curve: t must lie in [0, 1], got " + std::to_string(t));
  }
  const AlgebraVector direction = group.log(group.product(group.inverse(g0), g1));
  return group.product(g0, group.exp(t * direction));
}

AlgebraVector conditional_field(const Group& group, const GroupElement& g, const GroupElement& g1, double t) {
  if (!(t >= 0.0 && t < 1.0)) {
    throw UsageError("conditional_field: t must lie in [0, 1), got " + std::to_string(t));
  }
  const AlgebraVector to_target = group.log(group.product(group.inverse(g), g1));
  return left_pushforward(group, g, to_target) / (1.0 - t);
}

std::vector<GroupElement> integrate_field(const Group& group, const VectorField& field, const GroupElement& g0,
                                          int steps) {
  if (steps < 1) throw UsageError("integrate_field: steps must be >= 1, got " + std::to_string(steps));
  group.check_element(g0, "integrate_field");

  const double dt = 1.0 / steps;
  std::vector<GroupElement> trajectory;
  trajectory.reserve(static_cast<std::size_t>(steps) + 1);
  trajectory.push_back(g0);
  for (int k = 0; k < steps; ++k) {
    const double t = k * dt;
    const AlgebraVector u = field(trajectory.back(), t);
    group.check_algebra(u, "integrate_field");
    if (!u.allFinite()) {
      std::ostringstream msg;
      msg << "integrate_field: non-finite field value at step " << k << " (t = " << t << ")";
      throw NumericalError(msg.str());
    }
    trajectory.push_back(group.product(trajectory.back(), group.exp(dt * u)));
  }
  return trajectory;
}

}  // namespace liefm
