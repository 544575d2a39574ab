#pragma once

#include <Eigen/Core>

#include <functional>
#include <string>
#include <vector>

#include "liefm/errors.hpp"

namespace liefm {

/// Lie-algebra components in the fixed left-invariant basis {A_i}.
using AlgebraVector = Eigen::VectorXd;

/**
 * A point on a group, stored as the group's flat payload.
 *
 * Payload layouts: R^d -> coordinates; SE(2) -> (x, y, theta);
 * SO(3) -> the 3x3 matrix in row-major order; products -> concatenation of
 * the factor payloads.
 */
struct GroupElement {
  Eigen::VectorXd payload;
};

/// Positive weights w_i of the left-invariant metric |c|^2 = sum_i w_i (c^i)^2.
class MetricWeights {
 public:
  /// Throws UsageError unless every weight is finite and > 0.
  explicit MetricWeights(Eigen::VectorXd weights);
  static MetricWeights unit(int dim);

  const Eigen::VectorXd& values() const { return weights_; }
  int dim() const { return static_cast<int>(weights_.size()); }

 private:
  Eigen::VectorXd weights_;
};

enum class GroupKind { translation, se2, so3, product };

/**
 * Group operations needed for flow matching on a Lie group with surjective
 * exponential map.
 *
 * The public members check payload/algebra sizes and throw UsageError on
 * mismatch, then forward to the do_* hooks, which may assume valid shapes.
 */
class Group {
 public:
  virtual ~Group() = default;

  virtual GroupKind kind() const = 0;
  /// Identifier accepted by make_group, e.g. "se2" or "se2xr2".
  virtual std::string name() const = 0;
  /// Dimension of the Lie algebra.
  virtual int dim() const = 0;
  virtual int payload_size() const = 0;
  /// Length of the network input encoding (see features()).
  virtual int feature_size() const = 0;
  /// Tag naming the network input encoding; stored in checkpoints.
  virtual std::string feature_encoding() const = 0;
  /// One name per payload entry, used as CSV column headers.
  virtual std::vector<std::string> coordinate_names() const = 0;

  GroupElement identity() const;
  GroupElement product(const GroupElement& g, const GroupElement& h) const;
  GroupElement inverse(const GroupElement& g) const;
  GroupElement exp(const AlgebraVector& a) const;
  AlgebraVector log(const GroupElement& g) const;
  /// Smooth injective embedding used as network input.
  Eigen::VectorXd features(const GroupElement& g) const;
  /// Largest violation of the element's invariants (0 for a valid element).
  double defect(const GroupElement& g) const;

  void check_element(const GroupElement& g, const char* what) const;
  void check_algebra(const AlgebraVector& a, const char* what) const;

 protected:
  virtual GroupElement do_identity() const = 0;
  virtual GroupElement do_product(const GroupElement& g, const GroupElement& h) const = 0;
  virtual GroupElement do_inverse(const GroupElement& g) const = 0;
  virtual GroupElement do_exp(const AlgebraVector& a) const = 0;
  virtual AlgebraVector do_log(const GroupElement& g) const = 0;
  virtual Eigen::VectorXd do_features(const GroupElement& g) const = 0;
  virtual double do_defect(const GroupElement& g) const = 0;
};

// Free-function forms of the group operations.
GroupElement product(const Group& group, const GroupElement& g, const GroupElement& h);
GroupElement inverse(const Group& group, const GroupElement& g);
GroupElement exp(const Group& group, const AlgebraVector& a);
AlgebraVector log(const Group& group, const GroupElement& g);

/**
 * Components of (L_g)_* A in the left-invariant frame.
 *
 * Expressed in the left-invariant frame this map is the identity on
 * components; it is kept as an explicit step so the conditional field reads
 * exactly as its definition.
 */
AlgebraVector left_pushforward(const Group& group, const GroupElement& g, const AlgebraVector& a);

/// sum_i w_i (a^i)^2.
double metric_sq_norm(const AlgebraVector& a, const MetricWeights& weights);

/// sqrt(metric_sq_norm(log(g^-1 h), unit weights)).
double distance(const Group& group, const GroupElement& g, const GroupElement& h);

/// g0 * exp(t * log(g0^-1 g1)) for t in [0, 1].
GroupElement exp_curve(const Group& group, const GroupElement& g0, const GroupElement& g1, double t);

/// (L_g)_* log(g^-1 g1) / (1 - t); t must lie in [0, 1).
AlgebraVector conditional_field(const Group& group, const GroupElement& g, const GroupElement& g1, double t);

/// Time-dependent vector field in left-invariant components.
using VectorField = std::function<AlgebraVector(const GroupElement&, double)>;

/**
 * Lie-Euler integration over t in [0, 1]:
 * g_{k+1} = g_k * exp(dt * field(g_k, t_k)), dt = 1/steps.
 *
 * Returns steps + 1 elements, g0 first. Throws NumericalError naming the step
 * if the field returns a non-finite value.
 */
std::vector<GroupElement> integrate_field(const Group& group, const VectorField& field, const GroupElement& g0,
                                          int steps);

}  // namespace liefm
