#pragma once

#include <Eigen/Core>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "liefm/lie_core.hpp"
#include "liefm/rng.hpp"

namespace liefm {

// ---------------------------------------------------------------------------
// Scalar helpers
// ---------------------------------------------------------------------------

/// sin(x)/x; Taylor series below |x| < 1e-4.
double sinc(double x);
/// x/sin(x); Taylor series below |x| < 1e-4.
double inv_sinc(double x);
/// Wrap an angle into [-pi, pi).
double wrap_angle(double theta);

// ---------------------------------------------------------------------------
// SE(2): (x, y, theta) with theta in [-pi, pi)
// ---------------------------------------------------------------------------

struct SE2Element {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

SE2Element se2_product(const SE2Element& a, const SE2Element& b);
SE2Element se2_inverse(const SE2Element& g);
/// Closed-form exponential with basis (d/dx, d/dy, d/dtheta) at the identity.
SE2Element se2_exp(const Eigen::Vector3d& c);
/// Closed-form logarithm onto R^2 x [-pi, pi).
Eigen::Vector3d se2_log(const SE2Element& g);

// ---------------------------------------------------------------------------
// SO(3): 3x3 rotation matrices
// ---------------------------------------------------------------------------

struct SO3Element {
  Eigen::Matrix3d matrix = Eigen::Matrix3d::Identity();

  /// Nearest rotation in Frobenius norm (polar projection).
  SO3Element orthonormalized() const;
};

/// [c]_x, so that hat(c) * v = c x v.
Eigen::Matrix3d hat(const Eigen::Vector3d& c);
Eigen::Vector3d vee(const Eigen::Matrix3d& m);

/// Rodrigues: I + sinc(q)[c]_x + sinc^2(q/2)/2 [c]_x^2, q = |c|.
SO3Element so3_exp(const Eigen::Vector3d& c);
/**
 * Rotation vector with angle q in [0, pi].
 *
 * Within 1e-6 of q = pi the axis is recovered from the symmetric part of R;
 * at exactly q = pi the sign is chosen so the largest axis component is
 * positive.
 */
Eigen::Vector3d so3_log(const SO3Element& r);

// ---------------------------------------------------------------------------
// Runtime groups
// ---------------------------------------------------------------------------

/// R^d under addition; exp and log are the identity map.
class TranslationGroup final : public Group {
 public:
  explicit TranslationGroup(int d);

  GroupKind kind() const override { return GroupKind::translation; }
  std::string name() const override { return "r" + std::to_string(d_); }
  int dim() const override { return d_; }
  int payload_size() const override { return d_; }
  int feature_size() const override { return d_; }
  std::string feature_encoding() const override { return "rd-coords"; }
  std::vector<std::string> coordinate_names() const override;

 protected:
  GroupElement do_identity() const override;
  GroupElement do_product(const GroupElement& g, const GroupElement& h) const override;
  GroupElement do_inverse(const GroupElement& g) const override;
  GroupElement do_exp(const AlgebraVector& a) const override;
  AlgebraVector do_log(const GroupElement& g) const override;
  Eigen::VectorXd do_features(const GroupElement& g) const override;
  double do_defect(const GroupElement& g) const override;

 private:
  int d_;
};

class SE2Group final : public Group {
 public:
  SE2Group() = default;
  /// Test hook: scales sinc inside exp by (1 + fault) to break exp/log consistency.
  static SE2Group with_sinc_fault(double fault);

  GroupKind kind() const override { return GroupKind::se2; }
  std::string name() const override { return "se2"; }
  int dim() const override { return 3; }
  int payload_size() const override { return 3; }
  int feature_size() const override { return 4; }
  std::string feature_encoding() const override { return "se2-xy-cos-sin"; }
  std::vector<std::string> coordinate_names() const override { return {"x", "y", "theta"}; }

  static SE2Element unpack(const GroupElement& g);
  static GroupElement pack(const SE2Element& g);

 protected:
  GroupElement do_identity() const override;
  GroupElement do_product(const GroupElement& g, const GroupElement& h) const override;
  GroupElement do_inverse(const GroupElement& g) const override;
  GroupElement do_exp(const AlgebraVector& a) const override;
  AlgebraVector do_log(const GroupElement& g) const override;
  Eigen::VectorXd do_features(const GroupElement& g) const override;
  double do_defect(const GroupElement& g) const override;

 private:
  double sinc_fault_ = 0.0;
};

class SO3Group final : public Group {
 public:
  GroupKind kind() const override { return GroupKind::so3; }
  std::string name() const override { return "so3"; }
  int dim() const override { return 3; }
  int payload_size() const override { return 9; }
  int feature_size() const override { return 9; }
  std::string feature_encoding() const override { return "so3-matrix9"; }
  std::vector<std::string> coordinate_names() const override;

  static SO3Element unpack(const GroupElement& g);
  static GroupElement pack(const SO3Element& r);

 protected:
  GroupElement do_identity() const override;
  GroupElement do_product(const GroupElement& g, const GroupElement& h) const override;
  GroupElement do_inverse(const GroupElement& g) const override;
  GroupElement do_exp(const AlgebraVector& a) const override;
  AlgebraVector do_log(const GroupElement& g) const override;
  Eigen::VectorXd do_features(const GroupElement& g) const override;
  double do_defect(const GroupElement& g) const override;
};

/// Direct product G_1 x ... x G_k; every operation acts factor-wise.
class ProductGroup final : public Group {
 public:
  /// Throws UsageError on an empty factor list.
  explicit ProductGroup(std::vector<std::shared_ptr<const Group>> factors);

  GroupKind kind() const override { return GroupKind::product; }
  std::string name() const override;
  int dim() const override { return algebra_offsets_.back(); }
  int payload_size() const override { return payload_offsets_.back(); }
  int feature_size() const override { return feature_offsets_.back(); }
  std::string feature_encoding() const override;
  /// Factor coordinate names prefixed with "g<index>_".
  std::vector<std::string> coordinate_names() const override;

  const std::vector<std::shared_ptr<const Group>>& factors() const { return factors_; }
  std::size_t factor_count() const { return factors_.size(); }

  GroupElement factor_element(const GroupElement& g, std::size_t i) const;
  AlgebraVector factor_algebra(const AlgebraVector& a, std::size_t i) const;
  GroupElement join(const std::vector<GroupElement>& parts) const;
  AlgebraVector join_algebra(const std::vector<AlgebraVector>& parts) const;

 protected:
  GroupElement do_identity() const override;
  GroupElement do_product(const GroupElement& g, const GroupElement& h) const override;
  GroupElement do_inverse(const GroupElement& g) const override;
  GroupElement do_exp(const AlgebraVector& a) const override;
  AlgebraVector do_log(const GroupElement& g) const override;
  Eigen::VectorXd do_features(const GroupElement& g) const override;
  double do_defect(const GroupElement& g) const override;

 private:
  std::vector<std::shared_ptr<const Group>> factors_;
  std::vector<int> payload_offsets_{0};
  std::vector<int> algebra_offsets_{0};
  std::vector<int> feature_offsets_{0};
};

/**
 * Build a group from its identifier: "r<d>" (d >= 1), "se2", "so3", or
 * factors joined by 'x' such as "se2xr2". Throws UsageError otherwise.
 */
std::shared_ptr<const Group> make_group(std::string_view id);

/**
 * Random element for property tests: R^d ~ N(0, 4 I); SE(2) with x, y ~ U[-5, 5]
 * and theta ~ U[-pi, pi); SO(3) as exp(c) with c uniform in the ball of
 * radius pi; products factor-wise.
 */
GroupElement random_element(const Group& group, Rng& rng);

/// Algebra vector with components ~ U[-scale, scale].
AlgebraVector random_algebra(const Group& group, Rng& rng, double scale);

/// Network input encoding of g (same as group.features(g)).
Eigen::VectorXd net_features(const Group& group, const GroupElement& g);

}  // namespace liefm
