#include "liefm/groups.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

namespace liefm {

namespace {

constexpr double kTaylorCutoff = 1e-4;
constexpr double kPi = std::numbers::pi;

SE2Element se2_exp_impl(const Eigen::Vector3d& c, double sinc_fault) {
  const double half = 0.5 * c[2];
  const double s = sinc(half) * (1.0 + sinc_fault);
  const double ch = std::cos(half);
  const double sh = std::sin(half);
  return {s * (c[0] * ch - c[1] * sh), s * (c[0] * sh + c[1] * ch), wrap_angle(c[2])};
}

}  // namespace

double sinc(double x) {
  if (std::abs(x) < kTaylorCutoff) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0));
  }
  return std::sin(x) / x;
}

double inv_sinc(double x) {
  if (std::abs(x) < kTaylorCutoff) {
    const double x2 = x * x;
    return 1.0 + x2 / 6.0 + 7.0 * x2 * x2 / 360.0 + 31.0 * x2 * x2 * x2 / 15120.0;
  }
  return x / std::sin(x);
}

double wrap_angle(double theta) {
  if (theta >= -kPi && theta < kPi) return theta;
  double r = theta - 2.0 * kPi * std::floor((theta + kPi) / (2.0 * kPi));
  if (r >= kPi) r -= 2.0 * kPi;
  if (r < -kPi) r += 2.0 * kPi;
  return r;
}

// ---------------------------------------------------------------------------
// SE(2)

SE2Element se2_product(const SE2Element& a, const SE2Element& b) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, wrap_angle(a.theta + b.theta)};
}

SE2Element se2_inverse(const SE2Element& g) {
  const double c = std::cos(g.theta);
  const double s = std::sin(g.theta);
  // -R_theta^T (x, y)
  return {-(c * g.x + s * g.y), -(-s * g.x + c * g.y), wrap_angle(-g.theta)};
}

SE2Element se2_exp(const Eigen::Vector3d& c) { return se2_exp_impl(c, 0.0); }

Eigen::Vector3d se2_log(const SE2Element& g) {
  const double theta = wrap_angle(g.theta);
  const double half = 0.5 * theta;
  const double k = inv_sinc(half);
  const double ch = std::cos(half);
  const double sh = std::sin(half);
  return {k * (g.x * ch + g.y * sh), k * (-g.x * sh + g.y * ch), theta};
}

// ---------------------------------------------------------------------------
// SO(3)

SO3Element SO3Element::orthonormalized() const {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(matrix, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return {u * v.transpose()};
}

Eigen::Matrix3d hat(const Eigen::Vector3d& c) {
  Eigen::Matrix3d m;
  // clang-format off
  m <<   0.0, -c.z(),  c.y(),
       c.z(),    0.0, -c.x(),
      -c.y(),  c.x(),    0.0;
  // clang-format on
  return m;
}

Eigen::Vector3d vee(const Eigen::Matrix3d& m) { return {m(2, 1), m(0, 2), m(1, 0)}; }

SO3Element so3_exp(const Eigen::Vector3d& c) {
  const double q = c.norm();
  const Eigen::Matrix3d k = hat(c);
  const double half_sinc = sinc(0.5 * q);
  return {Eigen::Matrix3d::Identity() + sinc(q) * k + 0.5 * half_sinc * half_sinc * (k * k)};
}

Eigen::Vector3d so3_log(const SO3Element& r) {
  const Eigen::Matrix3d& m = r.matrix;
  // sin(q) n and cos(q); atan2 stays accurate at both ends of [0, pi].
  const Eigen::Vector3d axial = 0.5 * vee(m - m.transpose());
  const double cos_q = std::clamp(0.5 * (m.trace() - 1.0), -1.0, 1.0);
  const double q = std::atan2(axial.norm(), cos_q);

  if (kPi - q > 1e-6) return inv_sinc(q) * axial;

  // Near pi: (R + R^T)/2 = cos(q) I + (1 - cos(q)) n n^T.
  const Eigen::Matrix3d nn = (0.5 * (m + m.transpose()) - cos_q * Eigen::Matrix3d::Identity()) / (1.0 - cos_q);
  Eigen::Index i = 0;
  nn.diagonal().maxCoeff(&i);
  Eigen::Vector3d n = nn.col(i) / std::sqrt(std::max(nn(i, i), 1e-300));
  n.normalize();
  if (axial.norm() > 0.0) {
    if (n.dot(axial) < 0.0) n = -n;
  } else {
    Eigen::Index j = 0;
    n.cwiseAbs().maxCoeff(&j);
    if (n[j] < 0.0) n = -n;
  }
  return q * n;
}

// ---------------------------------------------------------------------------
// TranslationGroup

TranslationGroup::TranslationGroup(int d) : d_(d) {
  if (d < 1) throw UsageError("translation group dimension must be >= 1, got " + std::to_string(d));
}

std::vector<std::string> TranslationGroup::coordinate_names() const {
  std::vector<std::string> names;
  for (int i = 0; i < d_; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

GroupElement TranslationGroup::do_identity() const { return {Eigen::VectorXd::Zero(d_)}; }
GroupElement TranslationGroup::do_product(const GroupElement& g, const GroupElement& h) const {
  return {g.payload + h.payload};
}
GroupElement TranslationGroup::do_inverse(const GroupElement& g) const { return {-g.payload}; }
GroupElement TranslationGroup::do_exp(const AlgebraVector& a) const { return {a}; }
AlgebraVector TranslationGroup::do_log(const GroupElement& g) const { return g.payload; }
Eigen::VectorXd TranslationGroup::do_features(const GroupElement& g) const { return g.payload; }
double TranslationGroup::do_defect(const GroupElement&) const { return 0.0; }

// ---------------------------------------------------------------------------
// SE2Group

SE2Group SE2Group::with_sinc_fault(double fault) {
  SE2Group g;
  g.sinc_fault_ = fault;
  return g;
}

SE2Element SE2Group::unpack(const GroupElement& g) { return {g.payload[0], g.payload[1], g.payload[2]}; }

GroupElement SE2Group::pack(const SE2Element& g) { return {Eigen::Vector3d(g.x, g.y, g.theta)}; }

GroupElement SE2Group::do_identity() const { return pack({}); }
GroupElement SE2Group::do_product(const GroupElement& g, const GroupElement& h) const {
  return pack(se2_product(unpack(g), unpack(h)));
}
GroupElement SE2Group::do_inverse(const GroupElement& g) const { return pack(se2_inverse(unpack(g))); }
GroupElement SE2Group::do_exp(const AlgebraVector& a) const {
  return pack(se2_exp_impl(Eigen::Vector3d(a), sinc_fault_));
}
AlgebraVector SE2Group::do_log(const GroupElement& g) const { return se2_log(unpack(g)); }

Eigen::VectorXd SE2Group::do_features(const GroupElement& g) const {
  const SE2Element e = unpack(g);
  return Eigen::Vector4d(e.x, e.y, std::cos(e.theta), std::sin(e.theta));
}

double SE2Group::do_defect(const GroupElement& g) const {
  const double theta = g.payload[2];
  return std::abs(theta - wrap_angle(theta));
}

// ---------------------------------------------------------------------------
// SO3Group

std::vector<std::string> SO3Group::coordinate_names() const {
  std::vector<std::string> names;
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) names.push_back("r" + std::to_string(i) + std::to_string(j));
  return names;
}

SO3Element SO3Group::unpack(const GroupElement& g) {
  SO3Element r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.matrix(i, j) = g.payload[3 * i + j];
  return r;
}

GroupElement SO3Group::pack(const SO3Element& r) {
  Eigen::VectorXd p(9);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) p[3 * i + j] = r.matrix(i, j);
  return {std::move(p)};
}

GroupElement SO3Group::do_identity() const { return pack({}); }
GroupElement SO3Group::do_product(const GroupElement& g, const GroupElement& h) const {
  return pack({unpack(g).matrix * unpack(h).matrix});
}
GroupElement SO3Group::do_inverse(const GroupElement& g) const {
  return pack({unpack(g).matrix.transpose()});
}
GroupElement SO3Group::do_exp(const AlgebraVector& a) const { return pack(so3_exp(Eigen::Vector3d(a))); }
AlgebraVector SO3Group::do_log(const GroupElement& g) const { return so3_log(unpack(g)); }
Eigen::VectorXd SO3Group::do_features(const GroupElement& g) const { return g.payload; }

double SO3Group::do_defect(const GroupElement& g) const {
  const Eigen::Matrix3d r = unpack(g).matrix;
  const double orth = (r.transpose() * r - Eigen::Matrix3d::Identity()).norm();
  return std::max(orth, std::abs(r.determinant() - 1.0));
}

// ---------------------------------------------------------------------------
// ProductGroup

ProductGroup::ProductGroup(std::vector<std::shared_ptr<const Group>> factors) : factors_(std::move(factors)) {
  if (factors_.empty()) throw UsageError("product group needs at least one factor");
  for (const auto& f : factors_) {
    if (!f) throw UsageError("product group factor is null");
    payload_offsets_.push_back(payload_offsets_.back() + f->payload_size());
    algebra_offsets_.push_back(algebra_offsets_.back() + f->dim());
    feature_offsets_.push_back(feature_offsets_.back() + f->feature_size());
  }
}

std::string ProductGroup::name() const {
  std::string out;
  for (std::size_t i = 0; i < factors_.size(); ++i) out += (i ? "x" : "") + factors_[i]->name();
  return out;
}

std::string ProductGroup::feature_encoding() const {
  std::string out = "product(";
  for (std::size_t i = 0; i < factors_.size(); ++i) out += (i ? "," : "") + factors_[i]->feature_encoding();
  return out + ")";
}

std::vector<std::string> ProductGroup::coordinate_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < factors_.size(); ++i)
    for (const auto& n : factors_[i]->coordinate_names()) names.push_back("g" + std::to_string(i) + "_" + n);
  return names;
}

GroupElement ProductGroup::factor_element(const GroupElement& g, std::size_t i) const {
  check_element(g, "factor_element");
  return {g.payload.segment(payload_offsets_[i], payload_offsets_[i + 1] - payload_offsets_[i])};
}

AlgebraVector ProductGroup::factor_algebra(const AlgebraVector& a, std::size_t i) const {
  check_algebra(a, "factor_algebra");
  return a.segment(algebra_offsets_[i], algebra_offsets_[i + 1] - algebra_offsets_[i]);
}

GroupElement ProductGroup::join(const std::vector<GroupElement>& parts) const {
  if (parts.size() != factors_.size()) throw UsageError("join: wrong number of factor elements");
  Eigen::VectorXd p(payload_size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    factors_[i]->check_element(parts[i], "join");
    p.segment(payload_offsets_[i], parts[i].payload.size()) = parts[i].payload;
  }
  return {std::move(p)};
}

AlgebraVector ProductGroup::join_algebra(const std::vector<AlgebraVector>& parts) const {
  if (parts.size() != factors_.size()) throw UsageError("join_algebra: wrong number of factor vectors");
  AlgebraVector a(dim());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    factors_[i]->check_algebra(parts[i], "join_algebra");
    a.segment(algebra_offsets_[i], parts[i].size()) = parts[i];
  }
  return a;
}

GroupElement ProductGroup::do_identity() const {
  std::vector<GroupElement> parts;
  for (const auto& f : factors_) parts.push_back(f->identity());
  return join(parts);
}

GroupElement ProductGroup::do_product(const GroupElement& g, const GroupElement& h) const {
  std::vector<GroupElement> parts;
  for (std::size_t i = 0; i < factors_.size(); ++i)
    parts.push_back(factors_[i]->product(factor_element(g, i), factor_element(h, i)));
  return join(parts);
}

GroupElement ProductGroup::do_inverse(const GroupElement& g) const {
  std::vector<GroupElement> parts;
  for (std::size_t i = 0; i < factors_.size(); ++i) parts.push_back(factors_[i]->inverse(factor_element(g, i)));
  return join(parts);
}

GroupElement ProductGroup::do_exp(const AlgebraVector& a) const {
  std::vector<GroupElement> parts;
  for (std::size_t i = 0; i < factors_.size(); ++i) parts.push_back(factors_[i]->exp(factor_algebra(a, i)));
  return join(parts);
}

AlgebraVector ProductGroup::do_log(const GroupElement& g) const {
  std::vector<AlgebraVector> parts;
  for (std::size_t i = 0; i < factors_.size(); ++i) parts.push_back(factors_[i]->log(factor_element(g, i)));
  return join_algebra(parts);
}

Eigen::VectorXd ProductGroup::do_features(const GroupElement& g) const {
  Eigen::VectorXd f(feature_size());
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    f.segment(feature_offsets_[i], feature_offsets_[i + 1] - feature_offsets_[i]) =
        factors_[i]->features(factor_element(g, i));
  }
  return f;
}

double ProductGroup::do_defect(const GroupElement& g) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < factors_.size(); ++i)
    worst = std::max(worst, factors_[i]->defect(factor_element(g, i)));
  return worst;
}

// ---------------------------------------------------------------------------

namespace {

std::shared_ptr<const Group> make_simple_group(std::string_view id) {
  if (id == "se2") return std::make_shared<SE2Group>();
  if (id == "so3") return std::make_shared<SO3Group>();
  if (id.size() >= 2 && id[0] == 'r') {
    int d = 0;
    const auto* first = id.data() + 1;
    const auto* last = id.data() + id.size();
    const auto [ptr, ec] = std::from_chars(first, last, d);
    if (ec == std::errc() && ptr == last && d >= 1) return std::make_shared<TranslationGroup>(d);
  }
  throw UsageError("unknown group id '" + std::string(id) + "' (expected r<d>, se2, so3, or a product like se2xr2)");
}

}  // namespace

std::shared_ptr<const Group> make_group(std::string_view id) {
  std::vector<std::shared_ptr<const Group>> factors;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = id.find('x', start);
    factors.push_back(make_simple_group(id.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (factors.size() == 1) return factors.front();
  return std::make_shared<ProductGroup>(std::move(factors));
}

GroupElement random_element(const Group& group, Rng& rng) {
  switch (group.kind()) {
    case GroupKind::translation: {
      Eigen::VectorXd p(group.dim());
      for (Eigen::Index i = 0; i < p.size(); ++i) p[i] = 2.0 * rng.normal();
      return {p};
    }
    case GroupKind::se2:
      return SE2Group::pack({rng.uniform(-5.0, 5.0), rng.uniform(-5.0, 5.0), rng.uniform(-kPi, kPi)});
    case GroupKind::so3: {
      Eigen::Vector3d dir(rng.normal(), rng.normal(), rng.normal());
      while (dir.norm() == 0.0) dir = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
      const double radius = kPi * std::cbrt(rng.uniform());
      return SO3Group::pack(so3_exp(radius * dir.normalized()));
    }
    case GroupKind::product: {
      const auto& prod = static_cast<const ProductGroup&>(group);
      std::vector<GroupElement> parts;
      for (const auto& f : prod.factors()) parts.push_back(random_element(*f, rng));
      return prod.join(parts);
    }
  }
  throw UsageError("random_element: unsupported group");
}

AlgebraVector random_algebra(const Group& group, Rng& rng, double scale) {
  AlgebraVector a(group.dim());
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = rng.uniform(-scale, scale);
  return a;
}

Eigen::VectorXd net_features(const Group& group, const GroupElement& g) { return group.features(g); }

}  // namespace liefm
