#include "doctest.h"

#include <cmath>
#include <numbers>

#include "liefm/errors.hpp"
#include "liefm/groups.hpp"
#include "oracles.hpp"

using namespace liefm;

namespace {

constexpr double kPi = std::numbers::pi;

double angle_gap(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * kPi)); }

}  // namespace

TEST_CASE("sinc and inv_sinc match the direct quotient away from zero") {
  for (double x : {1e-3, 0.1, 1.0, 2.5, -0.7}) {
    CHECK(sinc(x) == doctest::Approx(std::sin(x) / x).epsilon(1e-15));
    CHECK(inv_sinc(x) == doctest::Approx(x / std::sin(x)).epsilon(1e-15));
  }
  CHECK(sinc(0.0) == 1.0);
  CHECK(inv_sinc(0.0) == 1.0);
  // Either side of the series switch agrees to rounding.
  CHECK(std::abs(sinc(0.99999e-4) - std::sin(1.00001e-4) / 1.00001e-4) < 1e-12);
}

TEST_CASE("wrap_angle maps into [-pi, pi)") {
  CHECK(wrap_angle(2.0 * (3.0 * kPi / 4.0)) == doctest::Approx(-kPi / 2.0));
  CHECK(wrap_angle(kPi) == doctest::Approx(-kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(-kPi));
  CHECK(wrap_angle(0.25) == 0.25);
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-50.0, 50.0);
    const double w = wrap_angle(a);
    CHECK(w >= -kPi);
    CHECK(w < kPi);
    CHECK(angle_gap(w, a) < 1e-12);
  }
}

TEST_CASE("se2 closed forms agree with the homogeneous matrix oracle") {
  Rng rng(21);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d c(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-kPi, kPi));
    const SE2Element g = se2_exp(c);
    const Eigen::Matrix3d want = oracle::expm(oracle::se2_algebra(c));
    CHECK((oracle::se2_homogeneous(g.x, g.y, g.theta) - want).cwiseAbs().maxCoeff() < 1e-12);

    const SE2Element h{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-kPi + 1e-3, kPi - 1e-3)};
    const Eigen::Matrix3d log_m = oracle::logm(oracle::se2_homogeneous(h.x, h.y, h.theta));
    const Eigen::Vector3d oracle_log(log_m(0, 2), log_m(1, 2), log_m(1, 0));
    CHECK((se2_log(h) - oracle_log).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("so3 exp agrees with a 30-term power series") {
  Rng rng(22);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d c(rng.uniform(-1.8, 1.8), rng.uniform(-1.8, 1.8), rng.uniform(-1.8, 1.8));
    const Eigen::Matrix3d want = oracle::expm_series(oracle::skew(c), 30);
    CHECK((so3_exp(c).matrix - want).cwiseAbs().maxCoeff() < 1e-12);
  }
  // Tiny angles go through the series branch of sinc.
  const Eigen::Vector3d tiny(3e-9, -1e-9, 2e-9);
  CHECK((so3_exp(tiny).matrix - oracle::expm_series(oracle::skew(tiny), 5)).cwiseAbs().maxCoeff() < 1e-16);
}

TEST_CASE("so3 log agrees with inverse scaling and squaring plus Mercator series") {
  Rng rng(23);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d axis = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    const double angle = rng.uniform(0.0, kPi - 1e-3);
    const Eigen::Matrix3d r = oracle::expm(oracle::skew(angle * axis));
    const Eigen::Matrix3d log_m = oracle::logm(r);
    const Eigen::Vector3d want(log_m(2, 1), log_m(0, 2), log_m(1, 0));
    CHECK((so3_log(SO3Element{r}) - want).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("so3 log near and at a half turn") {
  Rng rng(24);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d axis = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()).normalized();
    const double angle = kPi - std::pow(10.0, rng.uniform(-12.0, -4.0));
    const SO3Element r = so3_exp(angle * axis);
    const Eigen::Vector3d c = so3_log(r);
    CHECK(c.norm() <= kPi + 1e-12);
    CHECK((so3_exp(c).matrix - r.matrix).norm() < 1e-9);
  }
  // Exactly pi about z: diag(-1, -1, 1); sign makes the largest component positive.
  const Eigen::Matrix3d half = Eigen::Vector3d(-1.0, -1.0, 1.0).asDiagonal();
  const Eigen::Vector3d c = so3_log(SO3Element{half});
  CHECK((c - Eigen::Vector3d(0.0, 0.0, kPi)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("so3 elements stay orthonormal and orthonormalized() projects") {
  const SO3Group group;
  Rng rng(25);
  for (int i = 0; i < 200; ++i) {
    const GroupElement g = random_element(group, rng);
    CHECK(group.defect(g) < 1e-12);
  }
  SO3Element noisy{so3_exp(Eigen::Vector3d(0.3, 0.2, -0.1)).matrix};
  noisy.matrix(0, 1) += 1e-4;
  CHECK(group.defect(SO3Group::pack(noisy)) > 1e-5);
  CHECK(group.defect(SO3Group::pack(noisy.orthonormalized())) < 1e-12);
}

TEST_CASE("translation group: exp and log are the identity") {
  const TranslationGroup group(3);
  const Eigen::Vector3d v(1.5, -2.0, 0.25);
  CHECK(group.exp(v).payload == v);
  CHECK(group.log(GroupElement{v}) == v);
  CHECK(group.product(GroupElement{v}, GroupElement{v}).payload == 2.0 * v);
}

TEST_CASE("product group: factor-wise ops are bit-identical to direct calls") {
  const auto group = make_group("se2xr2");
  const auto& product = dynamic_cast<const ProductGroup&>(*group);
  REQUIRE(product.factor_count() == 2);
  CHECK(product.dim() == 5);
  CHECK(product.payload_size() == 5);
  const Group& se2 = *product.factors()[0];
  const Group& r2 = *product.factors()[1];
  Rng rng(26);
  for (int i = 0; i < 200; ++i) {
    const GroupElement g = random_element(product, rng);
    const GroupElement h = random_element(product, rng);
    const AlgebraVector a = random_algebra(product, rng, 3.0);
    const auto g0 = product.factor_element(g, 0);
    const auto g1 = product.factor_element(g, 1);
    const auto h0 = product.factor_element(h, 0);
    const auto h1 = product.factor_element(h, 1);
    CHECK(product.product(g, h).payload == product.join({se2.product(g0, h0), r2.product(g1, h1)}).payload);
    CHECK(product.inverse(g).payload == product.join({se2.inverse(g0), r2.inverse(g1)}).payload);
    CHECK(product.log(g) == product.join_algebra({se2.log(g0), r2.log(g1)}));
    CHECK(product.exp(a).payload == product.join({se2.exp(product.factor_algebra(a, 0)),
                                                  r2.exp(product.factor_algebra(a, 1))}).payload);
  }
  CHECK(product.coordinate_names() == std::vector<std::string>{"g0_x", "g0_y", "g0_theta", "g1_x0", "g1_x1"});
}

TEST_CASE("features are injective on se2 and distinguish +-pi") {
  const SE2Group group;
  const auto a = group.features(SE2Group::pack({0.0, 0.0, -kPi}));
  const auto b = group.features(SE2Group::pack({0.0, 0.0, kPi - 1e-9}));
  CHECK((a - b).norm() < 1e-8);  // same pose, continuous embedding
  const auto c = group.features(SE2Group::pack({0.0, 0.0, 0.0}));
  CHECK((a - c).norm() > 1.0);
  CHECK(group.feature_size() == 4);
}

TEST_CASE("make_group parses identifiers and rejects bad ones") {
  CHECK(make_group("r1")->dim() == 1);
  CHECK(make_group("r2")->name() == "r2");
  CHECK(make_group("se2")->kind() == GroupKind::se2);
  CHECK(make_group("so3")->payload_size() == 9);
  CHECK(make_group("se2xr2")->name() == "se2xr2");
  CHECK(make_group("so3xso3")->dim() == 6);
  for (const char* bad : {"", "r0", "se3", "x", "se2x", "r-1", "rr2"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(make_group(bad), UsageError);
  }
  CHECK_THROWS_AS(ProductGroup({}), UsageError);
}
