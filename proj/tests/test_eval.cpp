#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "liefm/errors.hpp"
#include "liefm/eval.hpp"

using namespace liefm;

namespace {

struct Direct {
  double energy = 0.0;
  double mmd2 = 0.0;
};

/// Straightforward double-loop V-statistics with a given bandwidth.
Direct direct_metrics(const Group& group, const SampleBatch& a, const SampleBatch& b, double h) {
  auto mean_over = [&](const SampleBatch& x, const SampleBatch& y, auto f) {
    double s = 0.0;
    for (const auto& g : x.elements)
      for (const auto& k : y.elements) s += f((group.features(g) - group.features(k)).norm());
    return s / static_cast<double>(x.size() * y.size());
  };
  auto dist = [](double d) { return d; };
  auto rbf = [h](double d) { return std::exp(-d * d / (2.0 * h * h)); };
  Direct out;
  out.energy = 2.0 * mean_over(a, b, dist) - mean_over(a, a, dist) - mean_over(b, b, dist);
  out.mmd2 = mean_over(a, a, rbf) + mean_over(b, b, rbf) - 2.0 * mean_over(a, b, rbf);
  return out;
}

double median_pooled_distance(const Group& group, const SampleBatch& a, const SampleBatch& b) {
  std::vector<Eigen::VectorXd> f;
  for (const auto* s : {&a, &b})
    for (const auto& g : s->elements) f.push_back(group.features(g));
  std::vector<double> d;
  for (std::size_t i = 0; i < f.size(); ++i)
    for (std::size_t j = i + 1; j < f.size(); ++j) d.push_back((f[i] - f[j]).norm());
  std::sort(d.begin(), d.end());
  return d[d.size() / 2];
}

}  // namespace

TEST_CASE("metrics agree with a direct double-loop computation") {
  const auto group = make_group("se2");
  Rng rng(1);
  const SampleBatch a = sample(*group, "hline", 60, rng);
  const SampleBatch b = sample(*group, "circle", 70, rng);
  const EvalReport r = two_sample_metrics(*group, a, b);
  const double h = median_pooled_distance(*group, a, b);
  const Direct want = direct_metrics(*group, a, b, h);
  CHECK(r.bandwidth == doctest::Approx(h).epsilon(1e-14));
  CHECK(r.energy_distance == doctest::Approx(want.energy).epsilon(1e-12));
  CHECK(r.mmd2 == doctest::Approx(want.mmd2).epsilon(1e-12));
  CHECK(r.mmd == doctest::Approx(std::sqrt(want.mmd2)).epsilon(1e-12));
  CHECK(r.n_a == 60);
  CHECK(r.n_b == 70);
  CHECK(r.on_manifold_defect == 0.0);
}

TEST_CASE("identical batches have zero discrepancy") {
  const auto group = make_group("so3");
  Rng rng(2);
  const SampleBatch a = sample(*group, "vline", 80, rng);
  const EvalReport r = two_sample_metrics(*group, a, a);
  CHECK(r.mmd < 1e-12);
  CHECK(r.energy_distance < 1e-12);
}

TEST_CASE("metrics are symmetric in their arguments") {
  const auto group = make_group("se2xr2");
  Rng rng(3);
  const SampleBatch a = sample(*group, "hline", 64, rng);
  const SampleBatch b = sample(*group, "vline", 64, rng);
  const EvalReport ab = two_sample_metrics(*group, a, b);
  const EvalReport ba = two_sample_metrics(*group, b, a);
  CHECK(ab.mmd == doctest::Approx(ba.mmd).epsilon(1e-12));
  CHECK(ab.energy_distance == doctest::Approx(ba.energy_distance).epsilon(1e-12));
}

TEST_CASE("permutation test separates hline from vline but not hline from hline") {
  const auto group = make_group("se2");
  Rng rng(4);
  const SampleBatch a = sample(*group, "hline", 100, rng);
  const SampleBatch same = sample(*group, "hline", 100, rng);
  const SampleBatch other = sample(*group, "vline", 100, rng);
  const PermutationTest h0 = mmd_permutation_test(*group, a, same, 200, rng);
  CHECK(h0.observed_mmd < h0.quantile(0.95));
  const PermutationTest h1 = mmd_permutation_test(*group, a, other, 200, rng);
  CHECK(h1.observed_mmd > h1.quantile(0.99));
  CHECK(h1.p_value() == doctest::Approx(1.0 / 201.0));
}

TEST_CASE("permutation null is calibrated at the 95% level") {
  const auto group = make_group("se2");
  Rng rng(5);
  int rejections = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const SampleBatch a = sample(*group, "circle", 50, rng);
    const SampleBatch b = sample(*group, "circle", 50, rng);
    const PermutationTest test = mmd_permutation_test(*group, a, b, 200, rng);
    if (test.observed_mmd > test.quantile(0.95)) ++rejections;
  }
  const double rate = rejections / 200.0;
  CAPTURE(rate);
  CHECK(rate >= 0.02);
  CHECK(rate <= 0.08);
}

TEST_CASE("small batches are usage errors") {
  const auto group = make_group("r2");
  Rng rng(6);
  const SampleBatch small = sample(*group, "gaussian", 49, rng);
  const SampleBatch big = sample(*group, "gaussian", 50, rng);
  CHECK_THROWS_AS(two_sample_metrics(*group, small, big), UsageError);
  CHECK_NOTHROW(two_sample_metrics(*group, big, big));
  CHECK_THROWS_AS(mmd_permutation_test(*group, big, big, 0, rng), UsageError);
}

TEST_CASE("report JSON round trip") {
  const auto group = make_group("se2");
  Rng rng(7);
  const EvalReport r =
      two_sample_metrics(*group, sample(*group, "hline", 50, rng), sample(*group, "vline", 50, rng));
  const EvalReport back = EvalReport::from_json(r.to_json());
  CHECK(std::abs(back.mmd - r.mmd) <= 1e-12 * r.mmd);
  CHECK(std::abs(back.energy_distance - r.energy_distance) <= 1e-12 * r.energy_distance);
  CHECK(back.bandwidth == r.bandwidth);
  CHECK(back.n_a == 50);
  CHECK((back.feature_mean_a - r.feature_mean_a).norm() < 1e-12);
  CHECK_THROWS_AS(EvalReport::from_json("{\"mmd\": 1}"), ParseError);
}

TEST_CASE("zero-field flow leaves sources in place") {
  const auto group = make_group("se2");
  Rng init(8);
  const VectorFieldNet net = make_vector_field_net({group->feature_size(), group->dim()}, init);
  Rng rng(9);
  const FlowResult flow =
      flow_and_eval(*group, net, make_distribution(*group, "hline"), make_distribution(*group, "vline"), 10, 100, rng);
  REQUIRE(flow.trajectories.size() == 100);
  for (std::size_t i = 0; i < flow.sources.size(); ++i) {
    CHECK(flow.trajectories[i].size() == 11);
    CHECK(flow.endpoints.elements[i].payload == flow.sources.elements[i].payload);
  }
  CHECK(flow.trajectory_defect == 0.0);
  const PermutationTest test = mmd_permutation_test(*group, flow.endpoints, flow.reference, 200, rng);
  CHECK(test.observed_mmd > test.quantile(0.99));
}
