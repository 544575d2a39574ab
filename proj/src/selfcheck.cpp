#include "liefm/selfcheck.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "liefm/groups.hpp"
#include "liefm/mlp.hpp"

namespace liefm {

namespace {

struct NamedGroup {
  std::string label;
  std::shared_ptr<const Group> group;
};

std::vector<NamedGroup> groups_under_test(const SelfcheckOptions& options) {
  std::shared_ptr<const Group> se2 = options.inject_sinc_fault
                                         ? std::make_shared<SE2Group>(SE2Group::with_sinc_fault(1e-3))
                                         : std::make_shared<SE2Group>();
  auto so3 = std::make_shared<SO3Group>();
  auto r2 = std::make_shared<TranslationGroup>(2);
  auto se2xr2 = std::make_shared<ProductGroup>(std::vector<std::shared_ptr<const Group>>{se2, r2});
  return {{"r2", r2}, {"se2", se2}, {"so3", so3}, {"se2xr2", se2xr2}};
}

CheckResult check(std::string name, double value, double threshold) {
  return {std::move(name), std::isfinite(value) && value < threshold, value, threshold};
}

double worst_roundtrip(const Group& group, Rng& rng, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const GroupElement g = random_element(group, rng);
    worst = std::max(worst, distance(group, group.exp(group.log(g)), g));
  }
  return worst;
}

double worst_curve_identity(const Group& group, Rng& rng, int n) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const GroupElement g0 = random_element(group, rng);
    const GroupElement g1 = random_element(group, rng);
    const AlgebraVector full = group.log(group.product(group.inverse(g0), g1));
    for (int k = 0; k < 10; ++k) {
      const double t = 0.1 * k;
      const GroupElement gt = exp_curve(group, g0, g1, t);
      const AlgebraVector rest = group.log(group.product(group.inverse(gt), g1));
      worst = std::max(worst, (rest - (1.0 - t) * full).norm());
    }
  }
  return worst;
}

double worst_integration_error(const Group& group, Rng& rng, int n, int steps) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const GroupElement g0 = random_element(group, rng);
    const GroupElement g1 = random_element(group, rng);
    const VectorField field = [&](const GroupElement& g, double t) { return conditional_field(group, g, g1, t); };
    worst = std::max(worst, distance(group, integrate_field(group, field, g0, steps).back(), g1));
  }
  return worst;
}

double translation_reduction_error(Rng& rng) {
  const TranslationGroup group(3);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const GroupElement x0 = random_element(group, rng);
    const GroupElement x1 = random_element(group, rng);
    const double t = rng.uniform(0.0, 0.99);
    const Eigen::VectorXd segment = (1.0 - t) * x0.payload + t * x1.payload;
    worst = std::max(worst, (exp_curve(group, x0, x1, t).payload - segment).cwiseAbs().maxCoeff());
    const Eigen::VectorXd euclid = (x1.payload - x0.payload) / (1.0 - t);
    worst = std::max(worst, (conditional_field(group, x0, x1, t) - euclid).cwiseAbs().maxCoeff());
  }
  return worst;
}

double gradient_check_error(Rng& rng) {
  const VectorFieldNet net = make_random_net({4, 3, 8, 2}, rng);
  TrainingBatch batch;
  batch.features = Eigen::MatrixXd::NullaryExpr(4, 5, [&] { return rng.uniform(-1.0, 1.0); });
  batch.times = Eigen::VectorXd::NullaryExpr(5, [&] { return rng.uniform(); });
  batch.targets = Eigen::MatrixXd::NullaryExpr(3, 5, [&] { return rng.uniform(-1.0, 1.0); });
  const MetricWeights weights(Eigen::Vector3d(1.0, 0.5, 2.0));

  const Eigen::VectorXd analytic = flatten(loss_and_grad(net, batch, weights).gradient);
  const Eigen::VectorXd theta = net.flat_parameters();
  VectorFieldNet probe = net;
  // Fourth-order central stencil; the two-point one loses ~1e-12 to cancellation,
  // which swamps the smallest gradient components.
  const double h = 1e-3;
  auto shifted = [&](Eigen::Index i, double delta) {
    Eigen::VectorXd p = theta;
    p[i] += delta;
    probe.set_flat_parameters(p);
    return evaluate_loss_and_grad(probe, batch, weights).loss;
  };
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double numeric =
        (8.0 * (shifted(i, h) - shifted(i, -h)) - (shifted(i, 2.0 * h) - shifted(i, -2.0 * h))) / (12.0 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-7});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
  }
  return worst;
}

}  // namespace

std::vector<CheckResult> run_selfcheck(const SelfcheckOptions& options) {
  std::vector<CheckResult> results;
  Rng rng(options.seed);
  for (const auto& [label, group] : groups_under_test(options)) {
    results.push_back(check("roundtrip exp(log(g)) = g  [" + label + "]", worst_roundtrip(*group, rng, 2000), 1e-9));
  }
  for (const auto& [label, group] : groups_under_test(options)) {
    results.push_back(
        check("exp-curve identity log(g_t^-1 g1) = (1-t) log(g0^-1 g1)  [" + label + "]",
              worst_curve_identity(*group, rng, 50), 1e-8));
  }
  for (const auto& [label, group] : groups_under_test(options)) {
    results.push_back(check("conditional-field integration endpoint, 1000 steps  [" + label + "]",
                            worst_integration_error(*group, rng, 5, 1000), 1e-3));
  }
  results.push_back(check("translation group reduces to line segment", translation_reduction_error(rng), 1e-12));
  results.push_back(check("gradient vs central differences (rel. error)", gradient_check_error(rng), 1e-4));
  return results;
}

int print_selfcheck(std::ostream& out, const std::vector<CheckResult>& results) {
  int failures = 0;
  char buf[64];
  for (const auto& r : results) {
    if (!r.passed) ++failures;
    std::snprintf(buf, sizeof buf, "%.3e < %.1e", r.value, r.threshold);
    out << (r.passed ? "PASS  " : "FAIL  ") << r.name << "  (" << buf << ")\n";
  }
  out << (results.size() - static_cast<std::size_t>(failures)) << "/" << results.size() << " checks passed\n";
  return failures;
}

}  // namespace liefm
