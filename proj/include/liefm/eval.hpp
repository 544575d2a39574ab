#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "liefm/data.hpp"
#include "liefm/groups.hpp"
#include "liefm/mlp.hpp"

namespace liefm {

/// Smallest batch two_sample_metrics accepts.
inline constexpr std::size_t kMinEvalSamples = 50;

struct EvalReport {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  /// 2 E|X-Y| - E|X-X'| - E|Y-Y'| on the feature embedding (V-statistic).
  double energy_distance = 0.0;
  /// Biased (V-statistic) squared MMD with an RBF kernel, and its square root.
  double mmd2 = 0.0;
  double mmd = 0.0;
  /// RBF bandwidth: median pairwise distance of the pooled sample.
  double bandwidth = 0.0;
  /// Largest group-invariant defect over both samples.
  double on_manifold_defect = 0.0;
  Eigen::VectorXd feature_mean_a;
  Eigen::VectorXd feature_mean_b;
  Eigen::VectorXd feature_std_a;
  Eigen::VectorXd feature_std_b;

  std::string to_json() const;
  /// Throws ParseError on malformed input.
  static EvalReport from_json(const std::string& text);
};

/// Throws UsageError if either batch has fewer than kMinEvalSamples elements.
EvalReport two_sample_metrics(const Group& group, const SampleBatch& a, const SampleBatch& b);

/// MMD values of random relabelings of the pooled sample.
struct PermutationTest {
  double observed_mmd = 0.0;
  std::vector<double> null_mmd;  // sorted ascending

  /// Empirical p-quantile of the null (p in (0, 1]).
  double quantile(double p) const;
  /// Fraction of null values >= the observed value, with the +1 correction.
  double p_value() const;
};

PermutationTest mmd_permutation_test(const Group& group, const SampleBatch& a, const SampleBatch& b,
                                     int permutations, Rng& rng);

struct FlowResult {
  EvalReport report;
  SampleBatch sources;
  SampleBatch endpoints;
  SampleBatch reference;
  /// trajectories[i] holds steps + 1 elements for source sample i.
  std::vector<std::vector<GroupElement>> trajectories;
  /// Largest defect over every trajectory point.
  double trajectory_defect = 0.0;
};

/// Field given by the network: (g, t) -> forward(net, features(g), t).
VectorField network_field(const Group& group, const VectorFieldNet& net);

/**
 * Flow n source samples through the learned field with Lie-Euler steps and
 * compare the endpoints to a fresh batch of n target samples.
 */
FlowResult flow_and_eval(const Group& group, const VectorFieldNet& net, const Distribution& source,
                         const Distribution& target, int steps, int n, Rng& rng);

}  // namespace liefm
