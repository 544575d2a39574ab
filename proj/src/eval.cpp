#include "liefm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace liefm {

namespace {

Eigen::MatrixXd feature_matrix(const Group& group, const SampleBatch& batch) {
  Eigen::MatrixXd f(group.feature_size(), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) f.col(static_cast<Eigen::Index>(j)) = group.features(batch.elements[j]);
  return f;
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.cols();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (x.col(i) - x.col(j)).norm();
  }
  return d;
}

double median_off_diagonal(const Eigen::MatrixXd& d) {
  std::vector<double> v;
  const Eigen::Index n = d.rows();
  v.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) v.push_back(d(i, j));
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

/// Mean of m over the index blocks (rows in `r`, cols in `c`), fixed order.
double block_mean(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& r, const std::vector<Eigen::Index>& c) {
  double sum = 0.0;
  for (const Eigen::Index i : r)
    for (const Eigen::Index j : c) sum += m(i, j);
  return sum / static_cast<double>(r.size() * c.size());
}

double mmd2_from_kernel(const Eigen::MatrixXd& k, const std::vector<Eigen::Index>& a,
                        const std::vector<Eigen::Index>& b) {
  return block_mean(k, a, a) + block_mean(k, b, b) - 2.0 * block_mean(k, a, b);
}

struct Pooled {
  Eigen::MatrixXd distances;
  Eigen::MatrixXd kernel;
  double bandwidth = 0.0;
  std::vector<Eigen::Index> a;
  std::vector<Eigen::Index> b;
};

Pooled pool(const Group& group, const SampleBatch& a, const SampleBatch& b) {
  if (a.size() < kMinEvalSamples || b.size() < kMinEvalSamples) {
    throw UsageError("two-sample metrics need at least " + std::to_string(kMinEvalSamples) +
                     " samples per side, got " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  const Eigen::MatrixXd fa = feature_matrix(group, a);
  const Eigen::MatrixXd fb = feature_matrix(group, b);
  Eigen::MatrixXd all(fa.rows(), fa.cols() + fb.cols());
  all << fa, fb;

  Pooled p;
  p.distances = pairwise_distances(all);
  p.bandwidth = median_off_diagonal(p.distances);
  // Degenerate pools (all points equal) fall back to unit bandwidth.
  const double h = p.bandwidth > 0.0 ? p.bandwidth : 1.0;
  p.kernel = (-p.distances.array().square() / (2.0 * h * h)).exp().matrix();
  p.a.resize(a.size());
  p.b.resize(b.size());
  std::iota(p.a.begin(), p.a.end(), Eigen::Index{0});
  std::iota(p.b.begin(), p.b.end(), static_cast<Eigen::Index>(a.size()));
  return p;
}

void moments(const Eigen::MatrixXd& f, Eigen::VectorXd& mean, Eigen::VectorXd& stddev) {
  mean = f.rowwise().mean();
  stddev = ((f.colwise() - mean).array().square().rowwise().sum() / static_cast<double>(f.cols())).sqrt();
}

nlohmann::json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

EvalReport two_sample_metrics(const Group& group, const SampleBatch& a, const SampleBatch& b) {
  const Pooled p = pool(group, a, b);
  EvalReport r;
  r.n_a = a.size();
  r.n_b = b.size();
  r.bandwidth = p.bandwidth;
  r.mmd2 = std::max(0.0, mmd2_from_kernel(p.kernel, p.a, p.b));
  r.mmd = std::sqrt(r.mmd2);
  r.energy_distance = std::max(0.0, 2.0 * block_mean(p.distances, p.a, p.b) - block_mean(p.distances, p.a, p.a) -
                                        block_mean(p.distances, p.b, p.b));
  for (const auto* batch : {&a, &b})
    for (const auto& g : batch->elements) r.on_manifold_defect = std::max(r.on_manifold_defect, group.defect(g));
  moments(feature_matrix(group, a), r.feature_mean_a, r.feature_std_a);
  moments(feature_matrix(group, b), r.feature_mean_b, r.feature_std_b);
  return r;
}

std::string EvalReport::to_json() const {
  const nlohmann::json j = {{"n_a", n_a},
                            {"n_b", n_b},
                            {"energy_distance", energy_distance},
                            {"mmd", mmd},
                            {"mmd2", mmd2},
                            {"bandwidth", bandwidth},
                            {"on_manifold_defect", on_manifold_defect},
                            {"feature_mean_a", vec_json(feature_mean_a)},
                            {"feature_mean_b", vec_json(feature_mean_b)},
                            {"feature_std_a", vec_json(feature_std_a)},
                            {"feature_std_b", vec_json(feature_std_b)}};
  return j.dump(2);
}

EvalReport EvalReport::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    EvalReport r;
    r.n_a = j.at("n_a").get<std::size_t>();
    r.n_b = j.at("n_b").get<std::size_t>();
    r.energy_distance = j.at("energy_distance").get<double>();
    r.mmd = j.at("mmd").get<double>();
    r.mmd2 = j.at("mmd2").get<double>();
    r.bandwidth = j.at("bandwidth").get<double>();
    r.on_manifold_defect = j.at("on_manifold_defect").get<double>();
    r.feature_mean_a = json_vec(j.at("feature_mean_a"));
    r.feature_mean_b = json_vec(j.at("feature_mean_b"));
    r.feature_std_a = json_vec(j.at("feature_std_a"));
    r.feature_std_b = json_vec(j.at("feature_std_b"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed eval report: ") + e.what());
  }
}

double PermutationTest::quantile(double p) const {
  if (null_mmd.empty() || !(p > 0.0 && p <= 1.0)) throw UsageError("quantile: need p in (0, 1] and a non-empty null");
  const auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(null_mmd.size())));
  return null_mmd[std::max<std::size_t>(rank, 1) - 1];
}

double PermutationTest::p_value() const {
  const auto exceed = std::count_if(null_mmd.begin(), null_mmd.end(), [&](double v) { return v >= observed_mmd; });
  return static_cast<double>(exceed + 1) / static_cast<double>(null_mmd.size() + 1);
}

PermutationTest mmd_permutation_test(const Group& group, const SampleBatch& a, const SampleBatch& b,
                                     int permutations, Rng& rng) {
  if (permutations < 1) throw UsageError("permutation test needs at least one permutation");
  const Pooled p = pool(group, a, b);
  PermutationTest out;
  out.observed_mmd = std::sqrt(std::max(0.0, mmd2_from_kernel(p.kernel, p.a, p.b)));

  std::vector<Eigen::Index> order(p.a.size() + p.b.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  out.null_mmd.reserve(static_cast<std::size_t>(permutations));
  for (int k = 0; k < permutations; ++k) {
    for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    const std::vector<Eigen::Index> ia(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(p.a.size()));
    const std::vector<Eigen::Index> ib(order.begin() + static_cast<std::ptrdiff_t>(p.a.size()), order.end());
    out.null_mmd.push_back(std::sqrt(std::max(0.0, mmd2_from_kernel(p.kernel, ia, ib))));
  }
  std::sort(out.null_mmd.begin(), out.null_mmd.end());
  return out;
}

VectorField network_field(const Group& group, const VectorFieldNet& net) {
  return [&group, &net](const GroupElement& g, double t) { return forward(net, group.features(g), t); };
}

FlowResult flow_and_eval(const Group& group, const VectorFieldNet& net, const Distribution& source,
                         const Distribution& target, int steps, int n, Rng& rng) {
  FlowResult out;
  out.sources = source.sample(n, rng);
  out.reference = target.sample(n, rng);
  const VectorField field = network_field(group, net);
  out.trajectories.reserve(out.sources.size());
  for (const auto& g0 : out.sources.elements) {
    out.trajectories.push_back(integrate_field(group, field, g0, steps));
    for (const auto& g : out.trajectories.back()) out.trajectory_defect = std::max(out.trajectory_defect, group.defect(g));
    out.endpoints.elements.push_back(out.trajectories.back().back());
  }
  out.endpoints.times.assign(out.endpoints.size(), 1.0);
  out.report = two_sample_metrics(group, out.endpoints, out.reference);
  return out;
}

}  // namespace liefm
