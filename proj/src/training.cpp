#include "liefm/training.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "liefm/checkpoint.hpp"

namespace liefm {

void TrainConfig::validate() const {
  if (steps < 1) throw UsageError("--steps must be >= 1, got " + std::to_string(steps));
  if (batch < 1) throw UsageError("--batch must be >= 1, got " + std::to_string(batch));
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw UsageError("--epsilon must lie in (0, 1)");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw UsageError("--lr must be positive");
  if (width < 1 || hidden_layers < 0) throw UsageError("network width/depth out of range");
}

MetricWeights TrainConfig::weights(int dim) const {
  if (metric_weights.empty()) return MetricWeights::unit(dim);
  if (static_cast<int>(metric_weights.size()) != dim) {
    throw UsageError("--metric-weights needs " + std::to_string(dim) + " values, got " +
                     std::to_string(metric_weights.size()));
  }
  return MetricWeights(Eigen::Map<const Eigen::VectorXd>(metric_weights.data(), dim));
}

CfmSample cfm_sample(const Group& group, int batch, const Distribution& source, const Distribution& target,
                     double epsilon, Rng& time_rng, Rng& source_rng, Rng& target_rng) {
  if (batch < 1) throw UsageError("cfm_sample: batch must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw UsageError("cfm_sample: epsilon must lie in (0, 1)");

  CfmSample out;
  out.batch.features.resize(group.feature_size(), batch);
  out.batch.times.resize(batch);
  out.batch.targets.resize(group.dim(), batch);
  for (int j = 0; j < batch; ++j) {
    const double t = time_rng.uniform(0.0, 1.0 - epsilon);
    GroupElement g0 = source.draw(source_rng);
    GroupElement g1 = target.draw(target_rng);
    const AlgebraVector direction = group.log(group.product(group.inverse(g0), g1));
    GroupElement gt = group.product(g0, group.exp(t * direction));

    out.batch.features.col(j) = group.features(gt);
    out.batch.times[j] = t;
    out.batch.targets.col(j) = left_pushforward(group, gt, direction);
    out.g0.push_back(std::move(g0));
    out.g1.push_back(std::move(g1));
    out.gt.push_back(std::move(gt));
  }
  return out;
}

CfmSample cfm_sample(const Group& group, int batch, const Distribution& source, const Distribution& target,
                     double epsilon, Rng& rng) {
  return cfm_sample(group, batch, source, target, epsilon, rng, rng, rng);
}

TrainResult train(const TrainConfig& config, const StepCallback& on_step) {
  config.validate();
  const auto group = make_group(config.group);
  const Distribution source = make_distribution(*group, config.source);
  const Distribution target = make_distribution(*group, config.target);
  const MetricWeights weights = config.weights(group->dim());

  Rng init_rng = Rng::stream(config.seed, "init");
  Rng time_rng = Rng::stream(config.seed, "time");
  Rng source_rng = Rng::stream(config.seed, "source");
  Rng target_rng = Rng::stream(config.seed, "target");

  TrainResult result;
  result.net = make_vector_field_net({group->feature_size(), group->dim(), config.width, config.hidden_layers},
                                     init_rng);
  AdamConfig adam;
  adam.lr = config.lr;
  OptimizerState optimizer = OptimizerState::for_net(result.net, adam);

  result.losses.reserve(static_cast<std::size_t>(config.steps));
  for (int step = 0; step < config.steps; ++step) {
    const CfmSample sample =
        cfm_sample(*group, config.batch, source, target, config.epsilon, time_rng, source_rng, target_rng);
    const LossAndGrad lg = evaluate_loss_and_grad(result.net, sample.batch, weights);
    if (!std::isfinite(lg.loss)) {
      throw NumericalError("training diverged: non-finite loss at step " + std::to_string(step));
    }
    adam_step(optimizer, result.net, lg.gradient);
    if (!result.net.all_finite()) {
      throw NumericalError("training diverged: non-finite parameters after step " + std::to_string(step));
    }
    result.losses.push_back(lg.loss);
    if (on_step) on_step(step, lg.loss);
  }

  if (!config.checkpoint_path.empty()) save_checkpoint(Checkpoint::for_group(*group, result.net), config.checkpoint_path);
  if (!config.loss_log_path.empty()) write_loss_log(result.losses, config.loss_log_path);
  return result;
}

void write_loss_log(const std::vector<double>& losses, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write loss log " + path.string());
  out << "step,loss\n";
  char buf[64];
  for (std::size_t i = 0; i < losses.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, losses[i]);
    out << buf;
  }
}

std::vector<double> read_loss_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read loss log " + path.string());
  std::string line;
  long line_no = 1;
  if (!std::getline(in, line) || line != "step,loss") throw ParseError("expected header 'step,loss'", 1);
  std::vector<double> losses;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected 'step,loss'", line_no);
    try {
      const long step = std::stol(line.substr(0, comma));
      if (step != static_cast<long>(losses.size())) throw ParseError("steps out of order", line_no);
      losses.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::logic_error&) {
      throw ParseError("unparseable number", line_no);
    }
  }
  return losses;
}

std::vector<double> smooth(const std::vector<double>& values, int window) {
  if (window < 1) throw UsageError("smooth: window must be >= 1");
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<std::size_t>(window)) sum -= values[i - static_cast<std::size_t>(window)];
    const std::size_t count = std::min(i + 1, static_cast<std::size_t>(window));
    out[i] = sum / static_cast<double>(count);
  }
  return out;
}

}  // namespace liefm
