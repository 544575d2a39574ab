#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "liefm/data.hpp"
#include "liefm/groups.hpp"
#include "liefm/mlp.hpp"

namespace liefm {

struct TrainConfig {
  std::string group = "se2";
  std::string source = "hline";
  std::string target = "vline";
  int steps = 10000;
  int batch = 256;
  double lr = 1e-3;
  std::uint64_t seed = 0;
  /// Training times are drawn from U[0, 1 - epsilon].
  double epsilon = 1e-3;
  /// Empty means unit weights.
  std::vector<double> metric_weights;
  int width = 64;
  int hidden_layers = 4;
  /// Written only when non-empty.
  std::filesystem::path checkpoint_path;
  std::filesystem::path loss_log_path;

  /// Throws UsageError naming the offending field.
  void validate() const;
  MetricWeights weights(int dim) const;
};

/// One conditional flow matching batch plus the endpoints it was built from.
struct CfmSample {
  std::vector<GroupElement> g0;
  std::vector<GroupElement> g1;
  std::vector<GroupElement> gt;
  TrainingBatch batch;
};

/**
 * Draw T ~ U[0, 1 - epsilon], G0 ~ source, G1 ~ target independently, and form
 * G_T = exp_curve(G0, G1, T) with regression target log(G0^-1 G1).
 *
 * The target equals conditional_field(G_T, G1, T) along the curve; the
 * constant form is used because it has no pole at T -> 1.
 */
CfmSample cfm_sample(const Group& group, int batch, const Distribution& source, const Distribution& target,
                     double epsilon, Rng& time_rng, Rng& source_rng, Rng& target_rng);

/// Convenience overload drawing all three streams from one generator.
CfmSample cfm_sample(const Group& group, int batch, const Distribution& source, const Distribution& target,
                     double epsilon, Rng& rng);

struct TrainResult {
  VectorFieldNet net;
  std::vector<double> losses;
};

/// Called after every optimizer step with (step index, loss).
using StepCallback = std::function<void(int, double)>;

/**
 * Conditional flow matching: cfm_sample -> loss_and_grad -> adam_step for
 * config.steps iterations. Deterministic given the config. Throws
 * NumericalError naming the step if the loss or parameters become non-finite.
 * Writes the checkpoint and a `step,loss` CSV when the paths are set.
 */
TrainResult train(const TrainConfig& config, const StepCallback& on_step = {});

void write_loss_log(const std::vector<double>& losses, const std::filesystem::path& path);
/// Throws ParseError with the line number on malformed rows.
std::vector<double> read_loss_log(const std::filesystem::path& path);

/// Trailing moving average with the given window (shorter at the start).
std::vector<double> smooth(const std::vector<double>& values, int window);

}  // namespace liefm
