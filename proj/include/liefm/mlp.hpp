#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "liefm/lie_core.hpp"
#include "liefm/rng.hpp"

namespace liefm {

enum class Activation { silu };

std::string to_string(Activation a);
/// Throws UsageError for unknown names.
Activation activation_from_string(const std::string& name);

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
};

/// Per-layer parameter arrays; used for gradients and optimizer moments too.
using LayerParams = std::vector<DenseLayer>;

/**
 * Time-dependent vector field u(g, t) as an MLP.
 *
 * Input is the group's feature encoding with t appended; output is the
 * field's components in the left-invariant frame. Hidden layers use the
 * activation; the output layer is affine.
 */
struct VectorFieldNet {
  LayerParams layers;
  Activation activation = Activation::silu;

  int input_size() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols()); }
  int output_size() const { return layers.empty() ? 0 : static_cast<int>(layers.back().weight.rows()); }
  Eigen::Index parameter_count() const;

  Eigen::VectorXd flat_parameters() const;
  void set_flat_parameters(const Eigen::VectorXd& flat);
  bool all_finite() const;
};

struct NetShape {
  int feature_size = 0;
  int output_size = 0;
  int width = 64;
  int hidden_layers = 4;
};

/**
 * Kaiming-uniform fan-in initialisation, U(-1/sqrt(fan_in), 1/sqrt(fan_in))
 * for weights and biases of hidden layers. The output layer starts at zero so
 * the initial field is the zero field.
 */
VectorFieldNet make_vector_field_net(const NetShape& shape, Rng& rng);

/// Every parameter (output layer included) drawn as in make_vector_field_net.
/// Used for gradient checks, where a zero output layer would hide most terms.
VectorFieldNet make_random_net(const NetShape& shape, Rng& rng);

/// u(features, t). Throws UsageError on a feature length mismatch.
AlgebraVector forward(const VectorFieldNet& net, const Eigen::VectorXd& features, double t);

/// Column-wise forward pass; `inputs` is input_size x batch (time row included).
Eigen::MatrixXd forward_batch(const VectorFieldNet& net, const Eigen::MatrixXd& inputs);

/// Regression batch: column j pairs (features_j, times_j) with targets_j.
struct TrainingBatch {
  Eigen::MatrixXd features;  // feature_size x batch
  Eigen::VectorXd times;     // batch
  Eigen::MatrixXd targets;   // dim x batch

  Eigen::Index size() const { return times.size(); }
  /// features stacked over the time row.
  Eigen::MatrixXd net_inputs() const;
};

struct LossAndGrad {
  double loss = 0.0;
  LayerParams gradient;
};

/// Loss and gradient without a finiteness check (for gradient checks).
LossAndGrad evaluate_loss_and_grad(const VectorFieldNet& net, const TrainingBatch& batch,
                                   const MetricWeights& weights);

/**
 * Mean over the batch of metric_sq_norm(u(features, t) - target), with its
 * exact gradient by reverse-mode differentiation through the layers.
 *
 * Throws UsageError on an empty batch or shape mismatch, NumericalError on a
 * non-finite loss.
 */
LossAndGrad loss_and_grad(const VectorFieldNet& net, const TrainingBatch& batch, const MetricWeights& weights);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  LayerParams first_moment;
  LayerParams second_moment;
  std::int64_t step = 0;

  static OptimizerState for_net(const VectorFieldNet& net, const AdamConfig& config);
};

/// One bias-corrected Adam update of `net` in place.
void adam_step(OptimizerState& state, VectorFieldNet& net, const LayerParams& gradient);

/// Flatten / unflatten helpers matching VectorFieldNet::flat_parameters order.
Eigen::VectorXd flatten(const LayerParams& params);

}  // namespace liefm
