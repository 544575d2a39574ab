#include "liefm/mlp.hpp"

#include <cmath>
#include <sstream>

namespace liefm {

namespace {

Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& z) { return 1.0 / (1.0 + (-z).exp()); }

Eigen::ArrayXXd activate(const Eigen::ArrayXXd& z) { return z * sigmoid(z); }

// d/dz [z sigma(z)] = sigma(z) (1 + z (1 - sigma(z)))
Eigen::ArrayXXd activate_derivative(const Eigen::ArrayXXd& z) {
  const Eigen::ArrayXXd s = sigmoid(z);
  return s * (1.0 + z * (1.0 - s));
}

void check_shapes(const VectorFieldNet& net) {
  if (net.layers.empty()) throw UsageError("network has no layers");
  for (std::size_t i = 1; i < net.layers.size(); ++i) {
    if (net.layers[i].weight.cols() != net.layers[i - 1].weight.rows()) {
      throw UsageError("network layer " + std::to_string(i) + " input size does not match previous layer output");
    }
  }
  for (const auto& layer : net.layers) {
    if (layer.bias.size() != layer.weight.rows()) throw UsageError("network layer bias size mismatch");
  }
}

LayerParams zeros_like(const LayerParams& params) {
  LayerParams out;
  out.reserve(params.size());
  for (const auto& p : params)
    out.push_back({Eigen::MatrixXd::Zero(p.weight.rows(), p.weight.cols()), Eigen::VectorXd::Zero(p.bias.size())});
  return out;
}

VectorFieldNet build_net(const NetShape& shape, Rng& rng, bool zero_output) {
  if (shape.feature_size < 1 || shape.output_size < 1 || shape.width < 1 || shape.hidden_layers < 0) {
    throw UsageError("invalid network shape");
  }
  VectorFieldNet net;
  int fan_in = shape.feature_size + 1;
  for (int l = 0; l <= shape.hidden_layers; ++l) {
    const bool last = l == shape.hidden_layers;
    const int fan_out = last ? shape.output_size : shape.width;
    DenseLayer layer{Eigen::MatrixXd::Zero(fan_out, fan_in), Eigen::VectorXd::Zero(fan_out)};
    if (!(last && zero_output)) {
      const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i) layer.weight(i, j) = rng.uniform(-bound, bound);
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias[i] = rng.uniform(-bound, bound);
    }
    net.layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  return net;
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::silu:
      return "silu";
  }
  return "unknown";
}

Activation activation_from_string(const std::string& name) {
  if (name == "silu") return Activation::silu;
  throw UsageError("unknown activation '" + name + "'");
}

Eigen::Index VectorFieldNet::parameter_count() const {
  Eigen::Index n = 0;
  for (const auto& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

Eigen::VectorXd flatten(const LayerParams& params) {
  Eigen::Index n = 0;
  for (const auto& l : params) n += l.weight.size() + l.bias.size();
  Eigen::VectorXd flat(n);
  Eigen::Index at = 0;
  for (const auto& l : params) {
    flat.segment(at, l.weight.size()) = l.weight.reshaped();
    at += l.weight.size();
    flat.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  }
  return flat;
}

Eigen::VectorXd VectorFieldNet::flat_parameters() const { return flatten(layers); }

void VectorFieldNet::set_flat_parameters(const Eigen::VectorXd& flat) {
  if (flat.size() != parameter_count()) throw UsageError("flat parameter vector has the wrong length");
  Eigen::Index at = 0;
  for (auto& l : layers) {
    l.weight.reshaped() = flat.segment(at, l.weight.size());
    at += l.weight.size();
    l.bias = flat.segment(at, l.bias.size());
    at += l.bias.size();
  }
}

bool VectorFieldNet::all_finite() const {
  for (const auto& l : layers)
    if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
  return true;
}

VectorFieldNet make_vector_field_net(const NetShape& shape, Rng& rng) { return build_net(shape, rng, true); }

VectorFieldNet make_random_net(const NetShape& shape, Rng& rng) { return build_net(shape, rng, false); }

Eigen::MatrixXd forward_batch(const VectorFieldNet& net, const Eigen::MatrixXd& inputs) {
  check_shapes(net);
  if (inputs.rows() != net.input_size()) {
    std::ostringstream msg;
    msg << "forward: network expects " << net.input_size() << " inputs (features + time), got " << inputs.rows();
    throw UsageError(msg.str());
  }
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const auto& layer = net.layers[l];
    Eigen::MatrixXd z = layer.weight * a;
    z.colwise() += layer.bias;
    a = (l + 1 < net.layers.size()) ? Eigen::MatrixXd(activate(z.array()).matrix()) : z;
  }
  return a;
}

AlgebraVector forward(const VectorFieldNet& net, const Eigen::VectorXd& features, double t) {
  Eigen::VectorXd input(features.size() + 1);
  input << features, t;
  return forward_batch(net, input);
}

Eigen::MatrixXd TrainingBatch::net_inputs() const {
  Eigen::MatrixXd in(features.rows() + 1, features.cols());
  in.topRows(features.rows()) = features;
  in.bottomRows(1) = times.transpose();
  return in;
}

LossAndGrad evaluate_loss_and_grad(const VectorFieldNet& net, const TrainingBatch& batch,
                                   const MetricWeights& weights) {
  check_shapes(net);
  const Eigen::Index n = batch.size();
  if (n == 0) throw UsageError("loss_and_grad: empty batch");
  if (batch.features.cols() != n || batch.targets.cols() != n) {
    throw UsageError("loss_and_grad: features, times and targets must have the same batch size");
  }
  if (batch.targets.rows() != net.output_size() || weights.dim() != net.output_size()) {
    throw UsageError("loss_and_grad: target/metric dimension does not match network output");
  }

  // Forward pass, keeping every layer's input and pre-activation.
  const std::size_t depth = net.layers.size();
  std::vector<Eigen::MatrixXd> inputs(depth);
  std::vector<Eigen::MatrixXd> pre(depth);
  inputs[0] = batch.net_inputs();
  if (inputs[0].rows() != net.input_size()) {
    throw UsageError("loss_and_grad: feature size does not match network input");
  }
  Eigen::MatrixXd out;
  for (std::size_t l = 0; l < depth; ++l) {
    pre[l] = net.layers[l].weight * inputs[l];
    pre[l].colwise() += net.layers[l].bias;
    if (l + 1 < depth) {
      inputs[l + 1] = activate(pre[l].array()).matrix();
    } else {
      out = pre[l];
    }
  }

  const Eigen::MatrixXd residual = out - batch.targets;
  const Eigen::ArrayXd w = weights.values().array();
  const double inv_n = 1.0 / static_cast<double>(n);
  LossAndGrad result;
  result.loss = (residual.array().square().colwise() * w).sum() * inv_n;

  // Reverse pass.
  result.gradient = zeros_like(net.layers);
  Eigen::MatrixXd delta = (2.0 * inv_n) * (residual.array().colwise() * w).matrix();
  for (std::size_t l = depth; l-- > 0;) {
    result.gradient[l].weight = delta * inputs[l].transpose();
    result.gradient[l].bias = delta.rowwise().sum();
    if (l > 0) {
      delta = ((net.layers[l].weight.transpose() * delta).array() * activate_derivative(pre[l - 1].array())).matrix();
    }
  }
  return result;
}

LossAndGrad loss_and_grad(const VectorFieldNet& net, const TrainingBatch& batch, const MetricWeights& weights) {
  LossAndGrad result = evaluate_loss_and_grad(net, batch, weights);
  if (!std::isfinite(result.loss)) throw NumericalError("loss_and_grad: non-finite loss");
  return result;
}

OptimizerState OptimizerState::for_net(const VectorFieldNet& net, const AdamConfig& config) {
  OptimizerState s;
  s.config = config;
  s.first_moment = zeros_like(net.layers);
  s.second_moment = zeros_like(net.layers);
  return s;
}

void adam_step(OptimizerState& state, VectorFieldNet& net, const LayerParams& gradient) {
  if (gradient.size() != net.layers.size() || state.first_moment.size() != net.layers.size()) {
    throw UsageError("adam_step: gradient/optimizer state do not match the network");
  }
  ++state.step;
  const AdamConfig& c = state.config;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));

  auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
    if (g.rows() != param.rows() || g.cols() != param.cols()) throw UsageError("adam_step: shape mismatch");
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    param.array() -= c.lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + c.epsilon);
  };
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    update(net.layers[l].weight, state.first_moment[l].weight, state.second_moment[l].weight, gradient[l].weight);
    update(net.layers[l].bias, state.first_moment[l].bias, state.second_moment[l].bias, gradient[l].bias);
  }
}

}  // namespace liefm
