#include "liefm/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace liefm {

using nlohmann::json;

Checkpoint Checkpoint::for_group(const Group& group, VectorFieldNet net) {
  return {group.name(), group.feature_encoding(), std::move(net)};
}

void Checkpoint::check_compatible(const Group& g) const {
  if (group != g.name()) {
    throw UsageError("checkpoint was trained for group '" + group + "', not '" + g.name() + "'");
  }
  if (feature_encoding != g.feature_encoding()) {
    throw UsageError("checkpoint feature encoding '" + feature_encoding + "' does not match '" +
                     g.feature_encoding() + "'");
  }
  if (net.input_size() != g.feature_size() + 1 || net.output_size() != g.dim()) {
    throw UsageError("checkpoint network shape does not fit group '" + g.name() + "'");
  }
}

std::string checkpoint_to_json(const Checkpoint& checkpoint) {
  json layers = json::array();
  for (const auto& layer : checkpoint.net.layers) {
    std::vector<double> weight;
    weight.reserve(static_cast<std::size_t>(layer.weight.size()));
    for (Eigen::Index i = 0; i < layer.weight.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weight.cols(); ++j) weight.push_back(layer.weight(i, j));
    layers.push_back({{"rows", layer.weight.rows()},
                      {"cols", layer.weight.cols()},
                      {"weight", weight},
                      {"bias", std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())}});
  }
  const json doc = {{"format", "liefm-checkpoint"},
                    {"version", Checkpoint::kVersion},
                    {"group", checkpoint.group},
                    {"feature_encoding", checkpoint.feature_encoding},
                    {"activation", to_string(checkpoint.net.activation)},
                    {"layers", layers}};
  return doc.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != "liefm-checkpoint") throw ParseError("not a liefm checkpoint");
    const int version = doc.at("version").get<int>();
    if (version != Checkpoint::kVersion) {
      throw ParseError("unsupported checkpoint version " + std::to_string(version));
    }
    Checkpoint out;
    out.group = doc.at("group").get<std::string>();
    out.feature_encoding = doc.at("feature_encoding").get<std::string>();
    out.net.activation = activation_from_string(doc.at("activation").get<std::string>());
    for (const auto& l : doc.at("layers")) {
      const auto rows = l.at("rows").get<Eigen::Index>();
      const auto cols = l.at("cols").get<Eigen::Index>();
      const auto weight = l.at("weight").get<std::vector<double>>();
      const auto bias = l.at("bias").get<std::vector<double>>();
      if (rows < 1 || cols < 1 || static_cast<Eigen::Index>(weight.size()) != rows * cols ||
          static_cast<Eigen::Index>(bias.size()) != rows) {
        throw ParseError("checkpoint layer " + std::to_string(out.net.layers.size()) + " has inconsistent shape");
      }
      DenseLayer layer{Eigen::MatrixXd(rows, cols), Eigen::Map<const Eigen::VectorXd>(bias.data(), rows)};
      for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) layer.weight(i, j) = weight[static_cast<std::size_t>(i * cols + j)];
      if (!out.net.layers.empty() && out.net.layers.back().weight.rows() != cols) {
        throw ParseError("checkpoint layer " + std::to_string(out.net.layers.size()) +
                         " does not chain with the previous layer");
      }
      out.net.layers.push_back(std::move(layer));
    }
    if (out.net.layers.empty()) throw ParseError("checkpoint has no layers");
    if (!out.net.all_finite()) throw ParseError("checkpoint contains non-finite parameters");
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  } catch (const UsageError& e) {
    throw ParseError(e.what());
  }
}

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(checkpoint) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace liefm
