#include "greensentry/model_state.hpp"

#include <istream>
#include <ostream>

#include <json.hpp>

#include "greensentry/error.hpp"

namespace greensentry {
namespace {

using nlohmann::json;

json to_json(const ModelConfig& c) {
  return {{"input_dim", c.input_dim},
          {"node_size", c.node_size},
          {"hidden", c.hidden},
          {"hidden_activation", activation_name(c.hidden_activation)},
          {"output_activation", activation_name(c.output_activation)}};
}

json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},       {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
          {"optimizer", optimizer_name(c.optimizer)}, {"beta1", c.beta1}, {"beta2", c.beta2},
          {"epsilon", c.epsilon},     {"seed", c.seed}};
}

json to_json(const ScalerParams& s) {
  json degenerate = json::array();
  for (bool d : s.degenerate) degenerate.push_back(d);
  json names = json::array();
  for (Feature f : kFeatureOrder) names.push_back(feature_name(f));
  return {{"features", names}, {"min", s.min}, {"max", s.max}, {"degenerate", degenerate}};
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw DataError(std::string("model state: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("model state: bad field '") + key + "': " + e.what());
  }
}

}  // namespace

void save_model(const ModelState& state, std::ostream& out) {
  json layers = json::array();
  for (const auto& l : state.params.layers) {
    layers.push_back({{"fan_in", l.fan_in}, {"fan_out", l.fan_out}, {"weights", l.weights}, {"bias", l.bias}});
  }
  json doc = {
      {"format_version", kModelFormatVersion},
      {"model_config", to_json(state.params.config)},
      {"layers", layers},
      {"scaler", to_json(state.scaler)},
      {"train_config", to_json(state.train_config)},
  };
  if (state.threshold) {
    doc["threshold"] = {{"value", state.threshold->value},
                        {"k", state.threshold->k},
                        {"source_count", state.threshold->source_count}};
  } else {
    doc["threshold"] = nullptr;
  }
  out << doc.dump(1) << '\n';
  if (!out) throw DataError("save_model: write failed");
}

namespace {
ModelState load_model_document(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model state: invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("format_version")) throw DataError("model state: missing format_version");
  const int version = field<int>(doc, "format_version");
  if (version != kModelFormatVersion) {
    throw DataError("model state: unsupported format_version " + std::to_string(version));
  }

  ModelState s;
  const json& mc = doc.at("model_config");
  auto& c = s.params.config;
  c.input_dim = field<int>(mc, "input_dim");
  c.node_size = field<int>(mc, "node_size");
  c.hidden = field<std::vector<int>>(mc, "hidden");
  c.hidden_activation = parse_activation(field<std::string>(mc, "hidden_activation"));
  c.output_activation = parse_activation(field<std::string>(mc, "output_activation"));
  c.validate();

  const auto widths = c.widths();
  const json& layers = doc.at("layers");
  if (!layers.is_array() || layers.size() + 1 != widths.size()) throw DataError("model state: layer count mismatch");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    DenseLayer layer;
    layer.fan_in = field<std::size_t>(layers[l], "fan_in");
    layer.fan_out = field<std::size_t>(layers[l], "fan_out");
    layer.weights = field<std::vector<double>>(layers[l], "weights");
    layer.bias = field<std::vector<double>>(layers[l], "bias");
    if (layer.fan_in != static_cast<std::size_t>(widths[l]) || layer.fan_out != static_cast<std::size_t>(widths[l + 1]) ||
        layer.weights.size() != layer.fan_in * layer.fan_out || layer.bias.size() != layer.fan_out) {
      throw DataError("model state: layer " + std::to_string(l + 1) + " shape mismatch");
    }
    s.params.layers.push_back(std::move(layer));
  }

  const json& sc = doc.at("scaler");
  s.scaler.min = field<FeatureVector>(sc, "min");
  s.scaler.max = field<FeatureVector>(sc, "max");
  s.scaler.degenerate = field<std::array<bool, kFeatureCount>>(sc, "degenerate");

  const json& tc = doc.at("train_config");
  auto& t = s.train_config;
  t.epochs = field<int>(tc, "epochs");
  t.batch_size = field<int>(tc, "batch_size");
  t.learning_rate = field<double>(tc, "learning_rate");
  t.optimizer = parse_optimizer(field<std::string>(tc, "optimizer"));
  t.beta1 = field<double>(tc, "beta1");
  t.beta2 = field<double>(tc, "beta2");
  t.epsilon = field<double>(tc, "epsilon");
  t.seed = field<std::uint64_t>(tc, "seed");

  if (doc.contains("threshold") && !doc.at("threshold").is_null()) {
    const json& th = doc.at("threshold");
    s.threshold = Threshold{field<double>(th, "value"), field<int>(th, "k"), field<std::size_t>(th, "source_count")};
  }
  return s;
}
}  // namespace

ModelState load_model(std::istream& in) {
  try {
    return load_model_document(in);
  } catch (const json::exception& e) {
    throw DataError(std::string("model state: ") + e.what());
  } catch (const UsageError& e) {
    throw DataError(std::string("model state: ") + e.what());
  }
}

}  // namespace greensentry
