#include "fairshift/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace fairshift {
namespace {

using nlohmann::json;

constexpr const char* kFormat = "fairshift-checkpoint";
constexpr int kVersion = 1;

json layer_to_json(const DenseLayer& l) {
  const auto w = l.weight.value.values();
  const auto b = l.bias.value.values();
  return json{{"in", l.in_dim()},
              {"out", l.out_dim()},
              {"weight", std::vector<double>(w.begin(), w.end())},
              {"bias", std::vector<double>(b.begin(), b.end())}};
}

DenseLayer layer_from_json(const json& j) {
  const auto in = j.at("in").get<std::size_t>();
  const auto out = j.at("out").get<std::size_t>();
  const auto w = j.at("weight").get<std::vector<double>>();
  const auto b = j.at("bias").get<std::vector<double>>();
  if (w.size() != in * out || b.size() != out) throw std::runtime_error("checkpoint: layer parameter count mismatch");
  Matrix wm(in, out), bm(1, out);
  std::copy(w.begin(), w.end(), wm.data());
  std::copy(b.begin(), b.end(), bm.data());
  DenseLayer layer;
  layer.weight = Parameter(std::move(wm));
  layer.bias = Parameter(std::move(bm));
  return layer;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  const auto& p = ckpt.predictor;
  const auto& c = p.config();
  json layers = json::array();
  for (const auto& l : p.layers()) layers.push_back(layer_to_json(l));
  json doc{{"format", kFormat},
           {"version", kVersion},
           {"predictor",
            {{"config",
              {{"input_dim", c.input_dim},
               {"hidden_width", c.hidden_width},
               {"representation_width", c.representation_width},
               {"head_width", c.head_width},
               {"dropout_rate", c.dropout_rate}}},
             {"input_normalization",
              {{"mean", p.input_normalization().mean}, {"std", p.input_normalization().std}}},
             {"layers", layers}}}};
  if (ckpt.weight_network) {
    doc["weight_network"] = {
        {"layers", json::array({layer_to_json(ckpt.weight_network->first()), layer_to_json(ckpt.weight_network->second())})}};
  } else {
    doc["weight_network"] = nullptr;
  }
  return doc.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.at("format").get<std::string>() != kFormat) throw std::runtime_error("checkpoint: unknown format");
  if (doc.at("version").get<int>() != kVersion) throw std::runtime_error("checkpoint: unsupported version");
  const json& pj = doc.at("predictor");
  const json& cj = pj.at("config");
  PredictorConfig cfg;
  cfg.input_dim = cj.at("input_dim").get<std::size_t>();
  cfg.hidden_width = cj.at("hidden_width").get<std::size_t>();
  cfg.representation_width = cj.at("representation_width").get<std::size_t>();
  cfg.head_width = cj.at("head_width").get<std::size_t>();
  cfg.dropout_rate = cj.at("dropout_rate").get<double>();
  const json& lj = pj.at("layers");
  if (lj.size() != 4) throw std::runtime_error("checkpoint: predictor needs 4 layers");
  std::array<DenseLayer, 4> layers;
  for (std::size_t i = 0; i < 4; ++i) layers[i] = layer_from_json(lj[i]);
  InputNormalization norm{pj.at("input_normalization").at("mean").get<std::vector<double>>(),
                          pj.at("input_normalization").at("std").get<std::vector<double>>()};
  Checkpoint ckpt{PredictorModel(cfg, std::move(layers), std::move(norm)), std::nullopt};
  const json& wj = doc.at("weight_network");
  if (!wj.is_null()) {
    const json& wl = wj.at("layers");
    if (wl.size() != 2) throw std::runtime_error("checkpoint: weight network needs 2 layers");
    ckpt.weight_network.emplace(layer_from_json(wl[0]), layer_from_json(wl[1]));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(ckpt) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace fairshift
