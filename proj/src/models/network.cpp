#include "mcpad/models/network.hpp"

#include <cmath>

#include "mcpad/common/error.hpp"
#include "mcpad/common/rng.hpp"
#include "mcpad/models/adapt.hpp"

namespace mcpad::models {

namespace {

float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }

int conv_out(int n, int k, int s, int p) { return (n + 2 * p - k) / s + 1; }

}  // namespace

int ModelConfig::feature_channels() const {
  if (backbone.transition_channels.empty()) return backbone.stem_channels;
  return backbone.transition_channels.back();
}

int ModelConfig::map_size() const {
  int n = conv_out(input_size, backbone.stem_kernel, 2, backbone.stem_kernel / 2);
  if (backbone.stem_pool) n = conv_out(n, 3, 2, 1);
  for (std::size_t i = 0; i < backbone.block_layers.size(); ++i) n /= 2;
  return n;
}

void ModelConfig::validate() const {
  const auto& b = backbone;
  if (in_channels < 1) throw ModelError("in_channels must be >= 1");
  if (b.stem_channels < 1 || b.stem_kernel < 1 || b.growth < 1 || b.bottleneck < 1) {
    throw ModelError("backbone sizes must be positive");
  }
  if (b.block_layers.size() != b.transition_channels.size()) {
    throw ModelError("need one transition per dense block");
  }
  for (std::size_t i = 0; i < b.block_layers.size(); ++i) {
    if (b.block_layers[i] < 1 || b.transition_channels[i] < 1) {
      throw ModelError("dense blocks need >= 1 layer and >= 1 transition channel");
    }
  }
  if (map_size() != 14) {
    throw ModelError("backbone must produce a 14x14 map, got " + std::to_string(map_size()));
  }
}

ModelConfig paper_scale_config(int in_channels) {
  ModelConfig c;
  c.preset = "paper-scale";
  c.in_channels = in_channels;
  c.backbone.stem_channels = 96;
  c.backbone.stem_kernel = 7;
  c.backbone.stem_pool = true;
  c.backbone.growth = 48;
  c.backbone.bottleneck = 192;
  c.backbone.block_layers = {6, 12};
  c.backbone.transition_channels = {192, 384};
  c.backbone.batch_norm = true;
  return c;
}

ModelConfig desk_scale_config(int in_channels) {
  ModelConfig c;
  c.preset = "desk-scale";
  c.in_channels = in_channels;
  return c;
}

ModelConfig preset_config(const std::string& preset, int in_channels) {
  if (preset == "paper-scale") return paper_scale_config(in_channels);
  if (preset == "desk-scale") return desk_scale_config(in_channels);
  throw ModelError("unknown model preset '" + preset + "'");
}

nlohmann::json model_config_to_json(const ModelConfig& cfg) {
  const auto& b = cfg.backbone;
  return {{"preset", cfg.preset},
          {"in_channels", cfg.in_channels},
          {"input_size", cfg.input_size},
          {"backbone",
           {{"stem_channels", b.stem_channels},
            {"stem_kernel", b.stem_kernel},
            {"stem_pool", b.stem_pool},
            {"growth", b.growth},
            {"bottleneck", b.bottleneck},
            {"block_layers", b.block_layers},
            {"transition_channels", b.transition_channels},
            {"batch_norm", b.batch_norm}}}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  try {
    c.preset = j.at("preset").get<std::string>();
    c.in_channels = j.at("in_channels").get<int>();
    c.input_size = j.at("input_size").get<int>();
    const auto& b = j.at("backbone");
    c.backbone.stem_channels = b.at("stem_channels").get<int>();
    c.backbone.stem_kernel = b.at("stem_kernel").get<int>();
    c.backbone.stem_pool = b.at("stem_pool").get<bool>();
    c.backbone.growth = b.at("growth").get<int>();
    c.backbone.bottleneck = b.at("bottleneck").get<int>();
    c.backbone.block_layers = b.at("block_layers").get<std::vector<int>>();
    c.backbone.transition_channels = b.at("transition_channels").get<std::vector<int>>();
    c.backbone.batch_norm = b.at("batch_norm").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("bad model config: ") + e.what());
  }
  c.validate();
  return c;
}

Network::Network(const ModelConfig& cfg)
    : cfg_(cfg), fc_weight_("classifier.weight", {1, 196}), fc_bias_("classifier.bias", {1}) {
  cfg_.validate();
  const auto& b = cfg_.backbone;
  const bool bn = b.batch_norm;

  auto stem = std::make_unique<Conv2d>("features.conv0", cfg_.in_channels, b.stem_channels,
                                       b.stem_kernel, 2, b.stem_kernel / 2, !bn);
  first_conv_ = stem.get();
  backbone_.add(std::move(stem));
  if (bn) backbone_.add(std::make_unique<Affine>("features.norm0", b.stem_channels));
  backbone_.add(std::make_unique<ReLU>());
  if (b.stem_pool) backbone_.add(std::make_unique<MaxPool>());

  int c = b.stem_channels;
  for (std::size_t i = 0; i < b.block_layers.size(); ++i) {
    const std::string idx = std::to_string(i + 1);
    auto block = std::make_unique<DenseBlock>("features.denseblock" + idx, c, b.block_layers[i],
                                              b.growth, b.bottleneck, bn);
    c = block->out_channels();
    backbone_.add(std::move(block));
    const std::string t = "features.transition" + idx;
    if (bn) backbone_.add(std::make_unique<Affine>(t + ".norm", c));
    backbone_.add(std::make_unique<ReLU>());
    backbone_.add(std::make_unique<Conv2d>(t + ".conv", c, b.transition_channels[i], 1, 1, 0, !bn));
    backbone_.add(std::make_unique<AvgPool>());
    c = b.transition_channels[i];
  }
  map_head_ = std::make_unique<Conv2d>("dec", c, 1, 1, 1, 0, true);
}

std::vector<Param*> Network::parameters() {
  std::vector<Param*> out;
  backbone_.collect(out);
  map_head_->collect(out);
  out.push_back(&fc_weight_);
  out.push_back(&fc_bias_);
  return out;
}

std::size_t Network::parameter_count() {
  std::size_t n = 0;
  for (Param* p : parameters()) n += p->size();
  return n;
}

void Network::zero_grad() {
  for (Param* p : parameters()) p->zero_grad();
}

void Network::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (Param* p : parameters()) {
    if (p == &first_conv_->weight()) continue;
    const bool is_weight = p->shape.size() == 4;
    if (p->name.find("norm") != std::string::npos) {
      const bool gamma = p->name.size() > 7 && p->name.compare(p->name.size() - 7, 7, ".weight") == 0;
      std::fill(p->value.begin(), p->value.end(), gamma ? 1.0f : 0.0f);
    } else if (is_weight) {
      const int fan_in = p->shape[1] * p->shape[2] * p->shape[3];
      const double sd = std::sqrt(2.0 / fan_in);
      for (float& v : p->value) v = static_cast<float>(rng.normal(0.0, sd));
    } else {
      std::fill(p->value.begin(), p->value.end(), 0.0f);
    }
  }
  // Heads: small weights so the initial maps sit near 0.5.
  for (float& v : map_head_->weight().value) v = static_cast<float>(rng.normal(0.0, 0.01));
  for (float& v : fc_weight_.value) v = static_cast<float>(rng.normal(0.0, 0.01));

  // First layer: drawn for RGB, then adapted to the requested channel count.
  const auto& b = cfg_.backbone;
  const int k = b.stem_kernel;
  std::vector<float> rgb(static_cast<std::size_t>(b.stem_channels) * 3 * k * k);
  const double sd = std::sqrt(2.0 / (3.0 * k * k));
  for (float& v : rgb) v = static_cast<float>(rng.normal(0.0, sd));
  first_conv_->weight().value = adapt_first_layer(rgb, b.stem_channels, k, cfg_.in_channels);
}

void Network::zero_heads() {
  std::fill(map_head_->weight().value.begin(), map_head_->weight().value.end(), 0.0f);
  std::fill(map_head_->bias()->value.begin(), map_head_->bias()->value.end(), 0.0f);
  std::fill(fc_weight_.value.begin(), fc_weight_.value.end(), 0.0f);
  std::fill(fc_bias_.value.begin(), fc_bias_.value.end(), 0.0f);
}

ForwardResult Network::forward(const Tensor& input, bool keep) {
  if (input.c != cfg_.in_channels) {
    throw ModelError("network expects " + std::to_string(cfg_.in_channels) +
                     " input channels, got " + std::to_string(input.c));
  }
  if (input.h != cfg_.input_size || input.w != cfg_.input_size) {
    throw ModelError("network expects a " + std::to_string(cfg_.input_size) + "x" +
                     std::to_string(cfg_.input_size) + " input");
  }
  const Tensor feats = backbone_.forward(input, keep);
  ForwardResult r;
  r.embedding.assign(static_cast<std::size_t>(feats.c), 0.0f);
  for (int k = 0; k < feats.c; ++k) {
    double s = 0.0;
    const float* p = feats.channel(k);
    for (std::size_t i = 0; i < feats.plane(); ++i) s += p[i];
    r.embedding[static_cast<std::size_t>(k)] = static_cast<float>(s / static_cast<double>(feats.plane()));
  }
  r.map_logits = map_head_->forward(feats, keep);
  r.map.resize(r.map_logits.size());
  double z = fc_bias_.value[0];
  for (std::size_t i = 0; i < r.map.size(); ++i) {
    r.map[i] = sigmoid(r.map_logits.data[i]);
    z += static_cast<double>(fc_weight_.value[i]) * r.map[i];
  }
  add_macs(static_cast<std::int64_t>(r.map.size()));
  r.binary_logit = static_cast<float>(z);
  r.binary_prob = sigmoid(r.binary_logit);
  if (keep) cached_ = r;
  return r;
}

void Network::backward(const std::vector<double>& d_map_logits, double d_binary_logit) {
  const std::size_t n = cached_.map.size();
  if (d_map_logits.size() != n) throw ModelError("map gradient has the wrong size");
  fc_bias_.grad[0] += static_cast<float>(d_binary_logit);
  Tensor g(1, cached_.map_logits.h, cached_.map_logits.w);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = cached_.map[i];
    fc_weight_.grad[i] += static_cast<float>(d_binary_logit * p);
    const double dp = d_binary_logit * fc_weight_.value[i];
    g.data[i] = static_cast<float>(d_map_logits[i] + dp * p * (1.0 - p));
  }
  const Tensor gf = map_head_->backward(g);
  backbone_.backward(gf);
}

}  // namespace mcpad::models
