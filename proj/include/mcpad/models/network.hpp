#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcpad/models/layers.hpp"

namespace mcpad::models {

/// Dense backbone: stride-2 stem conv (+ optional 3x3/s2 max pool), then dense
/// blocks each followed by a 1x1 transition conv and 2x2 average pool.
struct BackboneConfig {
  int stem_channels = 16;
  int stem_kernel = 3;
  bool stem_pool = true;
  int growth = 8;
  int bottleneck = 32;  ///< width of the 1x1 conv inside a dense layer
  std::vector<int> block_layers{2, 2};
  std::vector<int> transition_channels{16, 32};
  bool batch_norm = false;  ///< frozen-statistics normalization layers
};

struct ModelConfig {
  std::string preset = "desk-scale";
  int in_channels = 3;
  int input_size = 224;
  BackboneConfig backbone;

  /// Channels of the 14x14 feature map, also the embedding dimension.
  int feature_channels() const;
  /// Side of the score map for `input_size`.
  int map_size() const;
  void validate() const;
};

/// 14x14x384 dense trunk with frozen normalization (DenseNet-161 layout up to
/// the second transition).
ModelConfig paper_scale_config(int in_channels);
/// Small trunk with the same 14x14 interface, ~32 feature channels.
ModelConfig desk_scale_config(int in_channels);
/// Resolves "paper-scale" / "desk-scale"; throws ModelError otherwise.
ModelConfig preset_config(const std::string& preset, int in_channels);

nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);

struct ForwardResult {
  Tensor map_logits;            ///< 1 x S x S
  std::vector<float> map;       ///< S*S probabilities
  float binary_logit = 0.0f;
  float binary_prob = 0.0f;
  std::vector<float> embedding;  ///< global average of the backbone features
};

class Network {
public:
  explicit Network(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }

  /// He-normal convolutions, identity normalization, small heads; the first
  /// convolution is drawn for 3 input channels and adapted to in_channels.
  void initialize(std::uint64_t seed);
  void zero_heads();

  ForwardResult forward(const Tensor& input, bool keep = false);
  /// Back-propagates gradients of the loss w.r.t. the map logits (S*S) and the
  /// binary logit through the last kept forward pass.
  void backward(const std::vector<double>& d_map_logits, double d_binary_logit);

  std::vector<Param*> parameters();
  std::size_t parameter_count();
  void zero_grad();

  Conv2d& first_conv() { return *first_conv_; }

private:
  ModelConfig cfg_;
  Sequential backbone_;
  Conv2d* first_conv_ = nullptr;
  std::unique_ptr<Conv2d> map_head_;
  Param fc_weight_;
  Param fc_bias_;
  ForwardResult cached_;
};

}  // namespace mcpad::models
