#include "mcpad/models/complexity.hpp"

namespace mcpad::models {

LayerCost conv_cost(int in, int out, int kernel, int stride, int pad, bool bias, int h, int w) {
  const std::int64_t ho = (h + 2 * pad - kernel) / stride + 1;
  const std::int64_t wo = (w + 2 * pad - kernel) / stride + 1;
  const std::int64_t per_output = static_cast<std::int64_t>(in) * kernel * kernel;
  LayerCost c;
  c.params = per_output * out + (bias ? out : 0);
  c.macs = per_output * out * ho * wo;
  return c;
}

LayerCost linear_cost(int in, int out, bool bias) {
  LayerCost c;
  c.params = static_cast<std::int64_t>(in) * out + (bias ? out : 0);
  c.macs = static_cast<std::int64_t>(in) * out;
  return c;
}

ComplexityReport model_complexity_report(const ModelConfig& cfg) {
  cfg.validate();
  ComplexityReport r;
  const auto& b = cfg.backbone;
  const bool bn = b.batch_norm;
  auto add = [&](std::string name, LayerCost c) {
    c.name = std::move(name);
    r.parameters += c.params;
    r.macs += c.macs;
    r.layers.push_back(std::move(c));
  };
  auto norm = [&](const std::string& name, int channels) {
    if (bn) add(name, LayerCost{{}, 2LL * channels, 0});
  };

  int side = cfg.input_size;
  add("conv0", conv_cost(cfg.in_channels, b.stem_channels, b.stem_kernel, 2, b.stem_kernel / 2,
                         !bn, side, side));
  side = (side + 2 * (b.stem_kernel / 2) - b.stem_kernel) / 2 + 1;
  norm("norm0", b.stem_channels);
  if (b.stem_pool) side = (side + 2 - 3) / 2 + 1;

  int c = b.stem_channels;
  for (std::size_t i = 0; i < b.block_layers.size(); ++i) {
    const std::string blk = "block" + std::to_string(i + 1);
    for (int l = 0; l < b.block_layers[i]; ++l) {
      const std::string p = blk + ".layer" + std::to_string(l + 1);
      norm(p + ".norm1", c);
      add(p + ".conv1", conv_cost(c, b.bottleneck, 1, 1, 0, !bn, side, side));
      norm(p + ".norm2", b.bottleneck);
      add(p + ".conv2", conv_cost(b.bottleneck, b.growth, 3, 1, 1, !bn, side, side));
      c += b.growth;
    }
    const std::string t = "transition" + std::to_string(i + 1);
    norm(t + ".norm", c);
    add(t + ".conv", conv_cost(c, b.transition_channels[i], 1, 1, 0, !bn, side, side));
    c = b.transition_channels[i];
    side /= 2;
  }
  add("map_head", conv_cost(c, 1, 1, 1, 0, true, side, side));
  add("binary_head", linear_cost(side * side, 1, true));
  return r;
}

}  // namespace mcpad::models
