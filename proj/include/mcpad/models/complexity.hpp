#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mcpad/models/network.hpp"

namespace mcpad::models {

struct LayerCost {
  std::string name;
  std::int64_t params = 0;
  std::int64_t macs = 0;
};

LayerCost conv_cost(int in, int out, int kernel, int stride, int pad, bool bias, int h, int w);
LayerCost linear_cost(int in, int out, bool bias);

struct ComplexityReport {
  std::int64_t parameters = 0;
  std::int64_t macs = 0;  ///< convolutions and linear layers, one input
  std::vector<LayerCost> layers;
};

/// Closed-form counts from the configuration alone (no network is built).
ComplexityReport model_complexity_report(const ModelConfig& cfg);

}  // namespace mcpad::models
