#pragma once

#include <vector>

namespace mcpad::models {

/// Adapts first-layer weights laid out [out][3][k][k] to C input channels: each
/// filter's per-position kernel becomes the mean over the 3 source channels,
/// replicated C times and scaled by 3/C (channel-summed response preserved).
/// C = 3 returns the weights unchanged.
std::vector<float> adapt_first_layer(const std::vector<float>& weights3, int out_channels,
                                     int kernel, int c);

}  // namespace mcpad::models
