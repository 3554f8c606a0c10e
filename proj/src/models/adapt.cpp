#include "mcpad/models/adapt.hpp"

#include "mcpad/common/error.hpp"

namespace mcpad::models {

std::vector<float> adapt_first_layer(const std::vector<float>& weights3, int out_channels,
                                     int kernel, int c) {
  if (c < 1) throw ModelError("target channel count must be >= 1");
  const std::size_t kk = static_cast<std::size_t>(kernel) * kernel;
  if (weights3.size() != static_cast<std::size_t>(out_channels) * 3 * kk) {
    throw ModelError("first-layer weights must be [out][3][k][k]");
  }
  if (c == 3) return weights3;
  std::vector<float> out(static_cast<std::size_t>(out_channels) * c * kk);
  const double scale = 3.0 / c;
  for (int o = 0; o < out_channels; ++o) {
    const float* src = &weights3[static_cast<std::size_t>(o) * 3 * kk];
    for (std::size_t i = 0; i < kk; ++i) {
      const double mean = (static_cast<double>(src[i]) + src[kk + i] + src[2 * kk + i]) / 3.0;
      const auto v = static_cast<float>(mean * scale);
      for (int ch = 0; ch < c; ++ch) {
        out[(static_cast<std::size_t>(o) * c + ch) * kk + i] = v;
      }
    }
  }
  return out;
}

}  // namespace mcpad::models
