#pragma once

#include <cstddef>
#include <vector>

#include "mcpad/preprocess/cube.hpp"

namespace mcpad::models {

/// Dense CHW float tensor for a single sample.
struct Tensor {
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<float> data;

  Tensor() = default;
  Tensor(int c_, int h_, int w_, float fill = 0.0f)
      : c(c_), h(h_), w(w_), data(static_cast<std::size_t>(c_) * h_ * w_, fill) {}

  std::size_t size() const { return data.size(); }
  std::size_t plane() const { return static_cast<std::size_t>(h) * w; }
  float* channel(int k) { return data.data() + static_cast<std::size_t>(k) * plane(); }
  const float* channel(int k) const { return data.data() + static_cast<std::size_t>(k) * plane(); }
  float& at(int k, int y, int x) { return data[(static_cast<std::size_t>(k) * h + y) * w + x]; }
  float at(int k, int y, int x) const { return data[(static_cast<std::size_t>(k) * h + y) * w + x]; }
  bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }
  void zero() { std::fill(data.begin(), data.end(), 0.0f); }
};

/// HWC cube -> CHW tensor.
Tensor cube_to_tensor(const preprocess::ChannelCube& cube);

/// Mirror along the width axis.
Tensor flip_horizontal(const Tensor& t);

}  // namespace mcpad::models
