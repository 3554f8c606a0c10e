#include "mcpad/models/tensor.hpp"

#include <algorithm>

namespace mcpad::models {

Tensor cube_to_tensor(const preprocess::ChannelCube& cube) {
  const int c = cube.depth();
  Tensor t(c, cube.height, cube.width);
  for (int y = 0; y < cube.height; ++y) {
    for (int x = 0; x < cube.width; ++x) {
      for (int k = 0; k < c; ++k) t.at(k, y, x) = cube.at(y, x, k);
    }
  }
  return t;
}

Tensor flip_horizontal(const Tensor& t) {
  Tensor out(t.c, t.h, t.w);
  for (int k = 0; k < t.c; ++k) {
    for (int y = 0; y < t.h; ++y) {
      const float* src = &t.data[(static_cast<std::size_t>(k) * t.h + y) * t.w];
      float* dst = &out.data[(static_cast<std::size_t>(k) * t.h + y) * t.w];
      std::reverse_copy(src, src + t.w, dst);
    }
  }
  return out;
}

}  // namespace mcpad::models
