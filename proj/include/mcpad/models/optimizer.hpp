#pragma once

#include <vector>

#include "mcpad/models/layers.hpp"

namespace mcpad::models {

/// Adam with L2 weight decay added to the gradient.
class Adam {
public:
  Adam(std::vector<Param*> params, double lr, double weight_decay, double beta1 = 0.9,
       double beta2 = 0.999, double eps = 1e-8);

  /// One update from the accumulated gradients scaled by `grad_scale`.
  void step(double grad_scale = 1.0);
  int steps() const { return t_; }

private:
  std::vector<Param*> params_;
  std::vector<std::vector<float>> m_, v_;
  double lr_, wd_, b1_, b2_, eps_;
  int t_ = 0;
};

}  // namespace mcpad::models
