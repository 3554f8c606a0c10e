#pragma once

#include <span>
#include <vector>

namespace mcpad::models {

inline constexpr double kProbEpsilon = 1e-7;

/// 0.5 * mean BCE of the score map against a constant label map
/// + 0.5 * BCE of the binary output. label: bonafide = 1, attack = 0.
/// Probabilities are clipped to [eps, 1 - eps].
double pixbis_loss(std::span<const float> score_map, double binary_prob, double label);

struct LossGrad {
  double loss = 0.0;
  std::vector<double> d_map_logits;  ///< map term only
  double d_binary_logit = 0.0;
};

/// Loss and its gradient w.r.t. the map and binary pre-activations (sigmoid
/// inputs). Clipped probabilities contribute zero gradient.
LossGrad pixbis_loss_grad(std::span<const double> map_logits, double binary_logit, double label);

double sigmoid(double x);

}  // namespace mcpad::models
