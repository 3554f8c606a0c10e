#include "mcpad/models/loss.hpp"

#include <algorithm>
#include <cmath>

#include "mcpad/common/error.hpp"

namespace mcpad::models {

namespace {

double bce(double p, double y) {
  const double q = std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

// d bce(sigmoid(z)) / dz, zero where the probability is clipped.
double bce_logit_grad(double p, double y) {
  if (p < kProbEpsilon || p > 1.0 - kProbEpsilon) return 0.0;
  return p - y;
}

}  // namespace

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double pixbis_loss(std::span<const float> score_map, double binary_prob, double label) {
  if (score_map.empty()) throw ModelError("empty score map");
  double pix = 0.0;
  for (float p : score_map) pix += bce(p, label);
  pix /= static_cast<double>(score_map.size());
  return 0.5 * pix + 0.5 * bce(binary_prob, label);
}

LossGrad pixbis_loss_grad(std::span<const double> map_logits, double binary_logit, double label) {
  if (map_logits.empty()) throw ModelError("empty score map");
  const double n = static_cast<double>(map_logits.size());
  LossGrad g;
  g.d_map_logits.resize(map_logits.size());
  double pix = 0.0;
  for (std::size_t i = 0; i < map_logits.size(); ++i) {
    const double p = sigmoid(map_logits[i]);
    pix += bce(p, label);
    g.d_map_logits[i] = 0.5 * bce_logit_grad(p, label) / n;
  }
  const double q = sigmoid(binary_logit);
  g.loss = 0.5 * pix / n + 0.5 * bce(q, label);
  g.d_binary_logit = 0.5 * bce_logit_grad(q, label);
  return g;
}

}  // namespace mcpad::models
