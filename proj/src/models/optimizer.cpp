#include "mcpad/models/optimizer.hpp"

#include <cmath>

namespace mcpad::models {

Adam::Adam(std::vector<Param*> params, double lr, double weight_decay, double beta1, double beta2,
           double eps)
    : params_(std::move(params)), lr_(lr), wd_(weight_decay), b1_(beta1), b2_(beta2), eps_(eps) {
  for (Param* p : params_) {
    m_.emplace_back(p->size(), 0.0f);
    v_.emplace_back(p->size(), 0.0f);
  }
}

void Adam::step(double grad_scale) {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, t_);
  const double c2 = 1.0 - std::pow(b2_, t_);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Param& p = *params_[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = grad_scale * p.grad[i] + wd_ * p.value[i];
      m[i] = static_cast<float>(b1_ * m[i] + (1.0 - b1_) * g);
      v[i] = static_cast<float>(b2_ * v[i] + (1.0 - b2_) * g * g);
      const double mh = m[i] / c1;
      const double vh = v[i] / c2;
      p.value[i] = static_cast<float>(p.value[i] - lr_ * mh / (std::sqrt(vh) + eps_));
    }
  }
}

}  // namespace mcpad::models
