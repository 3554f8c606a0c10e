#include "mcpad/models/linear_classifier.hpp"

#include <cmath>

#include "mcpad/common/error.hpp"
#include "mcpad/models/loss.hpp"

namespace mcpad::models {

LinearClassifier LinearClassifier::fit(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                       const LinearClassifierConfig& cfg) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n != static_cast<Eigen::Index>(labels.size())) {
    throw ModelError("feature rows and labels differ in length");
  }
  if (d == 0) throw ModelError("no features");
  if (!x.allFinite()) throw ModelError("features contain non-finite values");
  int n_pos = 0;
  for (int l : labels) n_pos += l == 1 ? 1 : 0;
  const int n_neg = static_cast<int>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0) throw ModelError("linear classifier needs both classes");

  LinearClassifier c;
  c.mean_ = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - c.mean_.transpose();
  const Eigen::VectorXd sd = (centered.colwise().squaredNorm() / static_cast<double>(n))
                                 .transpose()
                                 .cwiseSqrt();
  const double dim_scale = 1.0 / std::sqrt(static_cast<double>(d));
  c.inv_scale_.resize(d);
  for (Eigen::Index k = 0; k < d; ++k) c.inv_scale_[k] = dim_scale / (sd[k] > 1e-12 ? sd[k] : 1.0);
  const Eigen::MatrixXd z = centered * c.inv_scale_.asDiagonal();

  Eigen::VectorXd y(n), weight(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const bool pos = labels[static_cast<std::size_t>(i)] == 1;
    y[i] = pos ? 1.0 : -1.0;
    weight[i] = cfg.balance_classes ? 0.5 * static_cast<double>(n) / (pos ? n_pos : n_neg) : 1.0;
  }
  weight /= static_cast<double>(n);

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  auto objective = [&](const Eigen::VectorXd& m) {
    double hinge = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) hinge += weight[i] * std::max(0.0, 1.0 - y[i] * m[i]);
    return 0.5 * cfg.lambda * w.squaredNorm() + hinge;
  };

  Eigen::VectorXd margins = Eigen::VectorXd::Zero(n);
  c.w_ = w;
  c.b_ = b;
  c.objective_ = objective(margins);
  for (int t = 1; t <= cfg.iterations; ++t) {
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (y[i] * margins[i] < 1.0) coef[i] = -weight[i] * y[i];
    }
    const Eigen::VectorXd gw = cfg.lambda * w + z.transpose() * coef;
    const double gb = coef.sum();
    const double eta = cfg.step / std::sqrt(static_cast<double>(t));
    w -= eta * gw;
    b -= eta * gb;
    margins = (z * w).array() + b;
    const double obj = objective(margins);
    if (obj < c.objective_) {
      c.objective_ = obj;
      c.w_ = w;
      c.b_ = b;
    }
  }
  return c;
}

Eigen::VectorXd LinearClassifier::transform(const Eigen::VectorXd& features) const {
  if (features.size() != mean_.size()) {
    throw ModelError("expected " + std::to_string(mean_.size()) + " features, got " +
                     std::to_string(features.size()));
  }
  return (features - mean_).cwiseProduct(inv_scale_);
}

double LinearClassifier::margin(const Eigen::VectorXd& features) const {
  return w_.dot(transform(features)) + b_;
}

double LinearClassifier::score(const Eigen::VectorXd& features) const {
  const double m = margin(features);
  const double norm = w_.norm();
  return sigmoid(norm > 1e-12 ? m / norm : m);
}

Eigen::VectorXd LinearClassifier::scores(const Eigen::MatrixXd& x) const {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = score(x.row(i).transpose());
  return out;
}

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

Eigen::VectorXd json_vec(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

nlohmann::json LinearClassifier::to_json() const {
  return {{"mean", vec_json(mean_)},
          {"inv_scale", vec_json(inv_scale_)},
          {"w", vec_json(w_)},
          {"b", b_},
          {"objective", objective_}};
}

LinearClassifier LinearClassifier::from_json(const nlohmann::json& j) {
  LinearClassifier c;
  try {
    c.mean_ = json_vec(j.at("mean"));
    c.inv_scale_ = json_vec(j.at("inv_scale"));
    c.w_ = json_vec(j.at("w"));
    c.b_ = j.at("b").get<double>();
    c.objective_ = j.value("objective", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("$", e.what());
  }
  if (c.mean_.size() != c.w_.size() || c.inv_scale_.size() != c.w_.size()) {
    throw SchemaError("$.w", "dimension mismatch");
  }
  return c;
}

LinearClassifier fit_linear_classifier(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                       const LinearClassifierConfig& cfg) {
  return LinearClassifier::fit(x, labels, cfg);
}

}  // namespace mcpad::models
