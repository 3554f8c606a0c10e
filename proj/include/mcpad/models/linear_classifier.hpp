#pragma once

#include <Eigen/Core>
#include <vector>

#include <nlohmann/json.hpp>

namespace mcpad::models {

struct LinearClassifierConfig {
  double lambda = 1e-4;    ///< L2 weight on w (bias unregularized)
  int iterations = 2000;
  double step = 1.0;       ///< eta_t = step / sqrt(t)
  bool balance_classes = true;
};

/// Linear max-margin classifier trained by full-batch hinge-loss subgradient
/// descent on standardized features scaled by 1/sqrt(D). The 1/sqrt(D) factor
/// keeps the Gram matrix unchanged when a feature block is duplicated, so the
/// optimization path (and hence every score) is invariant to duplication.
class LinearClassifier {
public:
  /// rows = examples; labels: bonafide = 1, attack = 0.
  static LinearClassifier fit(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                              const LinearClassifierConfig& cfg = {});

  double margin(const Eigen::VectorXd& features) const;
  /// logistic(margin / ||w||), in [0, 1]; higher = bonafide.
  double score(const Eigen::VectorXd& features) const;
  Eigen::VectorXd scores(const Eigen::MatrixXd& x) const;

  int dim() const { return static_cast<int>(mean_.size()); }
  const Eigen::VectorXd& weights() const { return w_; }
  double bias() const { return b_; }
  double objective() const { return objective_; }

  nlohmann::json to_json() const;
  static LinearClassifier from_json(const nlohmann::json& j);

private:
  Eigen::VectorXd transform(const Eigen::VectorXd& features) const;

  Eigen::VectorXd mean_;
  Eigen::VectorXd inv_scale_;
  Eigen::VectorXd w_;
  double b_ = 0.0;
  double objective_ = 0.0;
};

LinearClassifier fit_linear_classifier(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                                       const LinearClassifierConfig& cfg = {});

}  // namespace mcpad::models
