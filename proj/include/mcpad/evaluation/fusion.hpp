#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "mcpad/evaluation/scores.hpp"
#include "mcpad/models/linear_classifier.hpp"

namespace mcpad::evaluation {

enum class FusionMethod { Mean, LLR, MLP, GMM };

std::string_view fusion_method_name(FusionMethod m);
/// Throws EvaluationError for an unknown name.
FusionMethod parse_fusion_method(std::string_view name);

struct FusionConfig {
  int mlp_hidden = 10;
  int mlp_epochs = 3000;
  double mlp_lr = 0.05;
  int gmm_components = 2;
  int gmm_iterations = 100;
  double gmm_var_floor = 1e-6;
  double llr_ridge = 1e-4;
  std::uint64_t seed = 0;
};

/// Per-sample score vectors, one column per system. Rows follow the first
/// file's order; every other file must hold exactly the same sample ids.
struct ScoreMatrix {
  std::vector<ScoreRow> meta;
  Eigen::MatrixXd x;
};

ScoreMatrix align_scores(const std::vector<ScoreFile>& systems);

/// A fitted fusion rule mapping a score vector to a bonafide score in [0, 1].
class ScoreFuser {
public:
  virtual ~ScoreFuser() = default;
  virtual double fuse(const Eigen::VectorXd& scores) const = 0;
};

std::unique_ptr<ScoreFuser> fit_fuser(FusionMethod method, const ScoreMatrix& dev,
                                      const FusionConfig& cfg = {});

ScoreFile fuse_scores(FusionMethod method, const std::vector<ScoreFile>& dev,
                      const std::vector<ScoreFile>& test, const FusionConfig& cfg = {});

/// Dev and test halves of a fused score run (the dev half is needed to pick tau).
struct FusedScores {
  ScoreFile dev;
  ScoreFile test;
};

FusedScores fuse_scores_with_dev(FusionMethod method, const std::vector<ScoreFile>& dev,
                                 const std::vector<ScoreFile>& test, const FusionConfig& cfg = {});

/// Concatenates per-system embeddings (aligned by sample id), fits the linear
/// max-margin classifier on dev and scores both folds.
FusedScores fuse_features(const std::vector<EmbeddingTable>& dev,
                          const std::vector<EmbeddingTable>& test,
                          const models::LinearClassifierConfig& cfg = {});

}  // namespace mcpad::evaluation
