#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "mcpad/dataset/manifest.hpp"

namespace mcpad::evaluation {

using dataset::AttackType;
using dataset::Label;

struct ScoreRow {
  std::string sample_id;
  Label label = Label::Bonafide;
  std::optional<AttackType> attack_type;
  double score = 0.0;

  bool is_bonafide() const { return label == Label::Bonafide; }
};

struct ScoreFile {
  std::string fold;  ///< "dev", "test", ...; not part of the CSV
  std::vector<ScoreRow> rows;
};

/// CSV `sample_id,label,attack_type,score`; attack_type is empty for bonafide.
/// Scores are written with 17 significant digits so a reload is exact.
void save_scores(const std::string& path, const ScoreFile& scores);
ScoreFile load_scores(const std::string& path, const std::string& fold = {});
std::string scores_to_csv(const ScoreFile& scores);
ScoreFile scores_from_csv(const std::string& text, const std::string& fold = {});

/// Per-sample feature vectors with their labels (one row per sample).
struct EmbeddingTable {
  std::vector<ScoreRow> meta;  ///< score field unused
  Eigen::MatrixXd features;    ///< meta.size() x dim

  int dim() const { return static_cast<int>(features.cols()); }
};

/// CSV `sample_id,label,attack_type,f0..fN`, values printed with %.9g
/// (round-trips float32 exactly).
void save_embeddings(const std::string& path, const EmbeddingTable& table);
EmbeddingTable load_embeddings(const std::string& path);

}  // namespace mcpad::evaluation
