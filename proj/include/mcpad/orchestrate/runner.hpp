#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcpad/evaluation/metrics.hpp"
#include "mcpad/evaluation/scores.hpp"
#include "mcpad/models/trainer.hpp"
#include "mcpad/orchestrate/workspace.hpp"

namespace mcpad::orchestrate {

using Logger = std::function<void(const std::string&)>;

struct PreprocessOptions {
  double scale = 1.0;
  int frames_per_video = 10;
  bool force = false;  ///< rebuild even when an up-to-date cube exists
  int workers = 1;
};

struct PreprocessSummary {
  int written = 0;
  int skipped = 0;
};

/// Builds cubes for the sampled frames of `sample_ids` (all samples when empty).
/// A cube is up to date when its sidecar records the current calibration hash.
PreprocessSummary run_preprocess(const Workspace& ws, const PreprocessOptions& opt,
                                 const std::vector<std::string>& sample_ids = {},
                                 const Logger& log = {});

/// Training examples (one per sampled frame) for a fold, restricted to `combo`.
/// Throws IoError naming the first sample whose cube is missing.
std::vector<models::Example> load_examples(const Workspace& ws,
                                           const protocols::ProtocolDefinition& protocol,
                                           dataset::Fold fold, const std::string& combo,
                                           double scale, int frames_per_video);

/// Video-level scores: mean of the frame scores of each sample in the fold.
evaluation::ScoreFile score_fold(const Workspace& ws, const models::Detector& detector,
                                 const protocols::ProtocolDefinition& protocol,
                                 dataset::Fold fold, double scale, int frames_per_video,
                                 int workers = 1);

/// One train / score / evaluate cycle.
struct CellSpec {
  std::string protocol = "grandtest-c";
  std::string combo = "RGB";
  double scale = 1.0;
  std::uint64_t seed = 0;
  std::string preset = "desk-scale";
  models::TrainConfig train;  ///< train.seed is overridden by `seed`
  int frames_per_video = 10;
};

nlohmann::ordered_json cell_spec_to_json(const CellSpec& spec);
CellSpec cell_spec_from_json(const nlohmann::json& j);

/// Content hash of the cell spec together with the protocol's fold contents.
std::string cell_hash(const CellSpec& spec, const protocols::ProtocolDefinition& protocol);

struct CellResult {
  CellSpec spec;
  std::string hash;
  evaluation::MetricsReport metrics;  ///< test fold at the dev-selected threshold
  double runtime_s = 0.0;
  int best_epoch = 0;
  bool reused = false;  ///< loaded from a completed run directory
};

struct RunOptions {
  bool force = false;
  int workers = 1;  ///< preprocessing / scoring threads
  Logger log;
};

models::Checkpoint train_cell(const Workspace& ws, const CellSpec& spec,
                              const protocols::ProtocolDefinition& protocol, const Logger& log = {});

/// Runs (or resumes) a cell. Outputs under runs/<hash>/: checkpoint.mckp,
/// scores_dev.csv, scores_test.csv, metrics.json, cell.json.
CellResult run_cell(const Workspace& ws, const CellSpec& spec, const RunOptions& opt = {});

}  // namespace mcpad::orchestrate
