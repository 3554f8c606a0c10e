#pragma once

#include <string>

#include "mcpad/evaluation/scores.hpp"
#include "mcpad/models/trainer.hpp"
#include "mcpad/orchestrate/workspace.hpp"

namespace mcpad::orchestrate {

/// One row per sample of the fold: the mean embedding over its sampled frames.
evaluation::EmbeddingTable collect_embeddings(const Workspace& ws, const models::Detector& detector,
                                              const protocols::ProtocolDefinition& protocol,
                                              dataset::Fold fold, double scale,
                                              int frames_per_video = 10);

/// collect_embeddings + CSV export; returns the table that was written.
evaluation::EmbeddingTable export_embeddings(const Workspace& ws, const models::Checkpoint& ckpt,
                                             const protocols::ProtocolDefinition& protocol,
                                             dataset::Fold fold, double scale,
                                             const std::string& out_csv,
                                             int frames_per_video = 10);

}  // namespace mcpad::orchestrate
