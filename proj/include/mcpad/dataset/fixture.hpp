#pragma once

#include <string>
#include <vector>

#include "mcpad/dataset/manifest.hpp"

namespace mcpad::dataset {

/// Metadata-only manifest (no frames on disk) with the published per-fold,
/// per-attack-type video counts, plus the borderline records (wigs,
/// retro-glasses, level-0 makeup) that curation must remove.
struct ProtocolFixture {
  std::vector<SampleRecord> records;
  FoldAssignment folds;
};

ProtocolFixture make_protocol_fixture();

/// Writes manifest.json and folds.json into `dir`.
void write_protocol_fixture(const std::string& dir);

}  // namespace mcpad::dataset
