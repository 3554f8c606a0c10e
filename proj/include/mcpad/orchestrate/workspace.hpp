#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mcpad/dataset/manifest.hpp"
#include "mcpad/geometry/camera.hpp"
#include "mcpad/protocols/protocol.hpp"

namespace mcpad::orchestrate {

namespace fs = std::filesystem;

/// On-disk experiment workspace:
///   manifest.json  folds.json  calibration.json  frames/
///   protocols/<name>.json            (optional overrides)
///   cubes/s<scale>/<sample_id>/<frame:03d>.mccb (+ .json sidecar)
///   runs/<cell hash>/                checkpoint, score files, metrics
///   results.csv
class Workspace {
public:
  explicit Workspace(fs::path root);

  const fs::path& root() const { return root_; }
  fs::path manifest_path() const { return root_ / "manifest.json"; }
  fs::path folds_path() const { return root_ / "folds.json"; }
  fs::path calibration_path() const { return root_ / "calibration.json"; }
  fs::path protocol_path(const std::string& name) const;
  fs::path cube_dir(double scale) const;
  fs::path cube_path(double scale, const std::string& sample_id, int frame) const;
  fs::path run_dir(const std::string& cell_hash) const { return root_ / "runs" / cell_hash; }
  fs::path results_path() const { return root_ / "results.csv"; }

  std::vector<dataset::SampleRecord> manifest() const;
  dataset::FoldAssignment folds() const;
  geometry::CameraRig rig() const;
  void save_rig(const geometry::CameraRig& rig) const;

  /// protocols/<name>.json when present, otherwise built from manifest + folds.
  protocols::ProtocolDefinition protocol(const std::string& name) const;

private:
  fs::path root_;
};

/// "1", "0.5", "0.0125": shortest round-trip text for a scale factor.
std::string scale_token(double scale);

void ensure_dir(const fs::path& dir);

}  // namespace mcpad::orchestrate
