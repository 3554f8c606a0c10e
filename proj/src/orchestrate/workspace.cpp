#include "mcpad/orchestrate/workspace.hpp"

#include <cstdio>

#include "mcpad/common/error.hpp"

namespace mcpad::orchestrate {

Workspace::Workspace(fs::path root) : root_(std::move(root)) {}

fs::path Workspace::protocol_path(const std::string& name) const {
  return root_ / "protocols" / (name + ".json");
}

fs::path Workspace::cube_dir(double scale) const { return root_ / "cubes" / ("s" + scale_token(scale)); }

fs::path Workspace::cube_path(double scale, const std::string& sample_id, int frame) const {
  char name[32];
  std::snprintf(name, sizeof(name), "%03d.mccb", frame);
  return cube_dir(scale) / sample_id / name;
}

std::vector<dataset::SampleRecord> Workspace::manifest() const {
  return dataset::load_manifest(manifest_path().string());
}

dataset::FoldAssignment Workspace::folds() const { return dataset::load_folds(folds_path().string()); }

geometry::CameraRig Workspace::rig() const { return geometry::load_rig(calibration_path().string()); }

void Workspace::save_rig(const geometry::CameraRig& rig) const {
  rig.validate();
  // Write-then-rename so readers never observe a partial file.
  const fs::path tmp = calibration_path().string() + ".tmp";
  geometry::save_rig(tmp.string(), rig);
  std::error_code ec;
  fs::rename(tmp, calibration_path(), ec);
  if (ec) throw IoError("cannot replace " + calibration_path().string() + ": " + ec.message());
}

protocols::ProtocolDefinition Workspace::protocol(const std::string& name) const {
  const fs::path p = protocol_path(name);
  if (fs::exists(p)) return protocols::load_protocol(p.string());
  return protocols::build_named_protocol(manifest(), folds(), name);
}

std::string scale_token(double scale) {
  char buf[32];
  for (int digits = 1; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof(buf), "%.*g", digits, scale);
    if (std::stod(buf) == scale) break;
  }
  return buf;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace mcpad::orchestrate
