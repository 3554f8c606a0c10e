#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mcpad/dataset/manifest.hpp"
#include "mcpad/geometry/camera.hpp"

namespace mcpad::dataset {

/// How strongly each artifact signature is expressed. All zero makes every
/// class statistically identical to bonafide.
struct SignatureStrengths {
  double swir_absorption = 0.6;   ///< fractional skin reflectance drop at 1450 nm
  double depth_flatness = 1.0;    ///< 1: Print/Replay are planar, 0: face relief
  double thermal_contrast = 1.0;  ///< warm skin vs. cold artifact
  double partial_region = 1.0;    ///< opacity of Glasses/Makeup/Tattoo regions
  double rgb_cue = 0.35;          ///< visible-range artifact cues (kept subtle)
};

struct SynthConfig {
  /// Videos per class; keys are "bonafide" or attack type names.
  std::map<std::string, int> counts;
  int subjects = 12;  ///< first half train, next quarter dev, rest test
  int width = 256;
  int height = 256;
  int frames = 2;
  std::uint64_t seed = 7;
  double noise = 0.01;  ///< relative sensor noise
  SignatureStrengths strengths;
};

/// 30 bonafide and 10 of every attack type, 12 subjects.
SynthConfig default_synth_config();

struct SynthDataset {
  std::vector<SampleRecord> records;
  FoldAssignment folds;
  geometry::CameraRig rig;
};

/// Colocated synthetic sensor suite: every sensor shares the reference
/// calibration except nir_right, which sits one baseline to the right.
geometry::CameraRig synth_rig(int width, int height);

/// Writes manifest.json, folds.json, calibration.json and frames/ under `out_dir`.
/// Byte-identical output for a fixed config.
SynthDataset synth_generate(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace mcpad::dataset
