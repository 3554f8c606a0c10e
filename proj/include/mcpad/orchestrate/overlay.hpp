#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <opencv2/core.hpp>

#include "mcpad/geometry/camera.hpp"
#include "mcpad/preprocess/pipeline.hpp"

namespace mcpad::orchestrate {

/// Small-angle adjustment of one sensor's extrinsics: rotations in degrees
/// (applied as Rz * Ry * Rx before the stored rotation), translations in mm.
struct ExtrinsicDeltas {
  double rx = 0.0, ry = 0.0, rz = 0.0;
  double tx = 0.0, ty = 0.0, tz = 0.0;

  bool is_zero() const { return rx == 0 && ry == 0 && rz == 0 && tx == 0 && ty == 0 && tz == 0; }
};

inline constexpr double kMaxDeltaDegrees = 5.0;
inline constexpr double kMaxDeltaMillimeters = 50.0;

/// Throws Error when a delta is out of range or not finite.
void validate_deltas(const ExtrinsicDeltas& d);
ExtrinsicDeltas deltas_from_json(const nlohmann::json& j);

/// Copy of `rig` with the deltas composed onto `sensor`.
geometry::CameraRig apply_deltas(const geometry::CameraRig& rig, const std::string& sensor,
                                 const ExtrinsicDeltas& d);

/// "<sample_id>-f<frame:03d>"
std::string make_frame_id(const std::string& sample_id, int frame);
/// Splits a frame id at its last "-f"; nullopt when malformed.
std::optional<std::pair<std::string, int>> parse_frame_id(const std::string& id);

/// Min/max stretch of a single-channel image to 8 bits (round half up).
cv::Mat to_display(const cv::Mat& plane, double lo, double hi);

/// Registers `ref_channel` and `target_channel` onto the reference raster
/// with `rig` and blends them:
///   out = (1 - blend) * [ref, ref, ref] + blend * [tgt, ref, tgt]   (RGB)
/// so the target shows in magenta, the reference in green and misalignment as
/// colored fringes. `frame` must hold D plus both channels. Returns CV_8UC3 (BGR).
cv::Mat render_overlay(const preprocess::RawFrame& frame, const geometry::CameraRig& rig,
                       const std::string& ref_channel, const std::string& target_channel,
                       double blend);

std::vector<std::uint8_t> encode_png(const cv::Mat& image);

}  // namespace mcpad::orchestrate
