#pragma once

#include <map>
#include <opencv2/core.hpp>
#include <string>

#include "mcpad/geometry/camera.hpp"
#include "mcpad/preprocess/align.hpp"
#include "mcpad/preprocess/cube.hpp"
#include "mcpad/preprocess/landmarks.hpp"

namespace mcpad::preprocess {

/// One captured frame: every registry plane in its own sensor raster (CV_16U),
/// plus eye landmarks in the reference raster. D holds depth in millimeters,
/// already in the reference raster (stereo output).
struct RawFrame {
  std::map<std::string, cv::Mat> planes;
  FaceLandmarks landmarks;
};

struct PipelineConfig {
  double scale = 1.0;
  AlignmentTarget target;
};

/// Sensor id in the calibration file that captures a registry channel.
std::string sensor_for_channel(std::string_view channel_name);

/// Registers every plane onto the reference raster by back-projecting the D plane
/// and reprojecting into each sensor. Planes from the reference sensor, or from
/// a sensor whose calibration equals the reference, pass through untouched.
/// Output planes are CV_32F; pixels with no valid source are 0.
std::map<std::string, cv::Mat> register_frame(const RawFrame& frame,
                                              const geometry::CameraRig& rig);

/// register -> emulate resolution -> align -> normalize -> stack.
ChannelCube preprocess_frame(const RawFrame& frame, const geometry::CameraRig& rig,
                             const PipelineConfig& cfg = {});

}  // namespace mcpad::preprocess
