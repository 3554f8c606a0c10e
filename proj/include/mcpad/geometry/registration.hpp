#pragma once

#include <opencv2/core.hpp>
#include <string>

#include "mcpad/geometry/camera.hpp"
#include "mcpad/geometry/stereo.hpp"

namespace mcpad::geometry {

/// Per reference pixel, the fractional coordinates in the target image where the
/// reference pixel's 3D point lands. Built forward from the tagged cloud, so the
/// map is already indexed by reference pixel and needs no scatter inversion.
struct RegistrationMap {
  std::string target_id;
  cv::Mat src_x;  ///< CV_32F, reference raster
  cv::Mat src_y;  ///< CV_32F
  cv::Mat valid;  ///< CV_8U, 1 = valid
  int target_width = 0;   ///< 0 when unknown (e.g. loaded from a blob)
  int target_height = 0;

  cv::Size size() const { return src_x.size(); }
};

RegistrationMap build_registration_map(const PointCloud& cloud, const Camera& target,
                                       cv::Size ref_size, std::string target_id = {});

struct WarpResult {
  cv::Mat image;  ///< CV_32F, 0 where invalid
  cv::Mat mask;   ///< CV_8U, 1 = valid
};

/// Bilinear pull of the target image onto the reference raster.
WarpResult warp_to_reference(const cv::Mat& target_image, const RegistrationMap& map);

/// Binary blob: "MCRM", u32 H, u32 W, u32 reserved, then float32 src_x, float32
/// src_y, uint8 valid planes (little-endian, row-major).
void save_registration_map(const std::string& path, const RegistrationMap& map);
RegistrationMap load_registration_map(const std::string& path);

}  // namespace mcpad::geometry
