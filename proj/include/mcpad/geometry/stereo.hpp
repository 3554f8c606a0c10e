#pragma once

#include <opencv2/core.hpp>
#include <string>
#include <vector>

#include "mcpad/geometry/camera.hpp"

namespace mcpad::geometry {

/// Row-aligned virtual stereo pair. Both cameras are distortion-free pinholes
/// sharing intrinsics; extrinsics are expressed in the rig's world frame.
struct RectifiedCalibration {
  Camera left;
  Camera right;
  Mat3 left_rotation = Mat3::Identity();   ///< original left camera frame -> rectified
  Mat3 right_rotation = Mat3::Identity();  ///< original right camera frame -> rectified
  double baseline = 0.0;
};

struct RectifiedPair {
  cv::Mat left;   ///< CV_32F
  cv::Mat right;  ///< CV_32F
  RectifiedCalibration calibration;
};

/// Symmetric half-rotation rectification: each camera is rotated halfway toward
/// the common orientation, then both are turned so the baseline lies on x.
/// Throws RectificationError when the relative rotation exceeds 90 degrees or
/// the right camera does not sit to the right of the left one.
RectifiedCalibration compute_rectification(const Camera& left, const Camera& right);

RectifiedPair rectify_stereo_pair(const CameraRig& rig, const std::string& left_id,
                                  const std::string& right_id, const cv::Mat& left,
                                  const cv::Mat& right);

/// Source-pixel maps for warping an original image into its rectified view.
void rectification_maps(const Camera& original, const Mat3& rect_rotation,
                        const CameraIntrinsics& rectified, cv::Mat& map_x, cv::Mat& map_y);

struct DisparityMap {
  cv::Mat values;  ///< CV_32F, pixels
  cv::Mat valid;   ///< CV_8U, 1 = valid
};

struct BlockMatchParams {
  int block_size = 9;
  int max_disparity = 128;
  double uniqueness_ratio = 1.05;
  bool subpixel = true;
};

/// SAD winner-take-all block matching over d in [0, max_disparity], left image as
/// reference (left x matches right x - d). Accepts CV_8U or CV_16U inputs.
DisparityMap compute_disparity(const cv::Mat& left, const cv::Mat& right,
                               const BlockMatchParams& params = {});

struct TaggedPoint {
  Vec3 xyz;  ///< world coordinates, meters
  int row = 0;
  int col = 0;
};
using PointCloud = std::vector<TaggedPoint>;

/// Z = fx * baseline / d in the rectified left camera, back-projected and moved
/// to world coordinates. Invalid or non-positive disparities produce no point.
PointCloud disparity_to_depth_cloud(const DisparityMap& disp, const Camera& rectified_left,
                                    double baseline);

/// Back-projects a metric depth image (CV_32F / CV_64F, meters, 0 = missing)
/// observed by `cam`.
PointCloud depth_to_cloud(const cv::Mat& depth_m, const Camera& cam);

}  // namespace mcpad::geometry
