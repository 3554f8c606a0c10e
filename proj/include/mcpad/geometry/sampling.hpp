#pragma once

#include <opencv2/core.hpp>
#include <optional>

namespace mcpad::geometry {

/// Bilinear sample of a single-channel CV_32F image at (x, y), pixel centers on
/// integer coordinates. Defined on [0, width) x [0, height); the last row and
/// column replicate outward. Integer coordinates return the stored value exactly.
std::optional<float> sample_bilinear(const cv::Mat& img, double x, double y);

/// Samples `src` at every (map_x, map_y). Pixels outside the source become 0 and
/// are cleared in `mask` when given (CV_8U, 1 = valid).
cv::Mat remap_bilinear(const cv::Mat& src, const cv::Mat& map_x, const cv::Mat& map_y,
                       cv::Mat* mask = nullptr);

/// Converts any single-channel image to CV_32F without rescaling.
cv::Mat to_float(const cv::Mat& img);

}  // namespace mcpad::geometry
