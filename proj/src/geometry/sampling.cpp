#include "mcpad/geometry/sampling.hpp"

#include <cmath>

#include "mcpad/common/error.hpp"

namespace mcpad::geometry {

namespace {

// Tolerates round-off just below zero from inverse projections of border pixels.
constexpr double kEdgeSlack = 1e-6;

}  // namespace

std::optional<float> sample_bilinear(const cv::Mat& img, double x, double y) {
  if (!(x >= -kEdgeSlack && x < img.cols && y >= -kEdgeSlack && y < img.rows)) {
    return std::nullopt;
  }
  x = std::max(x, 0.0);
  y = std::max(y, 0.0);
  const int x0 = static_cast<int>(x);
  const int y0 = static_cast<int>(y);
  const int x1 = std::min(x0 + 1, img.cols - 1);
  const int y1 = std::min(y0 + 1, img.rows - 1);
  const double ax = x - x0;
  const double ay = y - y0;
  const float* r0 = img.ptr<float>(y0);
  const float* r1 = img.ptr<float>(y1);
  const double top = r0[x0] * (1.0 - ax) + r0[x1] * ax;
  const double bottom = r1[x0] * (1.0 - ax) + r1[x1] * ax;
  return static_cast<float>(top * (1.0 - ay) + bottom * ay);
}

cv::Mat remap_bilinear(const cv::Mat& src, const cv::Mat& map_x, const cv::Mat& map_y,
                       cv::Mat* mask) {
  if (src.type() != CV_32FC1) throw GeometryError("remap_bilinear expects CV_32FC1");
  if (map_x.size() != map_y.size()) throw GeometryError("map planes differ in size");
  cv::Mat out(map_x.size(), CV_32FC1, cv::Scalar(0));
  if (mask) *mask = cv::Mat(map_x.size(), CV_8UC1, cv::Scalar(0));
  for (int r = 0; r < map_x.rows; ++r) {
    const float* mx = map_x.ptr<float>(r);
    const float* my = map_y.ptr<float>(r);
    float* o = out.ptr<float>(r);
    for (int c = 0; c < map_x.cols; ++c) {
      if (auto v = sample_bilinear(src, mx[c], my[c])) {
        o[c] = *v;
        if (mask) mask->at<std::uint8_t>(r, c) = 1;
      }
    }
  }
  return out;
}

cv::Mat to_float(const cv::Mat& img) {
  if (img.channels() != 1) throw GeometryError("expected a single-channel image");
  if (img.type() == CV_32FC1) return img;
  cv::Mat out;
  img.convertTo(out, CV_32F);
  return out;
}

}  // namespace mcpad::geometry
