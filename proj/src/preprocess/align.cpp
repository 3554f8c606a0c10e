#include "mcpad/preprocess/align.hpp"

#include <opencv2/imgproc.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "mcpad/common/error.hpp"
#include "mcpad/geometry/sampling.hpp"

namespace mcpad::preprocess {

SimilarityTransform SimilarityTransform::inverse() const {
  const double n = a * a + b * b;
  const double ia = a / n;
  const double ib = -b / n;
  return {ia, ib, -(ia * tx - ib * ty), -(ib * tx + ia * ty)};
}

void validate_landmarks(const FaceLandmarks& lm, cv::Size frame) {
  if (lm.left_eye == lm.right_eye) throw AlignmentError("degenerate landmarks: eyes coincide");
  for (const Point2& p : {lm.left_eye, lm.right_eye}) {
    if (!(p.x >= 0.0 && p.x < frame.width && p.y >= 0.0 && p.y < frame.height)) {
      throw AlignmentError("eye landmark outside the frame");
    }
  }
  if (!(lm.left_eye.x < lm.right_eye.x)) {
    throw AlignmentError("left eye must lie left of the right eye");
  }
}

SimilarityTransform alignment_transform(const FaceLandmarks& lm, const AlignmentTarget& target) {
  const std::complex<double> out_l(target.left_eye.x, target.left_eye.y);
  const std::complex<double> out_r(target.right_eye.x, target.right_eye.y);
  const std::complex<double> in_l(lm.left_eye.x, lm.left_eye.y);
  const std::complex<double> in_r(lm.right_eye.x, lm.right_eye.y);
  const std::complex<double> d_in = in_r - in_l;
  if (d_in == std::complex<double>(0.0, 0.0)) {
    throw AlignmentError("degenerate landmarks: eyes coincide");
  }
  const std::complex<double> d_out = out_r - out_l;
  // Explicit real-arithmetic division keeps the identity case exact.
  const double den = std::norm(d_out);
  const double a = (d_in.real() * d_out.real() + d_in.imag() * d_out.imag()) / den;
  const double b = (d_in.imag() * d_out.real() - d_in.real() * d_out.imag()) / den;
  SimilarityTransform t;
  t.a = a;
  t.b = b;
  // x_in = in_l + z * (x_out - out_l)
  t.tx = in_l.real() - (a * out_l.real() - b * out_l.imag());
  t.ty = in_l.imag() - (b * out_l.real() + a * out_l.imag());
  return t;
}

cv::Mat align_face(const cv::Mat& image, const FaceLandmarks& lm, const AlignmentTarget& target) {
  validate_landmarks(lm, image.size());
  const SimilarityTransform t = alignment_transform(lm, target);

  std::vector<cv::Mat> planes;
  cv::split(image, planes);
  cv::Mat map_x(target.size, target.size, CV_32FC1);
  cv::Mat map_y(target.size, target.size, CV_32FC1);
  for (int y = 0; y < target.size; ++y) {
    for (int x = 0; x < target.size; ++x) {
      const Point2 p = t.apply({static_cast<double>(x), static_cast<double>(y)});
      map_x.at<float>(y, x) = static_cast<float>(p.x);
      map_y.at<float>(y, x) = static_cast<float>(p.y);
    }
  }
  for (cv::Mat& p : planes) p = geometry::remap_bilinear(geometry::to_float(p), map_x, map_y);
  cv::Mat out;
  cv::merge(planes, out);
  return out;
}

FaceLandmarks rescale_landmarks(const FaceLandmarks& lm, cv::Size from, cv::Size to) {
  const double sx = static_cast<double>(to.width) / from.width;
  const double sy = static_cast<double>(to.height) / from.height;
  auto f = [&](const Point2& p) { return Point2{(p.x + 0.5) * sx - 0.5, (p.y + 0.5) * sy - 0.5}; };
  FaceLandmarks out;
  out.left_eye = f(lm.left_eye);
  out.right_eye = f(lm.right_eye);
  if (lm.nose) out.nose = f(*lm.nose);
  if (lm.mouth_left) out.mouth_left = f(*lm.mouth_left);
  if (lm.mouth_right) out.mouth_right = f(*lm.mouth_right);
  return out;
}

cv::Mat emulate_resolution(const cv::Mat& frame, double scale) {
  if (!(scale > 0.0 && scale <= 1.0)) throw Error("scale must lie in (0, 1]");
  if (scale == 1.0) return frame.clone();
  const int w = static_cast<int>(std::lround(scale * frame.cols));
  const int h = static_cast<int>(std::lround(scale * frame.rows));
  if (w < 8 || h < 8) {
    throw Error("scale " + std::to_string(scale) + " yields a " + std::to_string(w) + "x" +
                std::to_string(h) + " frame, below the 8 px minimum");
  }
  cv::Mat out;
  cv::resize(frame, out, cv::Size(w, h), 0.0, 0.0, cv::INTER_AREA);
  return out;
}

}  // namespace mcpad::preprocess
