#pragma once

#include <opencv2/core.hpp>

#include "mcpad/preprocess/landmarks.hpp"

namespace mcpad::preprocess {

inline constexpr int kCropSize = 224;

/// Where the eyes land in the aligned crop.
struct AlignmentTarget {
  Point2 left_eye{63.0, 87.0};
  Point2 right_eye{160.0, 87.0};
  int size = kCropSize;
};

/// Similarity transform from crop coordinates to raw-frame coordinates:
///   x_in = a*x - b*y + tx,   y_in = b*x + a*y + ty
struct SimilarityTransform {
  double a = 1.0;
  double b = 0.0;
  double tx = 0.0;
  double ty = 0.0;

  Point2 apply(const Point2& p) const { return {a * p.x - b * p.y + tx, b * p.x + a * p.y + ty}; }
  SimilarityTransform inverse() const;
};

/// Throws AlignmentError for coincident eyes, eyes outside the frame, or a
/// right eye that is not to the right of the left eye.
void validate_landmarks(const FaceLandmarks& lm, cv::Size frame);

SimilarityTransform alignment_transform(const FaceLandmarks& lm,
                                        const AlignmentTarget& target = {});

/// Warps a raw frame (any depth, 1..N channels) to a target.size square crop
/// with the eyes at the target positions. Bilinear, zero outside the frame.
/// Returns CV_32F with the input's channel count.
cv::Mat align_face(const cv::Mat& image, const FaceLandmarks& lm,
                   const AlignmentTarget& target = {});

/// Landmarks after resampling a frame from `from` to `to` pixels (pixel-center
/// convention, matching area interpolation).
FaceLandmarks rescale_landmarks(const FaceLandmarks& lm, cv::Size from, cv::Size to);

/// Emulates a lower-resolution sensor: area-resamples the frame to
/// (round(s*W), round(s*H)). s = 1 returns an unmodified copy. Throws when s is
/// outside (0, 1] or either output side would be below 8 px.
cv::Mat emulate_resolution(const cv::Mat& frame, double scale);

}  // namespace mcpad::preprocess
