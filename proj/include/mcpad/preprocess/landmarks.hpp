#pragma once

#include <optional>

namespace mcpad::preprocess {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Facial landmarks in raw-frame pixel coordinates. Eyes are image-left and
/// image-right, so left_eye.x < right_eye.x for an upright face.
struct FaceLandmarks {
  Point2 left_eye;
  Point2 right_eye;
  std::optional<Point2> nose;
  std::optional<Point2> mouth_left;
  std::optional<Point2> mouth_right;
};

}  // namespace mcpad::preprocess
