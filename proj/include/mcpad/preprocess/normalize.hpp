#pragma once

#include <opencv2/core.hpp>
#include <span>
#include <vector>

namespace mcpad::preprocess {

/// Robust 16-bit -> 8-bit range compression for depth and thermal frames:
///   v' = clip(round_half_up(127.5 + 127.5 * (v - median) / (4 * 1.4826 * MAD)), 0, 255)
/// A zero MAD maps every pixel to 128. Input must be integral (CV_8U / CV_16U);
/// the standardized value is formed as an exact integer ratio, so any transform
/// v -> a*v + b with integral a > 0 leaves the output bit-identical.
cv::Mat mad_normalize(const cv::Mat& raw);

struct SpectralNormalization {
  std::vector<cv::Mat> planes;  ///< CV_32F, unit-norm spectra per pixel
  cv::Mat zero_mask;            ///< CV_8U, 1 where the input spectrum was all zero
  int zero_count = 0;
};

/// Divides every pixel spectrum by its Euclidean norm. C must be 4 (NIR) or 7
/// (SWIR). All-zero spectra stay zero and are flagged.
SpectralNormalization unit_spectral_normalize(std::span<const cv::Mat> planes);

}  // namespace mcpad::preprocess
