#pragma once

#include <Eigen/Core>
#include <array>
#include <opencv2/core.hpp>
#include <vector>

#include "mcpad/preprocess/cube.hpp"

namespace mcpad::models {

inline constexpr int kGlcmLevels = 8;
inline constexpr int kHaralickStats = 5;

/// One-level undecimated Haar with averaging filters: LL, LH, HL, HH, each the
/// input size (last row/column replicated). LL stays in [0, 1] for [0, 1]
/// input, detail bands in [-0.5, 0.5].
std::array<cv::Mat, 4> haar_undecimated(const cv::Mat& plane);

/// Uniform quantization of [lo, hi] into `levels` bins (CV_8U, clamped).
cv::Mat quantize(const cv::Mat& band, double lo, double hi, int levels = kGlcmLevels);

/// Normalized co-occurrence matrix for offset (dx, dy); symmetric counting adds
/// both (i, j) and (j, i).
Eigen::MatrixXd glcm(const cv::Mat& levels, int dx, int dy, int n_levels = kGlcmLevels,
                     bool symmetric = true);

struct GlcmStats {
  double contrast = 0.0;
  double correlation = 0.0;  ///< 1 when either marginal has zero variance
  double energy = 0.0;       ///< sum of squared probabilities
  double homogeneity = 0.0;  ///< sum p / (1 + (i - j)^2)
  double entropy = 0.0;      ///< bits
};

GlcmStats glcm_stats(const Eigen::MatrixXd& p);

/// Per channel, per grid cell (row-major), per subband (LL, LH, HL, HH): the
/// five statistics averaged over offsets 0, 45, 90 and 135 degrees at distance 1.
/// Length = channels * grid^2 * 4 * 5.
std::vector<float> haralick_features(const preprocess::ChannelCube& cube, int grid = 4);

}  // namespace mcpad::models
