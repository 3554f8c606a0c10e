#include "mcpad/models/haralick.hpp"

#include <algorithm>
#include <cmath>

#include "mcpad/common/error.hpp"

namespace mcpad::models {

std::array<cv::Mat, 4> haar_undecimated(const cv::Mat& plane) {
  cv::Mat f;
  plane.convertTo(f, CV_32F);
  std::array<cv::Mat, 4> out;
  for (cv::Mat& m : out) m.create(f.size(), CV_32FC1);
  for (int y = 0; y < f.rows; ++y) {
    const float* r0 = f.ptr<float>(y);
    const float* r1 = f.ptr<float>(std::min(y + 1, f.rows - 1));
    for (int x = 0; x < f.cols; ++x) {
      const int x1 = std::min(x + 1, f.cols - 1);
      const float a = r0[x], b = r0[x1], c = r1[x], d = r1[x1];
      out[0].at<float>(y, x) = 0.25f * (a + b + c + d);
      out[1].at<float>(y, x) = 0.25f * (a + b - c - d);
      out[2].at<float>(y, x) = 0.25f * (a - b + c - d);
      out[3].at<float>(y, x) = 0.25f * (a - b - c + d);
    }
  }
  return out;
}

cv::Mat quantize(const cv::Mat& band, double lo, double hi, int levels) {
  cv::Mat out(band.size(), CV_8UC1);
  const double scale = levels / (hi - lo);
  for (int y = 0; y < band.rows; ++y) {
    const float* s = band.ptr<float>(y);
    auto* d = out.ptr<std::uint8_t>(y);
    for (int x = 0; x < band.cols; ++x) {
      const int q = static_cast<int>(std::floor((s[x] - lo) * scale));
      d[x] = static_cast<std::uint8_t>(std::clamp(q, 0, levels - 1));
    }
  }
  return out;
}

Eigen::MatrixXd glcm(const cv::Mat& levels, int dx, int dy, int n_levels, bool symmetric) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_levels, n_levels);
  double total = 0.0;
  for (int y = 0; y < levels.rows; ++y) {
    const int y2 = y + dy;
    if (y2 < 0 || y2 >= levels.rows) continue;
    for (int x = 0; x < levels.cols; ++x) {
      const int x2 = x + dx;
      if (x2 < 0 || x2 >= levels.cols) continue;
      const int i = levels.at<std::uint8_t>(y, x);
      const int j = levels.at<std::uint8_t>(y2, x2);
      m(i, j) += 1.0;
      total += 1.0;
      if (symmetric) {
        m(j, i) += 1.0;
        total += 1.0;
      }
    }
  }
  if (total > 0.0) m /= total;
  return m;
}

GlcmStats glcm_stats(const Eigen::MatrixXd& p) {
  GlcmStats s;
  const int n = static_cast<int>(p.rows());
  double mi = 0.0, mj = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      mi += i * p(i, j);
      mj += j * p(i, j);
    }
  }
  double vi = 0.0, vj = 0.0, cov = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v = p(i, j);
      const double d = i - j;
      s.contrast += d * d * v;
      s.energy += v * v;
      s.homogeneity += v / (1.0 + d * d);
      if (v > 0.0) s.entropy -= v * std::log2(v);
      vi += (i - mi) * (i - mi) * v;
      vj += (j - mj) * (j - mj) * v;
      cov += (i - mi) * (j - mj) * v;
    }
  }
  const double denom = std::sqrt(vi * vj);
  s.correlation = denom < 1e-15 ? 1.0 : cov / denom;
  return s;
}

std::vector<float> haralick_features(const preprocess::ChannelCube& cube, int grid) {
  if (cube.depth() < 1) throw ModelError("haralick features need at least one channel");
  if (grid < 1 || cube.height < grid || cube.width < grid) throw ModelError("bad grid size");
  static constexpr int kOffsets[4][2] = {{1, 0}, {1, -1}, {0, 1}, {1, 1}};

  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(cube.depth()) * grid * grid * 4 * kHaralickStats);
  for (int ch = 0; ch < cube.depth(); ++ch) {
    const auto bands = haar_undecimated(cube.plane(ch));
    std::array<cv::Mat, 4> q;
    q[0] = quantize(bands[0], 0.0, 1.0);
    for (int b = 1; b < 4; ++b) q[static_cast<std::size_t>(b)] = quantize(bands[static_cast<std::size_t>(b)], -0.5, 0.5);
    for (int gy = 0; gy < grid; ++gy) {
      const int y0 = gy * cube.height / grid;
      const int y1 = (gy + 1) * cube.height / grid;
      for (int gx = 0; gx < grid; ++gx) {
        const int x0 = gx * cube.width / grid;
        const int x1 = (gx + 1) * cube.width / grid;
        const cv::Rect cell(x0, y0, x1 - x0, y1 - y0);
        for (const cv::Mat& band : q) {
          const cv::Mat roi = band(cell);
          GlcmStats acc;
          for (const auto& o : kOffsets) {
            const GlcmStats s = glcm_stats(glcm(roi, o[0], o[1]));
            acc.contrast += s.contrast / 4.0;
            acc.correlation += s.correlation / 4.0;
            acc.energy += s.energy / 4.0;
            acc.homogeneity += s.homogeneity / 4.0;
            acc.entropy += s.entropy / 4.0;
          }
          for (double v : {acc.contrast, acc.correlation, acc.energy, acc.homogeneity, acc.entropy}) {
            out.push_back(static_cast<float>(v));
          }
        }
      }
    }
  }
  return out;
}

}  // namespace mcpad::models
