#include "mcpad/preprocess/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "mcpad/common/error.hpp"

namespace mcpad::preprocess {

namespace {

constexpr double kMadToSigma = 1.4826;
constexpr double kSaturationSigmas = 4.0;

// Median of integers, returned doubled so even-length medians stay integral.
std::int64_t doubled_median(std::vector<std::int64_t>& v) {
  const std::size_t n = v.size();
  const std::size_t mid = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const std::int64_t hi = v[mid];
  if (n % 2 == 1) return 2 * hi;
  const std::int64_t lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return lo + hi;
}

}  // namespace

cv::Mat mad_normalize(const cv::Mat& raw) {
  if (raw.empty()) throw Error("mad_normalize: empty image");
  if (raw.channels() != 1 || (raw.depth() != CV_8U && raw.depth() != CV_16U)) {
    throw Error("mad_normalize expects a single-channel CV_8U or CV_16U image");
  }
  cv::Mat src;
  raw.convertTo(src, CV_32S);
  const std::size_t n = static_cast<std::size_t>(src.rows) * src.cols;

  // Everything below is scaled: s = 2v, med2 = 2*median, dev = |s - med2| = 2|v - median|.
  std::vector<std::int64_t> values;
  values.reserve(n);
  for (int r = 0; r < src.rows; ++r) {
    const int* p = src.ptr<int>(r);
    for (int c = 0; c < src.cols; ++c) values.push_back(2 * static_cast<std::int64_t>(p[c]));
  }
  std::vector<std::int64_t> scratch = values;
  const std::int64_t med2 = doubled_median(scratch) / 2;  // 2 * median, always integral
  for (std::size_t i = 0; i < n; ++i) scratch[i] = std::abs(values[i] - med2);
  const std::int64_t mad4 = doubled_median(scratch);     // 4 * MAD

  cv::Mat out(src.size(), CV_8UC1);
  for (int r = 0, i = 0; r < src.rows; ++r) {
    std::uint8_t* o = out.ptr<std::uint8_t>(r);
    for (int c = 0; c < src.cols; ++c, ++i) {
      if (mad4 == 0) {
        o[c] = 128;
        continue;
      }
      // (v - median) / MAD == 2 (s - med2) / mad4, an exact ratio of integers.
      const double z = static_cast<double>(2 * (values[static_cast<std::size_t>(i)] - med2)) /
                       static_cast<double>(mad4);
      const double v = 127.5 + 127.5 * z / (kSaturationSigmas * kMadToSigma);
      const double rounded = std::floor(v + 0.5);
      o[c] = static_cast<std::uint8_t>(std::clamp(rounded, 0.0, 255.0));
    }
  }
  return out;
}

SpectralNormalization unit_spectral_normalize(std::span<const cv::Mat> planes) {
  const std::size_t c = planes.size();
  if (c != 4 && c != 7) {
    throw Error("unit_spectral_normalize expects 4 (NIR) or 7 (SWIR) planes, got " +
                std::to_string(c));
  }
  const cv::Size size = planes[0].size();
  std::vector<cv::Mat> in;
  for (const cv::Mat& p : planes) {
    if (p.size() != size || p.channels() != 1) throw Error("spectral planes differ in shape");
    cv::Mat f;
    p.convertTo(f, CV_32F);
    in.push_back(f);
  }
  SpectralNormalization out;
  out.zero_mask = cv::Mat(size, CV_8UC1, cv::Scalar(0));
  for (std::size_t k = 0; k < c; ++k) out.planes.emplace_back(size, CV_32FC1, cv::Scalar(0));

  for (int r = 0; r < size.height; ++r) {
    for (int col = 0; col < size.width; ++col) {
      double sq = 0.0;
      for (std::size_t k = 0; k < c; ++k) {
        const double v = in[k].at<float>(r, col);
        sq += v * v;
      }
      if (sq == 0.0) {
        out.zero_mask.at<std::uint8_t>(r, col) = 1;
        ++out.zero_count;
        continue;
      }
      const double norm = std::sqrt(sq);
      for (std::size_t k = 0; k < c; ++k) {
        out.planes[k].at<float>(r, col) = static_cast<float>(in[k].at<float>(r, col) / norm);
      }
    }
  }
  return out;
}

}  // namespace mcpad::preprocess
