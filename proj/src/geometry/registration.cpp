#include "mcpad/geometry/registration.hpp"

#include <algorithm>
#include <fstream>

#include "mcpad/common/binary_io.hpp"
#include "mcpad/common/error.hpp"
#include "mcpad/geometry/sampling.hpp"

namespace mcpad::geometry {

RegistrationMap build_registration_map(const PointCloud& cloud, const Camera& target,
                                       cv::Size ref_size, std::string target_id) {
  RegistrationMap map;
  map.target_id = std::move(target_id);
  map.src_x = cv::Mat(ref_size, CV_32FC1, cv::Scalar(0));
  map.src_y = cv::Mat(ref_size, CV_32FC1, cv::Scalar(0));
  map.valid = cv::Mat(ref_size, CV_8UC1, cv::Scalar(0));
  map.target_width = target.intrinsics.width;
  map.target_height = target.intrinsics.height;
  for (const TaggedPoint& p : cloud) {
    if (p.row < 0 || p.row >= ref_size.height || p.col < 0 || p.col >= ref_size.width) {
      throw GeometryError("cloud point tagged outside the reference raster");
    }
    const auto uv = project_point(target, p.xyz);
    if (!uv) continue;
    // Round-off of a few ulps at the left/top border must not drop the pixel.
    constexpr double kEdgeTol = 1e-9;
    if (!(uv->x() > -kEdgeTol && uv->y() > -kEdgeTol)) continue;
    const float u = static_cast<float>(std::max(uv->x(), 0.0));
    const float v = static_cast<float>(std::max(uv->y(), 0.0));
    if (!(u < map.target_width && v < map.target_height)) continue;
    map.src_x.at<float>(p.row, p.col) = u;
    map.src_y.at<float>(p.row, p.col) = v;
    map.valid.at<std::uint8_t>(p.row, p.col) = 1;
  }
  return map;
}

WarpResult warp_to_reference(const cv::Mat& target_image, const RegistrationMap& map) {
  const cv::Mat img = to_float(target_image);
  if (map.target_width > 0 &&
      (img.cols != map.target_width || img.rows != map.target_height)) {
    throw GeometryError("target image is " + std::to_string(img.cols) + "x" +
                        std::to_string(img.rows) + " but the map expects " +
                        std::to_string(map.target_width) + "x" +
                        std::to_string(map.target_height));
  }
  WarpResult out;
  out.image = cv::Mat(map.size(), CV_32FC1, cv::Scalar(0));
  out.mask = cv::Mat(map.size(), CV_8UC1, cv::Scalar(0));
  for (int r = 0; r < map.src_x.rows; ++r) {
    const float* mx = map.src_x.ptr<float>(r);
    const float* my = map.src_y.ptr<float>(r);
    const std::uint8_t* mv = map.valid.ptr<std::uint8_t>(r);
    float* o = out.image.ptr<float>(r);
    std::uint8_t* m = out.mask.ptr<std::uint8_t>(r);
    for (int c = 0; c < map.src_x.cols; ++c) {
      if (!mv[c]) continue;
      const auto v = sample_bilinear(img, mx[c], my[c]);
      if (!v) {
        if (map.target_width == 0) {
          throw GeometryError("map coordinates fall outside the target image");
        }
        continue;
      }
      o[c] = *v;
      m[c] = 1;
    }
  }
  return out;
}

void save_registration_map(const std::string& path, const RegistrationMap& map) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  const int rows = map.src_x.rows;
  const int cols = map.src_x.cols;
  binio::write_magic(out, "MCRM");
  binio::write_u32(out, static_cast<std::uint32_t>(rows));
  binio::write_u32(out, static_cast<std::uint32_t>(cols));
  binio::write_u32(out, 0);
  for (const cv::Mat* plane : {&map.src_x, &map.src_y}) {
    const cv::Mat p = plane->isContinuous() ? *plane : plane->clone();
    binio::write_f32(out, {p.ptr<float>(), static_cast<std::size_t>(rows) * cols});
  }
  const cv::Mat v = map.valid.isContinuous() ? map.valid : map.valid.clone();
  binio::write_bytes(out, {v.ptr<std::uint8_t>(), static_cast<std::size_t>(rows) * cols});
  if (!out) throw IoError("write failed for " + path);
}

RegistrationMap load_registration_map(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  binio::expect_magic(in, "MCRM", path);
  const int rows = static_cast<int>(binio::read_u32(in));
  const int cols = static_cast<int>(binio::read_u32(in));
  binio::read_u32(in);
  RegistrationMap map;
  map.src_x = cv::Mat(rows, cols, CV_32FC1);
  map.src_y = cv::Mat(rows, cols, CV_32FC1);
  map.valid = cv::Mat(rows, cols, CV_8UC1);
  const auto n = static_cast<std::size_t>(rows) * cols;
  binio::read_f32(in, {map.src_x.ptr<float>(), n});
  binio::read_f32(in, {map.src_y.ptr<float>(), n});
  binio::read_bytes(in, {map.valid.ptr<std::uint8_t>(), n});
  return map;
}

}  // namespace mcpad::geometry
