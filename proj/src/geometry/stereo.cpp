#include "mcpad/geometry/stereo.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "mcpad/common/error.hpp"
#include "mcpad/geometry/sampling.hpp"

namespace mcpad::geometry {

RectifiedCalibration compute_rectification(const Camera& left, const Camera& right) {
  left.extrinsics.validate();
  right.extrinsics.validate();
  const Mat3& r1 = left.extrinsics.rotation;
  const Mat3& r2 = right.extrinsics.rotation;
  const Mat3 rel = r2 * r1.transpose();
  const Vec3 rel_t = right.extrinsics.translation - rel * left.extrinsics.translation;

  if (rotation_angle(rel) > M_PI / 2.0) {
    throw RectificationError("relative rotation exceeds 90 degrees; views cannot be rectified");
  }
  if (rel_t.norm() == 0.0) throw RectificationError("zero stereo baseline");

  // Half rotation brings both cameras to a common orientation.
  const Mat3 half = rodrigues(-0.5 * rodrigues_inverse(rel));
  const Vec3 t = half * rel_t;

  // Turn the common frame so the baseline lies on the x axis.
  const Vec3 target(t.x() > 0.0 ? 1.0 : -1.0, 0.0, 0.0);
  Vec3 axis = t.cross(target);
  Mat3 align = Mat3::Identity();
  const double axis_norm = axis.norm();
  if (axis_norm > 0.0) {
    const double angle = std::acos(std::clamp(std::abs(t.x()) / t.norm(), -1.0, 1.0));
    align = rodrigues(axis / axis_norm * angle);
  }

  RectifiedCalibration rc;
  rc.left_rotation = align * half.transpose();
  rc.right_rotation = align * half;
  const Vec3 aligned_t = align * t;
  if (aligned_t.x() >= 0.0) {
    throw RectificationError("right camera must lie to the right of the left camera");
  }
  rc.baseline = aligned_t.norm();

  CameraIntrinsics k;
  const auto& kl = left.intrinsics;
  const auto& kr = right.intrinsics;
  k.fx = 0.5 * (kl.fx + kr.fx);
  k.fy = 0.5 * (kl.fy + kr.fy);
  k.cx = 0.5 * (kl.cx + kr.cx);
  k.cy = 0.5 * (kl.cy + kr.cy);
  k.width = kl.width;
  k.height = kl.height;

  rc.left.intrinsics = k;
  rc.left.extrinsics.rotation = rc.left_rotation * r1;
  rc.left.extrinsics.translation = rc.left_rotation * left.extrinsics.translation;
  rc.right.intrinsics = k;
  rc.right.extrinsics.rotation = rc.right_rotation * r2;
  rc.right.extrinsics.translation = rc.right_rotation * right.extrinsics.translation;
  return rc;
}

void rectification_maps(const Camera& original, const Mat3& rect_rotation,
                        const CameraIntrinsics& rectified, cv::Mat& map_x, cv::Mat& map_y) {
  map_x.create(rectified.height, rectified.width, CV_32FC1);
  map_y.create(rectified.height, rectified.width, CV_32FC1);
  const Mat3 back = rect_rotation.transpose();
  const CameraIntrinsics& k = original.intrinsics;
  for (int v = 0; v < rectified.height; ++v) {
    float* mx = map_x.ptr<float>(v);
    float* my = map_y.ptr<float>(v);
    for (int u = 0; u < rectified.width; ++u) {
      const Vec3 ray((u - rectified.cx) / rectified.fx, (v - rectified.cy) / rectified.fy, 1.0);
      const Vec3 p = back * ray;
      if (!(p.z() > 0.0)) {
        mx[u] = my[u] = -1.0f;
        continue;
      }
      Vec2 n(p.x() / p.z(), p.y() / p.z());
      if (k.has_distortion()) n = distort(k, n);
      mx[u] = static_cast<float>(k.fx * n.x() + k.cx);
      my[u] = static_cast<float>(k.fy * n.y() + k.cy);
    }
  }
}

RectifiedPair rectify_stereo_pair(const CameraRig& rig, const std::string& left_id,
                                  const std::string& right_id, const cv::Mat& left,
                                  const cv::Mat& right) {
  const Camera& cl = rig.at(left_id);
  const Camera& cr = rig.at(right_id);
  RectifiedPair out;
  out.calibration = compute_rectification(cl, cr);
  cv::Mat mx, my;
  rectification_maps(cl, out.calibration.left_rotation, out.calibration.left.intrinsics, mx, my);
  out.left = remap_bilinear(to_float(left), mx, my);
  rectification_maps(cr, out.calibration.right_rotation, out.calibration.right.intrinsics, mx,
                     my);
  out.right = remap_bilinear(to_float(right), mx, my);
  return out;
}

DisparityMap compute_disparity(const cv::Mat& left, const cv::Mat& right,
                               const BlockMatchParams& params) {
  if (left.size() != right.size() || left.type() != right.type()) {
    throw GeometryError("stereo images differ in size or type");
  }
  if (left.type() != CV_8UC1 && left.type() != CV_16UC1) {
    throw GeometryError("block matching expects CV_8U or CV_16U images");
  }
  if (params.block_size < 3 || params.block_size % 2 == 0) {
    throw GeometryError("block size must be odd and >= 3");
  }
  if (params.max_disparity < 1) throw GeometryError("max_disparity must be >= 1");

  cv::Mat l32, r32;
  left.convertTo(l32, CV_32S);
  right.convertTo(r32, CV_32S);

  const int rows = left.rows;
  const int cols = left.cols;
  const int h = params.block_size / 2;
  const int nd = params.max_disparity + 1;

  DisparityMap out;
  out.values = cv::Mat(rows, cols, CV_32FC1, cv::Scalar(0));
  out.valid = cv::Mat(rows, cols, CV_8UC1, cv::Scalar(0));

  const int x_begin = params.max_disparity + h;
  const int x_end = cols - h;
  if (rows < params.block_size || x_begin >= x_end) return out;

  // colsum[d * cols + x] = sum over window rows of |L(r, x) - R(r, x - d)|.
  std::vector<std::int64_t> colsum(static_cast<std::size_t>(nd) * cols, 0);
  auto accumulate_row = [&](int r, int sign) {
    const int* lp = l32.ptr<int>(r);
    const int* rp = r32.ptr<int>(r);
    for (int d = 0; d < nd; ++d) {
      std::int64_t* cs = &colsum[static_cast<std::size_t>(d) * cols];
      for (int x = d; x < cols; ++x) cs[x] += sign * std::abs(lp[x] - rp[x - d]);
    }
  };
  for (int r = 0; r < params.block_size; ++r) accumulate_row(r, +1);

  std::vector<std::int64_t> prefix(cols + 1);
  std::vector<std::int64_t> cost(static_cast<std::size_t>(nd) * cols);

  for (int y = h; y < rows - h; ++y) {
    for (int d = 0; d < nd; ++d) {
      const std::int64_t* cs = &colsum[static_cast<std::size_t>(d) * cols];
      prefix[0] = 0;
      for (int x = 0; x < cols; ++x) prefix[x + 1] = prefix[x] + cs[x];
      for (int x = x_begin; x < x_end; ++x) {
        cost[static_cast<std::size_t>(x) * nd + d] = prefix[x + h + 1] - prefix[x - h];
      }
    }

    float* dv = out.values.ptr<float>(y);
    std::uint8_t* vv = out.valid.ptr<std::uint8_t>(y);
    for (int x = x_begin; x < x_end; ++x) {
      const std::int64_t* c = &cost[static_cast<std::size_t>(x) * nd];
      int best = 0;
      for (int d = 1; d < nd; ++d) {
        if (c[d] < c[best]) best = d;
      }
      std::int64_t second = std::numeric_limits<std::int64_t>::max();
      for (int d = 0; d < nd; ++d) {
        if (std::abs(d - best) > 1) second = std::min(second, c[d]);
      }
      if (second == std::numeric_limits<std::int64_t>::max()) {
        for (int d = 0; d < nd; ++d) {
          if (d != best) second = std::min(second, c[d]);
        }
      }
      if (!(static_cast<double>(second) > params.uniqueness_ratio * static_cast<double>(c[best]))) {
        continue;
      }
      double disp = best;
      // A zero-cost minimum is an exact integer match; the parabola would only bias it.
      if (params.subpixel && c[best] > 0 && best > 0 && best < nd - 1) {
        const double cm = static_cast<double>(c[best - 1]);
        const double c0 = static_cast<double>(c[best]);
        const double cp = static_cast<double>(c[best + 1]);
        const double denom = cm - 2.0 * c0 + cp;
        if (denom > 0.0) disp += std::clamp((cm - cp) / (2.0 * denom), -0.5, 0.5);
      }
      dv[x] = static_cast<float>(std::clamp(disp, 0.0, static_cast<double>(params.max_disparity)));
      vv[x] = 1;
    }

    if (y + h + 1 < rows) {
      accumulate_row(y + h + 1, +1);
      accumulate_row(y - h, -1);
    }
  }
  return out;
}

PointCloud disparity_to_depth_cloud(const DisparityMap& disp, const Camera& rectified_left,
                                    double baseline) {
  if (!(baseline > 0.0)) throw GeometryError("baseline must be positive");
  const CameraIntrinsics& k = rectified_left.intrinsics;
  PointCloud cloud;
  for (int r = 0; r < disp.values.rows; ++r) {
    const float* dv = disp.values.ptr<float>(r);
    const std::uint8_t* vv = disp.valid.ptr<std::uint8_t>(r);
    for (int c = 0; c < disp.values.cols; ++c) {
      if (!vv[c] || !(dv[c] > 0.0f)) continue;
      const double z = k.fx * baseline / static_cast<double>(dv[c]);
      const Vec3 pc((c - k.cx) * z / k.fx, (r - k.cy) * z / k.fy, z);
      cloud.push_back({rectified_left.extrinsics.to_world(pc), r, c});
    }
  }
  return cloud;
}

PointCloud depth_to_cloud(const cv::Mat& depth_m, const Camera& cam) {
  cv::Mat depth;
  depth_m.convertTo(depth, CV_64F);
  const CameraIntrinsics& k = cam.intrinsics;
  PointCloud cloud;
  cloud.reserve(static_cast<std::size_t>(depth.rows) * depth.cols);
  for (int r = 0; r < depth.rows; ++r) {
    const double* dp = depth.ptr<double>(r);
    for (int c = 0; c < depth.cols; ++c) {
      const double z = dp[c];
      if (!(z > 0.0) || !std::isfinite(z)) continue;
      const Vec2 n = undistort(k, Vec2(c, r));
      cloud.push_back({cam.extrinsics.to_world(Vec3(n.x() * z, n.y() * z, z)), r, c});
    }
  }
  return cloud;
}

}  // namespace mcpad::geometry
