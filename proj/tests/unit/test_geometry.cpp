#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "../support/scratch.hpp"
#include "../support/scene.hpp"
#include "mcpad/common/error.hpp"
#include "mcpad/geometry/camera.hpp"
#include "mcpad/geometry/registration.hpp"
#include "mcpad/geometry/sampling.hpp"
#include "mcpad/geometry/stereo.hpp"

using namespace mcpad;
using namespace mcpad::geometry;

namespace {

Camera cam100() { return scene::pinhole(100.0, 128, 128); }

Camera shifted(Camera c, double tx) {
  c.extrinsics.translation = Vec3(tx, 0, 0);
  return c;
}

CameraRig stereo_rig(double f, int w, int h, double baseline, double yaw_deg = 0.0) {
  CameraRig rig;
  rig.cameras["left"] = scene::pinhole(f, w, h);
  Camera right = scene::pinhole(f, w, h);
  right.extrinsics.rotation = rodrigues(Vec3(0, yaw_deg * M_PI / 180.0, 0));
  // Camera center at (+baseline, 0, 0): t = -R * C.
  right.extrinsics.translation = -right.extrinsics.rotation * Vec3(baseline, 0, 0);
  rig.cameras["right"] = right;
  rig.reference_id = "left";
  rig.baseline_m = baseline;
  return rig;
}

cv::Mat noise_image(int w, int h, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_int_distribution<int> d(0, 255);
  cv::Mat img(h, w, CV_8UC1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) img.at<std::uint8_t>(y, x) = static_cast<std::uint8_t>(d(gen));
  }
  return img;
}

// Hand pinhole projection without distortion, independent of project_point.
Vec2 hand_project(const Camera& c, const Vec3& p) {
  const Vec3 q = c.extrinsics.rotation * p + c.extrinsics.translation;
  return {c.intrinsics.fx * q.x() / q.z() + c.intrinsics.cx,
          c.intrinsics.fy * q.y() / q.z() + c.intrinsics.cy};
}

}  // namespace

TEST(ProjectPoint, OpticalAxisHitsPrincipalPoint) {
  const auto uv = project_point(cam100(), Vec3(0, 0, 1));
  ASSERT_TRUE(uv);
  EXPECT_DOUBLE_EQ(uv->x(), 64.0);
  EXPECT_DOUBLE_EQ(uv->y(), 64.0);
}

TEST(ProjectPoint, TranslatedCameraHandCase) {
  const auto uv = project_point(shifted(cam100(), -0.1), Vec3(0, 0, 1));
  ASSERT_TRUE(uv);
  EXPECT_DOUBLE_EQ(uv->x(), 54.0);
  EXPECT_DOUBLE_EQ(uv->y(), 64.0);
}

TEST(ProjectPoint, BehindCameraIsInvalid) {
  EXPECT_FALSE(project_point(cam100(), Vec3(0, 0, -1)));
  EXPECT_FALSE(project_point(cam100(), Vec3(0, 0, 0)));
}

TEST(ProjectPoint, DistortionRoundTripsThroughUndistort) {
  Camera c = cam100();
  c.intrinsics.dist = {0.1, -0.05, 0.001, -0.002, 0.01};
  const auto uv = project_point(c, Vec3(0.1, -0.05, 1.0));
  ASSERT_TRUE(uv);
  const Vec2 n = undistort(c.intrinsics, *uv);
  EXPECT_NEAR(n.x(), 0.1, 1e-9);
  EXPECT_NEAR(n.y(), -0.05, 1e-9);
}

TEST(CameraModel, InvalidIntrinsicsRejected) {
  CameraIntrinsics k = cam100().intrinsics;
  k.fx = 0;
  EXPECT_THROW(k.validate(), GeometryError);
  k = cam100().intrinsics;
  k.cx = 128;
  EXPECT_THROW(k.validate(), GeometryError);
}

TEST(CameraModel, NonOrthonormalRotationRejected) {
  CameraExtrinsics e;
  e.rotation(0, 1) = 1e-6;
  EXPECT_THROW(e.validate(), GeometryError);
  e.rotation = -Mat3::Identity();
  EXPECT_THROW(e.validate(), GeometryError);
}

TEST(Calibration, JsonRoundTripAndHash) {
  const CameraRig rig = stereo_rig(400, 320, 240, 0.06, 1.5);
  const CameraRig back = rig_from_json(rig_to_json(rig));
  EXPECT_EQ(rig_to_json(back).dump(), rig_to_json(rig).dump());
  EXPECT_EQ(rig_hash(rig), rig_hash(back));
  CameraRig other = rig;
  other.baseline_m = 0.07;
  EXPECT_NE(rig_hash(rig), rig_hash(other));
}

TEST(Calibration, SchemaErrorsCarryPath) {
  auto j = rig_to_json(stereo_rig(400, 320, 240, 0.06));
  j["right"].erase("fx");
  try {
    rig_from_json(j);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "$.right");
  }
  auto k = rig_to_json(stereo_rig(400, 320, 240, 0.06));
  k["reference_id"] = "missing";
  EXPECT_THROW(rig_from_json(k), GeometryError);
}

TEST(Rectification, AlreadyRectifiedRigIsFixedPoint) {
  const CameraRig rig = stereo_rig(100, 128, 96, 0.1);
  cv::Mat l, r;
  noise_image(128, 96, 1).convertTo(l, CV_32F);
  noise_image(128, 96, 2).convertTo(r, CV_32F);
  const auto out = rectify_stereo_pair(rig, "left", "right", l, r);
  EXPECT_LE(cv::norm(out.left, l, cv::NORM_INF), 1e-6);
  EXPECT_LE(cv::norm(out.right, r, cv::NORM_INF), 1e-6);
  EXPECT_NEAR(out.calibration.baseline, 0.1, 1e-12);
}

TEST(Rectification, YawedRightCameraGivesRowAlignedViews) {
  const CameraRig rig = stereo_rig(400, 320, 240, 0.08, 2.0);
  const auto rc = compute_rectification(rig.at("left"), rig.at("right"));
  EXPECT_LT(orthonormality_error(rc.left.extrinsics.rotation), 1e-9);
  EXPECT_LT(orthonormality_error(rc.right.extrinsics.rotation), 1e-9);
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> xy(-0.3, 0.3), z(0.6, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 500; ++i) {
    const Vec3 p(xy(gen), xy(gen), z(gen));
    const Vec2 a = hand_project(rc.left, p);
    const Vec2 b = hand_project(rc.right, p);
    worst = std::max(worst, std::abs(a.y() - b.y()));
  }
  EXPECT_LT(worst, 0.1);
}

TEST(Rectification, OppositeCamerasFail) {
  CameraRig rig = stereo_rig(100, 128, 96, 0.1);
  rig.cameras["right"].extrinsics.rotation = rodrigues(Vec3(0, M_PI, 0));
  EXPECT_THROW(compute_rectification(rig.at("left"), rig.at("right")), RectificationError);
}

TEST(BlockMatching, SelfMatchIsZero) {
  const cv::Mat img = noise_image(96, 64, 3);
  BlockMatchParams p;
  p.max_disparity = 16;
  const auto d = compute_disparity(img, img, p);
  int valid = 0;
  for (int y = 0; y < d.values.rows; ++y) {
    for (int x = 0; x < d.values.cols; ++x) {
      if (!d.valid.at<std::uint8_t>(y, x)) continue;
      ++valid;
      EXPECT_EQ(d.values.at<float>(y, x), 0.0f);
    }
  }
  EXPECT_GT(valid, 0);
}

TEST(BlockMatching, ShiftedNoiseRecoversShift) {
  const cv::Mat left = noise_image(160, 80, 4);
  cv::Mat right(left.size(), left.type(), cv::Scalar(0));
  // right(x) = left(x + 10): a point at left x appears at right x - 10.
  left.colRange(10, left.cols).copyTo(right.colRange(0, left.cols - 10));
  BlockMatchParams p;
  p.max_disparity = 32;
  p.block_size = 7;
  const auto d = compute_disparity(left, right, p);
  int valid = 0, hit = 0;
  for (int y = 0; y < d.values.rows; ++y) {
    for (int x = 0; x < d.values.cols; ++x) {
      if (!d.valid.at<std::uint8_t>(y, x)) continue;
      ++valid;
      if (std::abs(d.values.at<float>(y, x) - 10.0f) < 1e-6f) ++hit;
      EXPECT_LE(d.values.at<float>(y, x), 32.0f);
    }
  }
  ASSERT_GT(valid, 1000);
  EXPECT_GE(hit, 0.99 * valid);
}

TEST(BlockMatching, TexturelessIsInvalid) {
  const cv::Mat flat(64, 96, CV_8UC1, cv::Scalar(77));
  BlockMatchParams p;
  p.max_disparity = 16;
  EXPECT_EQ(cv::countNonZero(compute_disparity(flat, flat, p).valid), 0);
}

TEST(BlockMatching, Deterministic) {
  const cv::Mat l = noise_image(96, 64, 5), r = noise_image(96, 64, 6);
  BlockMatchParams p;
  p.max_disparity = 16;
  const auto a = compute_disparity(l, r, p), b = compute_disparity(l, r, p);
  EXPECT_EQ(cv::norm(a.values, b.values, cv::NORM_INF), 0.0);
  EXPECT_EQ(cv::norm(a.valid, b.valid, cv::NORM_INF), 0.0);
}

TEST(BlockMatching, RejectsBadParameters) {
  const cv::Mat img = noise_image(32, 32, 7);
  BlockMatchParams p;
  p.block_size = 4;
  EXPECT_THROW(compute_disparity(img, img, p), GeometryError);
  p.block_size = 5;
  p.max_disparity = 0;
  EXPECT_THROW(compute_disparity(img, img, p), GeometryError);
}

namespace {

DisparityMap constant_disparity(int w, int h, float d) {
  DisparityMap m;
  m.values = cv::Mat(h, w, CV_32FC1, cv::Scalar(d));
  m.valid = cv::Mat(h, w, CV_8UC1, cv::Scalar(1));
  return m;
}

}  // namespace

TEST(DepthCloud, FocalTimesBaselineOverDisparity) {
  const auto cloud = disparity_to_depth_cloud(constant_disparity(16, 8, 10.0f), cam100(), 0.1);
  ASSERT_EQ(cloud.size(), 16u * 8u);
  for (const auto& p : cloud) EXPECT_NEAR(p.xyz.z(), 1.0, 1e-12);

  const Camera c500 = scene::pinhole(500, 64, 64);
  for (const auto& p : disparity_to_depth_cloud(constant_disparity(4, 4, 25.0f), c500, 0.05)) {
    EXPECT_NEAR(p.xyz.z(), 1.0, 1e-12);
  }
}

TEST(DepthCloud, InvalidPixelsOmitted) {
  auto d = constant_disparity(8, 8, 10.0f);
  d.valid.at<std::uint8_t>(3, 4) = 0;
  d.values.at<float>(5, 5) = 0.0f;
  const auto cloud = disparity_to_depth_cloud(d, cam100(), 0.1);
  EXPECT_EQ(cloud.size(), 62u);
  for (const auto& p : cloud) {
    EXPECT_FALSE(p.row == 3 && p.col == 4);
    EXPECT_FALSE(p.row == 5 && p.col == 5);
  }
}

TEST(DepthCloud, FrontoParallelPlaneExact) {
  // Disparity of a plane at Z* is f*B/Z*; the cloud must return Z* again.
  const double f = 400, b = 0.06, z = 1.37;
  const auto cloud = disparity_to_depth_cloud(
      constant_disparity(32, 16, static_cast<float>(f * b / z)), scene::pinhole(f, 32, 16), b);
  const double expected = f * b / static_cast<double>(static_cast<float>(f * b / z));
  for (const auto& p : cloud) EXPECT_LT(std::abs(p.xyz.z() - expected) / expected, 1e-12);
}

TEST(Registration, IdenticalCameraGivesIdentityMap) {
  const Camera c = cam100();
  cv::Mat depth(128, 128, CV_64FC1, cv::Scalar(1.0));
  const auto map = build_registration_map(depth_to_cloud(depth, c), c, {128, 128});
  for (int y = 0; y < 128; ++y) {
    for (int x = 0; x < 128; ++x) {
      ASSERT_TRUE(map.valid.at<std::uint8_t>(y, x));
      EXPECT_NEAR(map.src_x.at<float>(y, x), x, 1e-4);
      EXPECT_NEAR(map.src_y.at<float>(y, x), y, 1e-4);
    }
  }
}

TEST(Registration, HandProjectionCase) {
  PointCloud cloud{{Vec3(0, 0, 1), 64, 64}};
  const auto map = build_registration_map(cloud, shifted(cam100(), -0.1), {128, 128});
  ASSERT_TRUE(map.valid.at<std::uint8_t>(64, 64));
  EXPECT_EQ(map.src_x.at<float>(64, 64), 54.0f);
  EXPECT_EQ(map.src_y.at<float>(64, 64), 64.0f);
  EXPECT_EQ(cv::countNonZero(map.valid), 1);
}

TEST(Registration, BehindOrOutsideTargetIsInvalid) {
  PointCloud cloud{{Vec3(0, 0, -1), 1, 1}, {Vec3(10, 0, 1), 2, 2}};
  const auto map = build_registration_map(cloud, cam100(), {8, 8});
  EXPECT_EQ(cv::countNonZero(map.valid), 0);
}

TEST(Warp, IdentityMapIsBitExact) {
  cv::Mat img;
  noise_image(40, 30, 8).convertTo(img, CV_32F, 1.0 / 7.0);
  RegistrationMap map;
  map.src_x = cv::Mat(30, 40, CV_32FC1);
  map.src_y = cv::Mat(30, 40, CV_32FC1);
  map.valid = cv::Mat(30, 40, CV_8UC1, cv::Scalar(1));
  for (int y = 0; y < 30; ++y) {
    for (int x = 0; x < 40; ++x) {
      map.src_x.at<float>(y, x) = static_cast<float>(x);
      map.src_y.at<float>(y, x) = static_cast<float>(y);
    }
  }
  const auto out = warp_to_reference(img, map);
  EXPECT_EQ(cv::norm(out.image, img, cv::NORM_INF), 0.0);
  EXPECT_EQ(cv::countNonZero(out.mask), 40 * 30);
}

TEST(Warp, ShiftedMapOnRamp) {
  cv::Mat ramp(20, 30, CV_32FC1);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 30; ++x) ramp.at<float>(y, x) = static_cast<float>(x);
  }
  RegistrationMap map;
  map.src_x = cv::Mat(20, 30, CV_32FC1);
  map.src_y = cv::Mat(20, 30, CV_32FC1);
  map.valid = cv::Mat(20, 30, CV_8UC1, cv::Scalar(1));
  map.target_width = 30;
  map.target_height = 20;
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 30; ++x) {
      map.src_x.at<float>(y, x) = x + 1.0f;
      map.src_y.at<float>(y, x) = static_cast<float>(y);
    }
  }
  const auto out = warp_to_reference(ramp, map);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 30; ++x) {
      if (!out.mask.at<std::uint8_t>(y, x)) continue;
      EXPECT_EQ(out.image.at<float>(y, x), x + 1.0f);
    }
  }
  EXPECT_EQ(cv::countNonZero(out.mask), 20 * 29);
}

TEST(Warp, AllInvalidMapGivesZeros) {
  RegistrationMap map;
  map.src_x = cv::Mat(10, 10, CV_32FC1, cv::Scalar(3));
  map.src_y = cv::Mat(10, 10, CV_32FC1, cv::Scalar(3));
  map.valid = cv::Mat(10, 10, CV_8UC1, cv::Scalar(0));
  const auto out = warp_to_reference(cv::Mat(10, 10, CV_32FC1, cv::Scalar(5)), map);
  EXPECT_EQ(cv::countNonZero(out.image), 0);
  EXPECT_EQ(cv::countNonZero(out.mask), 0);
}

TEST(Warp, DimensionMismatchThrows) {
  RegistrationMap map;
  map.src_x = cv::Mat(4, 4, CV_32FC1, cv::Scalar(0));
  map.src_y = map.src_x.clone();
  map.valid = cv::Mat(4, 4, CV_8UC1, cv::Scalar(1));
  map.target_width = 8;
  map.target_height = 8;
  EXPECT_THROW(warp_to_reference(cv::Mat(4, 4, CV_32FC1), map), GeometryError);
}

TEST(Registration, BlobRoundTrip) {
  const Camera c = cam100();
  cv::Mat depth(128, 128, CV_64FC1, cv::Scalar(1.2));
  const auto map = build_registration_map(depth_to_cloud(depth, c), shifted(c, -0.05), {128, 128});
  const auto path = scratch::path("mcpad_map.mcrm").string();
  save_registration_map(path, map);
  EXPECT_EQ(std::filesystem::file_size(path), 16u + 128u * 128u * 9u);
  const auto back = load_registration_map(path);
  EXPECT_EQ(cv::norm(back.src_x, map.src_x, cv::NORM_INF), 0.0);
  EXPECT_EQ(cv::norm(back.src_y, map.src_y, cv::NORM_INF), 0.0);
  EXPECT_EQ(cv::norm(back.valid, map.valid, cv::NORM_INF), 0.0);
  std::filesystem::remove(path);
}

TEST(Registration, PlaneSceneRoundTrip) {
  // Reference and a translated target view of the same textured plane; the
  // warped target must reproduce the reference render.
  const Camera ref = scene::pinhole(400, 240, 180);
  Camera tgt = scene::pinhole(400, 240, 180);
  tgt.extrinsics.translation = Vec3(-0.04, 0.01, 0.0);
  const double z = 1.0;
  cv::Mat depth(180, 240, CV_64FC1, cv::Scalar(z));
  const auto map = build_registration_map(depth_to_cloud(depth, ref), tgt, {240, 180});
  const auto out = warp_to_reference(scene::render_plane(tgt, z), map);
  const cv::Mat expected = scene::render_plane(ref, z);
  double total = 0;
  int n = 0;
  for (int y = 0; y < 180; ++y) {
    for (int x = 0; x < 240; ++x) {
      if (!out.mask.at<std::uint8_t>(y, x)) continue;
      total += std::abs(out.image.at<float>(y, x) - expected.at<float>(y, x));
      ++n;
    }
  }
  ASSERT_GT(n, 180 * 200);
  EXPECT_LT(total / n, 2.0 / 255.0);
}
