#pragma once

#include <Eigen/Core>
#include <array>
#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace mcpad::geometry {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

/// Pinhole intrinsics with the 5-coefficient radial/tangential model
/// (k1, k2, p1, p2, k3), as produced by standard calibration tooling.
struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  std::array<double, 5> dist{};
  int width = 1;
  int height = 1;

  void validate() const;
  bool has_distortion() const;
};

/// World-to-camera transform: x_cam = rotation * x_world + translation (meters).
struct CameraExtrinsics {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  void validate() const;
  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }
  Vec3 to_world(const Vec3& cam) const { return rotation.transpose() * (cam - translation); }
};

struct Camera {
  CameraIntrinsics intrinsics;
  CameraExtrinsics extrinsics;
};

/// Calibrated sensor suite. The reference camera is the rectified-left NIR view
/// onto which every other stream is registered.
struct CameraRig {
  std::map<std::string, Camera> cameras;
  std::string reference_id;
  double baseline_m = 0.0;

  const Camera& at(const std::string& id) const;
  const Camera& reference() const { return at(reference_id); }
  void validate() const;
};

/// Max-norm of R^T R - I.
double orthonormality_error(const Mat3& r);

Mat3 rodrigues(const Vec3& axis_angle);
Vec3 rodrigues_inverse(const Mat3& r);
/// Rotation angle of r in radians, in [0, pi].
double rotation_angle(const Mat3& r);

/// Applies lens distortion to normalized image coordinates.
Vec2 distort(const CameraIntrinsics& k, const Vec2& normalized);
/// Pixel -> undistorted normalized coordinates (10 fixed-point iterations).
Vec2 undistort(const CameraIntrinsics& k, const Vec2& pixel);

/// Projects a world point; nullopt when the point is not in front of the camera.
std::optional<Vec2> project_point(const Camera& cam, const Vec3& xyz);

nlohmann::json rig_to_json(const CameraRig& rig);
CameraRig rig_from_json(const nlohmann::json& j);
CameraRig load_rig(const std::string& path);
void save_rig(const std::string& path, const CameraRig& rig);

/// Content hash of the canonical JSON serialization.
std::string rig_hash(const CameraRig& rig);

}  // namespace mcpad::geometry
