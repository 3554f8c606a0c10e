#include "mcpad/geometry/camera.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

#include "mcpad/common/binary_io.hpp"
#include "mcpad/common/error.hpp"
#include "mcpad/common/hash.hpp"

namespace mcpad::geometry {

namespace {

constexpr double kOrthoTolerance = 1e-9;

}  // namespace

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw GeometryError("focal lengths must be positive");
  if (width <= 0 || height <= 0) throw GeometryError("sensor size must be positive");
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw GeometryError("principal point outside the sensor");
  }
}

bool CameraIntrinsics::has_distortion() const {
  for (double d : dist) {
    if (d != 0.0) return true;
  }
  return false;
}

void CameraExtrinsics::validate() const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw GeometryError("extrinsics contain non-finite values");
  }
  if (orthonormality_error(rotation) >= kOrthoTolerance) {
    throw GeometryError("rotation is not orthonormal");
  }
  if (std::abs(rotation.determinant() - 1.0) >= kOrthoTolerance) {
    throw GeometryError("rotation is not proper (det != +1)");
  }
}

const Camera& CameraRig::at(const std::string& id) const {
  auto it = cameras.find(id);
  if (it == cameras.end()) throw GeometryError("camera '" + id + "' not in rig");
  return it->second;
}

void CameraRig::validate() const {
  if (!cameras.count(reference_id)) {
    throw GeometryError("reference camera '" + reference_id + "' not in rig");
  }
  if (!(baseline_m > 0.0)) throw GeometryError("baseline must be positive");
  for (const auto& [id, cam] : cameras) {
    try {
      cam.intrinsics.validate();
      cam.extrinsics.validate();
    } catch (const GeometryError& e) {
      throw GeometryError(id + ": " + e.what());
    }
  }
}

double orthonormality_error(const Mat3& r) {
  return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

Mat3 rodrigues(const Vec3& axis_angle) {
  const double theta = axis_angle.norm();
  if (theta == 0.0) return Mat3::Identity();
  return Eigen::AngleAxisd(theta, axis_angle / theta).toRotationMatrix();
}

Vec3 rodrigues_inverse(const Mat3& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.axis() * aa.angle();
}

double rotation_angle(const Mat3& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

Vec2 distort(const CameraIntrinsics& k, const Vec2& n) {
  const double x = n.x();
  const double y = n.y();
  const double r2 = x * x + y * y;
  const auto& [k1, k2, p1, p2, k3] = k.dist;
  const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
  return {x * radial + 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x),
          y * radial + p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y};
}

Vec2 undistort(const CameraIntrinsics& k, const Vec2& pixel) {
  const Vec2 d((pixel.x() - k.cx) / k.fx, (pixel.y() - k.cy) / k.fy);
  if (!k.has_distortion()) return d;
  const auto& [k1, k2, p1, p2, k3] = k.dist;
  Vec2 n = d;
  for (int it = 0; it < 10; ++it) {
    const double x = n.x();
    const double y = n.y();
    const double r2 = x * x + y * y;
    const double radial = 1.0 + r2 * (k1 + r2 * (k2 + r2 * k3));
    const double dx = 2.0 * p1 * x * y + p2 * (r2 + 2.0 * x * x);
    const double dy = p1 * (r2 + 2.0 * y * y) + 2.0 * p2 * x * y;
    n = Vec2((d.x() - dx) / radial, (d.y() - dy) / radial);
  }
  return n;
}

std::optional<Vec2> project_point(const Camera& cam, const Vec3& xyz) {
  const Vec3 pc = cam.extrinsics.to_camera(xyz);
  if (!(pc.z() > 0.0)) return std::nullopt;
  const Vec2 n(pc.x() / pc.z(), pc.y() / pc.z());
  const CameraIntrinsics& k = cam.intrinsics;
  const Vec2 dn = k.has_distortion() ? distort(k, n) : n;
  return Vec2(k.fx * dn.x() + k.cx, k.fy * dn.y() + k.cy);
}

nlohmann::json rig_to_json(const CameraRig& rig) {
  nlohmann::json j = nlohmann::json::object();
  j["reference_id"] = rig.reference_id;
  j["baseline_m"] = rig.baseline_m;
  for (const auto& [id, cam] : rig.cameras) {
    const auto& k = cam.intrinsics;
    const auto& e = cam.extrinsics;
    nlohmann::json c;
    c["fx"] = k.fx;
    c["fy"] = k.fy;
    c["cx"] = k.cx;
    c["cy"] = k.cy;
    c["dist"] = k.dist;
    c["width"] = k.width;
    c["height"] = k.height;
    nlohmann::json r = nlohmann::json::array();
    for (int i = 0; i < 3; ++i) {
      r.push_back({e.rotation(i, 0), e.rotation(i, 1), e.rotation(i, 2)});
    }
    c["R"] = r;
    c["t"] = {e.translation.x(), e.translation.y(), e.translation.z()};
    j[id] = c;
  }
  return j;
}

CameraRig rig_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("$", "calibration must be a JSON object");
  CameraRig rig;
  try {
    rig.reference_id = j.at("reference_id").get<std::string>();
    rig.baseline_m = j.at("baseline_m").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("$", e.what());
  }
  for (const auto& [id, c] : j.items()) {
    if (id == "reference_id" || id == "baseline_m") continue;
    const std::string path = "$." + id;
    try {
      Camera cam;
      auto& k = cam.intrinsics;
      k.fx = c.at("fx").get<double>();
      k.fy = c.at("fy").get<double>();
      k.cx = c.at("cx").get<double>();
      k.cy = c.at("cy").get<double>();
      k.dist = c.at("dist").get<std::array<double, 5>>();
      k.width = c.at("width").get<int>();
      k.height = c.at("height").get<int>();
      const auto& r = c.at("R");
      if (r.size() != 3) throw SchemaError(path + ".R", "expected 3 rows");
      for (int i = 0; i < 3; ++i) {
        const auto row = r.at(i).get<std::array<double, 3>>();
        for (int m = 0; m < 3; ++m) cam.extrinsics.rotation(i, m) = row[m];
      }
      const auto t = c.at("t").get<std::array<double, 3>>();
      cam.extrinsics.translation = Vec3(t[0], t[1], t[2]);
      rig.cameras.emplace(id, cam);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path, e.what());
    }
  }
  rig.validate();
  return rig;
}

CameraRig load_rig(const std::string& path) {
  const std::string text = binio::read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return rig_from_json(j);
}

void save_rig(const std::string& path, const CameraRig& rig) {
  binio::write_file(path, rig_to_json(rig).dump(2) + "\n");
}

std::string rig_hash(const CameraRig& rig) { return sha256_hex(rig_to_json(rig).dump()); }

}  // namespace mcpad::geometry
