#include "mcpad/orchestrate/overlay.hpp"

#include <cmath>
#include <cstdio>
#include <opencv2/imgcodecs.hpp>

#include "mcpad/common/error.hpp"
#include "mcpad/preprocess/channels.hpp"

namespace mcpad::orchestrate {

void validate_deltas(const ExtrinsicDeltas& d) {
  for (double v : {d.rx, d.ry, d.rz}) {
    if (!std::isfinite(v) || std::abs(v) > kMaxDeltaDegrees) {
      throw Error("rotation deltas must lie within +-5 degrees");
    }
  }
  for (double v : {d.tx, d.ty, d.tz}) {
    if (!std::isfinite(v) || std::abs(v) > kMaxDeltaMillimeters) {
      throw Error("translation deltas must lie within +-50 mm");
    }
  }
}

ExtrinsicDeltas deltas_from_json(const nlohmann::json& j) {
  ExtrinsicDeltas d;
  if (j.is_null()) return d;
  if (!j.is_object()) throw SchemaError("$.deltas", "expected an object");
  try {
    d.rx = j.value("rx", 0.0);
    d.ry = j.value("ry", 0.0);
    d.rz = j.value("rz", 0.0);
    d.tx = j.value("tx", 0.0);
    d.ty = j.value("ty", 0.0);
    d.tz = j.value("tz", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("$.deltas", e.what());
  }
  return d;
}

geometry::CameraRig apply_deltas(const geometry::CameraRig& rig, const std::string& sensor,
                                 const ExtrinsicDeltas& d) {
  validate_deltas(d);
  geometry::CameraRig out = rig;
  auto it = out.cameras.find(sensor);
  if (it == out.cameras.end()) throw GeometryError("camera '" + sensor + "' not in rig");
  if (d.is_zero()) return out;
  const double k = M_PI / 180.0;
  const geometry::Mat3 rot = geometry::rodrigues(geometry::Vec3(0, 0, d.rz * k)) *
                             geometry::rodrigues(geometry::Vec3(0, d.ry * k, 0)) *
                             geometry::rodrigues(geometry::Vec3(d.rx * k, 0, 0));
  auto& e = it->second.extrinsics;
  e.rotation = rot * e.rotation;
  e.translation += geometry::Vec3(d.tx, d.ty, d.tz) * 1e-3;
  return out;
}

std::string make_frame_id(const std::string& sample_id, int frame) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "-f%03d", frame);
  return sample_id + buf;
}

std::optional<std::pair<std::string, int>> parse_frame_id(const std::string& id) {
  const auto pos = id.rfind("-f");
  if (pos == std::string::npos || pos == 0 || pos + 2 >= id.size()) return std::nullopt;
  const std::string digits = id.substr(pos + 2);
  for (char c : digits) {
    if (c < '0' || c > '9') return std::nullopt;
  }
  if (digits.size() > 6) return std::nullopt;
  return std::make_pair(id.substr(0, pos), std::stoi(digits));
}

cv::Mat to_display(const cv::Mat& plane, double lo, double hi) {
  cv::Mat f;
  plane.convertTo(f, CV_64F);
  cv::Mat out(plane.size(), CV_8UC1);
  const double range = hi > lo ? hi - lo : 1.0;
  for (int y = 0; y < f.rows; ++y) {
    const double* s = f.ptr<double>(y);
    auto* d = out.ptr<std::uint8_t>(y);
    for (int x = 0; x < f.cols; ++x) {
      const double v = std::floor(255.0 * (s[x] - lo) / range + 0.5);
      d[x] = static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
    }
  }
  return out;
}

cv::Mat render_overlay(const preprocess::RawFrame& frame, const geometry::CameraRig& rig,
                       const std::string& ref_channel, const std::string& target_channel,
                       double blend) {
  if (!(blend >= 0.0 && blend <= 1.0)) throw Error("blend must lie in [0, 1]");
  for (const auto& c : {ref_channel, target_channel}) {
    if (preprocess::channel_index(c) < 0) throw ParseError("unknown channel " + c);
    if (!frame.planes.count(c)) throw IoError("frame has no channel " + c);
  }
  preprocess::RawFrame sub;
  sub.landmarks = frame.landmarks;
  sub.planes["D"] = frame.planes.at("D");
  sub.planes[ref_channel] = frame.planes.at(ref_channel);
  sub.planes[target_channel] = frame.planes.at(target_channel);
  const auto reg = preprocess::register_frame(sub, rig);

  auto display = [&](const std::string& c) {
    double lo = 0.0, hi = 0.0;
    cv::minMaxLoc(frame.planes.at(c), &lo, &hi);
    return to_display(reg.at(c), lo, hi);
  };
  const cv::Mat ref = display(ref_channel);
  const cv::Mat tgt = display(target_channel);

  cv::Mat out(ref.size(), CV_8UC3);
  for (int y = 0; y < ref.rows; ++y) {
    const auto* r = ref.ptr<std::uint8_t>(y);
    const auto* t = tgt.ptr<std::uint8_t>(y);
    auto* o = out.ptr<cv::Vec3b>(y);
    for (int x = 0; x < ref.cols; ++x) {
      const auto mix = [&](double a, double b) {
        return static_cast<std::uint8_t>(std::floor((1.0 - blend) * a + blend * b + 0.5));
      };
      const std::uint8_t magenta = mix(r[x], t[x]);
      o[x] = cv::Vec3b(magenta, r[x], magenta);  // B, G, R
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const cv::Mat& image) {
  std::vector<std::uint8_t> buf;
  if (!cv::imencode(".png", image, buf)) throw IoError("PNG encoding failed");
  return buf;
}

}  // namespace mcpad::orchestrate
