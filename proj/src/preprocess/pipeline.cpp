#include "mcpad/preprocess/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "mcpad/common/error.hpp"
#include "mcpad/geometry/registration.hpp"
#include "mcpad/geometry/sampling.hpp"
#include "mcpad/geometry/stereo.hpp"
#include "mcpad/preprocess/normalize.hpp"

namespace mcpad::preprocess {

namespace {

bool same_camera(const geometry::Camera& a, const geometry::Camera& b) {
  const auto& ka = a.intrinsics;
  const auto& kb = b.intrinsics;
  return ka.fx == kb.fx && ka.fy == kb.fy && ka.cx == kb.cx && ka.cy == kb.cy &&
         ka.dist == kb.dist && ka.width == kb.width && ka.height == kb.height &&
         a.extrinsics.rotation == b.extrinsics.rotation &&
         a.extrinsics.translation == b.extrinsics.translation;
}

// Aligned float plane -> uint16 with round-half-up and clamping.
cv::Mat to_u16(const cv::Mat& f) {
  cv::Mat out(f.size(), CV_16UC1);
  for (int y = 0; y < f.rows; ++y) {
    const float* s = f.ptr<float>(y);
    auto* d = out.ptr<std::uint16_t>(y);
    for (int x = 0; x < f.cols; ++x) {
      d[x] = static_cast<std::uint16_t>(std::clamp(std::floor(s[x] + 0.5f), 0.0f, 65535.0f));
    }
  }
  return out;
}

}  // namespace

std::string sensor_for_channel(std::string_view name) {
  const int idx = channel_index(name);
  if (idx < 0) throw ParseError("unknown channel " + std::string(name));
  switch (channel(idx).modality) {
    case Modality::RGB: return "rgb";
    case Modality::Thermal: return "thermal";
    case Modality::SWIR: return "swir";
    case Modality::Depth:
    case Modality::NIR: return "nir_left";
  }
  return "nir_left";
}

std::map<std::string, cv::Mat> register_frame(const RawFrame& frame,
                                              const geometry::CameraRig& rig) {
  const geometry::Camera& ref = rig.reference();
  auto d_it = frame.planes.find("D");
  if (d_it == frame.planes.end()) throw StackingError("missing channel D (D)");
  const cv::Size ref_size = d_it->second.size();

  std::map<std::string, cv::Mat> out;
  std::map<std::string, geometry::RegistrationMap> maps;
  geometry::PointCloud cloud;
  bool have_cloud = false;

  for (const auto& [name, plane] : frame.planes) {
    const std::string sensor = sensor_for_channel(name);
    const geometry::Camera& cam = rig.at(sensor);
    if (sensor == rig.reference_id || same_camera(cam, ref)) {
      if (plane.size() != ref_size) {
        throw GeometryError("channel " + name + " is not in the reference raster");
      }
      out[name] = geometry::to_float(plane);
      continue;
    }
    if (!have_cloud) {
      cv::Mat depth_m;
      d_it->second.convertTo(depth_m, CV_64F, 1e-3);
      cloud = geometry::depth_to_cloud(depth_m, ref);
      have_cloud = true;
    }
    auto m = maps.find(sensor);
    if (m == maps.end()) {
      m = maps.emplace(sensor, geometry::build_registration_map(cloud, cam, ref_size, sensor)).first;
    }
    out[name] = geometry::warp_to_reference(plane, m->second).image;
  }
  return out;
}

ChannelCube preprocess_frame(const RawFrame& frame, const geometry::CameraRig& rig,
                             const PipelineConfig& cfg) {
  std::map<std::string, cv::Mat> registered = register_frame(frame, rig);
  for (const ChannelDescriptor& d : channel_registry()) {
    if (!registered.count(std::string(d.name))) {
      throw StackingError("missing channel " + std::string(d.name) + " (" +
                          std::string(modality_token(d.modality)) + ")");
    }
  }

  FaceLandmarks lm = frame.landmarks;
  if (cfg.scale != 1.0) {
    const cv::Size full = registered.begin()->second.size();
    for (auto& [name, plane] : registered) plane = emulate_resolution(plane, cfg.scale);
    lm = rescale_landmarks(lm, full, registered.begin()->second.size());
  }

  std::map<std::string, cv::Mat> aligned;
  for (auto& [name, plane] : registered) aligned[name] = align_face(plane, lm, cfg.target);

  std::map<std::string, cv::Mat> normalized;
  for (const char* c : {"R", "G", "B"}) {
    cv::Mat p;
    aligned[c].convertTo(p, CV_32F, 1.0 / 255.0);
    normalized[c] = cv::min(cv::max(p, 0.0), 1.0);
  }
  for (const char* c : {"D", "T"}) {
    cv::Mat p;
    mad_normalize(to_u16(aligned[c])).convertTo(p, CV_32F, 1.0 / 255.0);
    normalized[c] = p;
  }

  std::map<std::string, std::vector<int>> zero_pixels;
  for (Modality m : {Modality::NIR, Modality::SWIR}) {
    const std::vector<int> idx = modality_channels(m);
    std::vector<cv::Mat> planes;
    for (int i : idx) planes.push_back(aligned[std::string(channel(i).name)]);
    SpectralNormalization sn = unit_spectral_normalize(planes);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      normalized[std::string(channel(idx[k]).name)] = sn.planes[k];
    }
    std::vector<int>& flagged = zero_pixels[std::string(modality_token(m))];
    for (int y = 0; y < sn.zero_mask.rows; ++y) {
      const auto* z = sn.zero_mask.ptr<std::uint8_t>(y);
      for (int x = 0; x < sn.zero_mask.cols; ++x) {
        if (z[x]) flagged.push_back(y * sn.zero_mask.cols + x);
      }
    }
  }

  ChannelCube cube = stack_channels(normalized);
  cube.zero_pixels = std::move(zero_pixels);
  cube.provenance.scale = cfg.scale;
  cube.provenance.rig_hash = geometry::rig_hash(rig);
  return cube;
}

}  // namespace mcpad::preprocess
