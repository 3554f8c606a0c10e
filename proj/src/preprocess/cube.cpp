#include "mcpad/preprocess/cube.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>

#include "mcpad/common/binary_io.hpp"
#include "mcpad/common/error.hpp"

namespace mcpad::preprocess {

cv::Mat ChannelCube::plane(int slice) const {
  cv::Mat out(height, width, CV_32FC1);
  for (int y = 0; y < height; ++y) {
    float* o = out.ptr<float>(y);
    for (int x = 0; x < width; ++x) o[x] = at(y, x, slice);
  }
  return out;
}

ChannelCube stack_channels(const std::map<std::string, cv::Mat>& planes) {
  ChannelCube cube;
  for (const ChannelDescriptor& d : channel_registry()) {
    auto it = planes.find(std::string(d.name));
    if (it == planes.end()) {
      throw StackingError("missing channel " + std::string(d.name) + " (" +
                          std::string(modality_token(d.modality)) + ")");
    }
    const cv::Mat& p = it->second;
    if (p.rows != cube.height || p.cols != cube.width || p.type() != CV_32FC1) {
      throw StackingError("channel " + std::string(d.name) + " must be a 224x224 CV_32F plane");
    }
    cube.channels.push_back(d.index);
  }
  const std::size_t c = cube.channels.size();
  cube.data.assign(static_cast<std::size_t>(cube.height) * cube.width * c, 0.0f);
  for (std::size_t k = 0; k < c; ++k) {
    const cv::Mat& p = planes.at(std::string(channel(cube.channels[k]).name));
    for (int y = 0; y < cube.height; ++y) {
      const float* row = p.ptr<float>(y);
      for (int x = 0; x < cube.width; ++x) cube.at(y, x, static_cast<int>(k)) = row[x];
    }
  }
  return cube;
}

ChannelCube select_channels(const ChannelCube& cube, const ChannelCombo& combo) {
  std::vector<int> slices;
  for (int idx : combo.indices) {
    auto it = std::find(cube.channels.begin(), cube.channels.end(), idx);
    if (it == cube.channels.end()) {
      throw StackingError("cube has no channel " + std::string(channel(idx).name) +
                          " required by '" + combo.spec + "'");
    }
    slices.push_back(static_cast<int>(it - cube.channels.begin()));
  }
  ChannelCube out;
  out.height = cube.height;
  out.width = cube.width;
  out.channels = combo.indices;
  out.provenance = cube.provenance;
  out.zero_pixels = cube.zero_pixels;
  const std::size_t c = slices.size();
  out.data.resize(static_cast<std::size_t>(out.height) * out.width * c);
  const std::size_t src_c = cube.channels.size();
  for (std::size_t px = 0; px < static_cast<std::size_t>(out.height) * out.width; ++px) {
    for (std::size_t k = 0; k < c; ++k) {
      out.data[px * c + k] = cube.data[px * src_c + static_cast<std::size_t>(slices[k])];
    }
  }
  return out;
}

ChannelCube select_channels(const ChannelCube& cube, std::string_view combo) {
  return select_channels(cube, parse_combo(combo));
}

void write_cube(const std::string& path, const ChannelCube& cube) {
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    binio::write_magic(out, "MCCB");
    binio::write_u32(out, static_cast<std::uint32_t>(cube.height));
    binio::write_u32(out, static_cast<std::uint32_t>(cube.width));
    binio::write_u32(out, static_cast<std::uint32_t>(cube.depth()));
    std::vector<float> plane(static_cast<std::size_t>(cube.height) * cube.width);
    for (int k = 0; k < cube.depth(); ++k) {
      for (int y = 0, i = 0; y < cube.height; ++y) {
        for (int x = 0; x < cube.width; ++x, ++i) plane[static_cast<std::size_t>(i)] = cube.at(y, x, k);
      }
      binio::write_f32(out, plane);
    }
    if (!out) throw IoError("write failed for " + path);
  }
  nlohmann::json side;
  side["sample_id"] = cube.provenance.sample_id;
  side["frame_index"] = cube.provenance.frame_index;
  side["scale"] = cube.provenance.scale;
  side["rig_hash"] = cube.provenance.rig_hash;
  nlohmann::json names = nlohmann::json::array();
  for (int idx : cube.channels) names.push_back(std::string(channel(idx).name));
  side["channels"] = names;
  side["zero_pixels"] = cube.zero_pixels;
  binio::write_file(path + ".json", side.dump(2) + "\n");
}

ChannelCube read_cube(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open cube " + path);
  binio::expect_magic(in, "MCCB", path);
  ChannelCube cube;
  cube.height = static_cast<int>(binio::read_u32(in));
  cube.width = static_cast<int>(binio::read_u32(in));
  const int depth = static_cast<int>(binio::read_u32(in));

  nlohmann::json side;
  try {
    side = nlohmann::json::parse(binio::read_file(path + ".json"));
    for (const auto& n : side.at("channels")) {
      const int idx = channel_index(n.get<std::string>());
      if (idx < 0) throw ParseError("unknown channel in sidecar: " + n.get<std::string>());
      cube.channels.push_back(idx);
    }
    cube.provenance.sample_id = side.at("sample_id").get<std::string>();
    cube.provenance.frame_index = side.at("frame_index").get<int>();
    cube.provenance.scale = side.at("scale").get<double>();
    cube.provenance.rig_hash = side.value("rig_hash", "");
    cube.zero_pixels = side.value("zero_pixels", std::map<std::string, std::vector<int>>{});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ".json: " + e.what());
  }
  if (cube.depth() != depth) throw ParseError(path + ": sidecar channel count mismatch");

  std::vector<float> plane(static_cast<std::size_t>(cube.height) * cube.width);
  cube.data.resize(plane.size() * static_cast<std::size_t>(depth));
  for (int k = 0; k < depth; ++k) {
    binio::read_f32(in, plane);
    for (int y = 0, i = 0; y < cube.height; ++y) {
      for (int x = 0; x < cube.width; ++x, ++i) cube.at(y, x, k) = plane[static_cast<std::size_t>(i)];
    }
  }
  return cube;
}

}  // namespace mcpad::preprocess
