#pragma once

#include <map>
#include <opencv2/core.hpp>
#include <string>
#include <vector>

#include "mcpad/preprocess/align.hpp"
#include "mcpad/preprocess/channels.hpp"

namespace mcpad::preprocess {

struct CubeProvenance {
  std::string sample_id;
  int frame_index = 0;
  double scale = 1.0;
  std::string rig_hash;
};

/// Aligned face crop, channel-last (HWC) floats in [0, 1]. `channels` lists the
/// registry index of every slice, in registry order.
struct ChannelCube {
  int height = kCropSize;
  int width = kCropSize;
  std::vector<int> channels;
  std::vector<float> data;
  CubeProvenance provenance;
  /// Flat pixel indices whose NIR / SWIR spectrum was all zero.
  std::map<std::string, std::vector<int>> zero_pixels;

  int depth() const { return static_cast<int>(channels.size()); }
  float at(int y, int x, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels.size() + c];
  }
  float& at(int y, int x, int c) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels.size() + c];
  }
  /// Copy of one slice as a CV_32F plane.
  cv::Mat plane(int slice) const;
};

/// Stacks named, normalized 224x224 CV_32F planes (keyed by registry name) into a
/// full 16-channel cube. Throws StackingError naming the first missing channel.
ChannelCube stack_channels(const std::map<std::string, cv::Mat>& planes);

/// Sub-cube with the combo's channels in registry order. Every requested channel
/// must be present in `cube`.
ChannelCube select_channels(const ChannelCube& cube, const ChannelCombo& combo);
ChannelCube select_channels(const ChannelCube& cube, std::string_view combo);

/// Cube container: "MCCB", u32 H, u32 W, u32 C, then C float32 planes in
/// registry order. The JSON sidecar at `<path>.json` holds provenance, channel
/// names and zero-pixel flags.
void write_cube(const std::string& path, const ChannelCube& cube);
ChannelCube read_cube(const std::string& path);

}  // namespace mcpad::preprocess
