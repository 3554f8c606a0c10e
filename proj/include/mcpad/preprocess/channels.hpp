#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mcpad::preprocess {

enum class Modality { RGB, Depth, Thermal, NIR, SWIR };

std::string_view modality_token(Modality m);

struct ChannelDescriptor {
  int index;
  std::string_view name;   ///< plane name, e.g. "G", "T", "SWIR_1450nm"
  Modality modality;
  int wavelength_nm;       ///< 0 for non-spectral channels
};

inline constexpr int kNumChannels = 16;

/// Fixed 16-channel layout of a channel cube:
///   0-2 RGB, 3 D, 4 T, 5-8 NIR {735, 850, 940, 1050} nm,
///   9-15 SWIR {940, 1050, 1200, 1300, 1450, 1550, 1650} nm.
std::span<const ChannelDescriptor, kNumChannels> channel_registry();

const ChannelDescriptor& channel(int index);
/// Index of a plane name; -1 when unknown.
int channel_index(std::string_view name);
/// Registry indices belonging to a modality, in registry order.
std::vector<int> modality_channels(Modality m);

/// Parsed channel-combination string such as "RGB-SWIR" or "RGB-SWIR_1450nm".
struct ChannelCombo {
  std::string spec;
  std::vector<int> indices;  ///< sorted registry indices, no duplicates
  std::vector<Modality> modalities() const;
  int size() const { return static_cast<int>(indices.size()); }
};

/// Tokens: RGB, D, T, NIR, SWIR, or a single band NIR_<w>nm / SWIR_<w>nm,
/// joined by '-'. Throws ParseError on unknown tokens.
ChannelCombo parse_combo(std::string_view spec);

}  // namespace mcpad::preprocess
