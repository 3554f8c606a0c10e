#include "mcpad/preprocess/channels.hpp"

#include <algorithm>

#include "mcpad/common/error.hpp"

namespace mcpad::preprocess {

namespace {

constexpr std::array<ChannelDescriptor, kNumChannels> kRegistry{{
    {0, "R", Modality::RGB, 0},
    {1, "G", Modality::RGB, 0},
    {2, "B", Modality::RGB, 0},
    {3, "D", Modality::Depth, 0},
    {4, "T", Modality::Thermal, 0},
    {5, "NIR_735nm", Modality::NIR, 735},
    {6, "NIR_850nm", Modality::NIR, 850},
    {7, "NIR_940nm", Modality::NIR, 940},
    {8, "NIR_1050nm", Modality::NIR, 1050},
    {9, "SWIR_940nm", Modality::SWIR, 940},
    {10, "SWIR_1050nm", Modality::SWIR, 1050},
    {11, "SWIR_1200nm", Modality::SWIR, 1200},
    {12, "SWIR_1300nm", Modality::SWIR, 1300},
    {13, "SWIR_1450nm", Modality::SWIR, 1450},
    {14, "SWIR_1550nm", Modality::SWIR, 1550},
    {15, "SWIR_1650nm", Modality::SWIR, 1650},
}};

}  // namespace

std::string_view modality_token(Modality m) {
  switch (m) {
    case Modality::RGB: return "RGB";
    case Modality::Depth: return "D";
    case Modality::Thermal: return "T";
    case Modality::NIR: return "NIR";
    case Modality::SWIR: return "SWIR";
  }
  return "?";
}

std::span<const ChannelDescriptor, kNumChannels> channel_registry() { return kRegistry; }

const ChannelDescriptor& channel(int index) {
  if (index < 0 || index >= kNumChannels) throw Error("channel index out of range");
  return kRegistry[static_cast<std::size_t>(index)];
}

int channel_index(std::string_view name) {
  for (const auto& d : kRegistry) {
    if (d.name == name) return d.index;
  }
  return -1;
}

std::vector<int> modality_channels(Modality m) {
  std::vector<int> out;
  for (const auto& d : kRegistry) {
    if (d.modality == m) out.push_back(d.index);
  }
  return out;
}

std::vector<Modality> ChannelCombo::modalities() const {
  std::vector<Modality> out;
  for (int i : indices) {
    const Modality m = channel(i).modality;
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  return out;
}

ChannelCombo parse_combo(std::string_view spec) {
  ChannelCombo combo;
  combo.spec = std::string(spec);
  if (spec.empty()) throw ParseError("empty channel combination");
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t dash = spec.find('-', pos);
    const std::string_view token =
        spec.substr(pos, dash == std::string_view::npos ? std::string_view::npos : dash - pos);
    bool matched = false;
    for (Modality m : {Modality::RGB, Modality::Depth, Modality::Thermal, Modality::NIR,
                       Modality::SWIR}) {
      if (token == modality_token(m)) {
        for (int i : modality_channels(m)) combo.indices.push_back(i);
        matched = true;
      }
    }
    if (!matched) {
      const int idx = channel_index(token);
      if (idx < 0 || channel(idx).wavelength_nm == 0) {
        throw ParseError("unknown channel token '" + std::string(token) + "' in '" +
                         combo.spec + "'");
      }
      combo.indices.push_back(idx);
    }
    if (dash == std::string_view::npos) break;
    pos = dash + 1;
  }
  std::sort(combo.indices.begin(), combo.indices.end());
  combo.indices.erase(std::unique(combo.indices.begin(), combo.indices.end()),
                      combo.indices.end());
  return combo;
}

}  // namespace mcpad::preprocess
