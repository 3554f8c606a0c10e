#pragma once

#include <string>

#include "mcpad/dataset/manifest.hpp"
#include "mcpad/preprocess/pipeline.hpp"

namespace mcpad::dataset {

/// `<root>/frames/<sample_id>/<frame:03d>_<channel>.png`
std::string frame_path(const std::string& root, const std::string& sample_id, int frame,
                       std::string_view channel);

/// Writes every plane of `frame` as a 16-bit grayscale PNG.
void write_raw_frame(const std::string& root, const std::string& sample_id, int frame,
                     const preprocess::RawFrame& raw);

/// Loads all 16 registry planes of one frame, with landmarks from the record.
/// Throws IoError naming the first missing file.
preprocess::RawFrame read_raw_frame(const std::string& root, const SampleRecord& record,
                                    int frame);

/// Loads a single plane as CV_16U.
cv::Mat read_plane(const std::string& root, const std::string& sample_id, int frame,
                   std::string_view channel);

}  // namespace mcpad::dataset
