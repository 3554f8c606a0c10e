#include "mcpad/dataset/frames.hpp"

#include <cstdio>
#include <filesystem>
#include <opencv2/imgcodecs.hpp>

#include "mcpad/common/error.hpp"
#include "mcpad/preprocess/channels.hpp"

namespace mcpad::dataset {

std::string frame_path(const std::string& root, const std::string& sample_id, int frame,
                       std::string_view channel) {
  char name[32];
  std::snprintf(name, sizeof(name), "%03d_", frame);
  return (std::filesystem::path(root) / "frames" / sample_id /
          (std::string(name) + std::string(channel) + ".png"))
      .string();
}

void write_raw_frame(const std::string& root, const std::string& sample_id, int frame,
                     const preprocess::RawFrame& raw) {
  const auto dir = std::filesystem::path(root) / "frames" / sample_id;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& [name, plane] : raw.planes) {
    if (plane.type() != CV_16UC1) throw IoError("plane " + name + " must be CV_16U");
    const std::string path = frame_path(root, sample_id, frame, name);
    if (!cv::imwrite(path, plane)) throw IoError("cannot write " + path);
  }
}

cv::Mat read_plane(const std::string& root, const std::string& sample_id, int frame,
                   std::string_view channel) {
  const std::string path = frame_path(root, sample_id, frame, channel);
  cv::Mat img = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (img.empty()) throw IoError("missing frame file " + path);
  if (img.type() != CV_16UC1) throw IoError(path + " is not a 16-bit grayscale PNG");
  return img;
}

preprocess::RawFrame read_raw_frame(const std::string& root, const SampleRecord& record,
                                    int frame) {
  if (frame < 0 || frame >= record.frames) {
    throw IoError(record.sample_id + ": frame " + std::to_string(frame) + " out of range");
  }
  if (static_cast<int>(record.landmarks.size()) != record.frames) {
    throw IoError(record.sample_id + ": manifest has no landmarks for its frames");
  }
  preprocess::RawFrame raw;
  for (const auto& d : preprocess::channel_registry()) {
    raw.planes[std::string(d.name)] = read_plane(root, record.sample_id, frame, d.name);
  }
  raw.landmarks = record.landmarks[static_cast<std::size_t>(frame)];
  return raw;
}

}  // namespace mcpad::dataset
