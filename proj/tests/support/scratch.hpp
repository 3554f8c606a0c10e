#pragma once

// Per-process scratch paths: ctest runs each test case in its own process,
// often concurrently, so fixed temp names would collide.

#include <unistd.h>

#include <filesystem>
#include <string>

namespace scratch {

inline std::filesystem::path path(const std::string& name) {
  return std::filesystem::temp_directory_path() / (name + "_" + std::to_string(::getpid()));
}

}  // namespace scratch
