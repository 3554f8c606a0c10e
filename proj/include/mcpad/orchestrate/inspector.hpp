#pragma once

#include <memory>
#include <string>

#include "mcpad/orchestrate/workspace.hpp"

namespace mcpad::orchestrate {

/// HTTP backend of the calibration inspector.
///   GET  /api/calibration                      stored rig JSON
///   GET  /api/frames                           frame ids
///   GET  /api/frame/{id}/channel/{ch}          raw plane as 8-bit PNG
///   POST /api/overlay                          blended composite PNG
///   POST /api/calibration/accept               validate + persist a rig
/// Only the accept endpoint writes; it is serialized against readers.
class InspectorServer {
public:
  explicit InspectorServer(Workspace ws);
  ~InspectorServer();
  InspectorServer(const InspectorServer&) = delete;
  InspectorServer& operator=(const InspectorServer&) = delete;

  /// Binds and serves on a background thread; port 0 picks a free port.
  /// Returns the bound port. Throws IoError when the port cannot be bound.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  /// Blocks until stop() (or process exit).
  void wait();
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mcpad::orchestrate
