#include "mcpad/orchestrate/inspector.hpp"

#include <httplib.h>

#include <map>
#include <shared_mutex>
#include <thread>

#include "mcpad/common/binary_io.hpp"
#include "mcpad/common/error.hpp"
#include "mcpad/dataset/frames.hpp"
#include "mcpad/orchestrate/overlay.hpp"
#include "mcpad/preprocess/channels.hpp"
#include "mcpad/preprocess/pipeline.hpp"

namespace mcpad::orchestrate {

struct InspectorServer::Impl {
  Workspace ws;
  httplib::Server server;
  std::thread thread;
  std::shared_mutex rig_mu;
  std::vector<dataset::SampleRecord> manifest;
  std::map<std::string, std::size_t> by_id;

  explicit Impl(Workspace w) : ws(std::move(w)) {
    manifest = ws.manifest();
    for (std::size_t i = 0; i < manifest.size(); ++i) by_id[manifest[i].sample_id] = i;
    // httplib's default adds SO_REUSEPORT, which lets a second server share a busy port.
    server.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    routes();
  }

  static void json_reply(httplib::Response& res, const nlohmann::json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }

  static void error_reply(httplib::Response& res, int status, const std::string& msg) {
    json_reply(res, {{"error", msg}}, status);
  }

  const dataset::SampleRecord* record_for(const std::string& frame_id, int& frame) const {
    const auto parsed = parse_frame_id(frame_id);
    if (!parsed) return nullptr;
    auto it = by_id.find(parsed->first);
    if (it == by_id.end()) return nullptr;
    const auto& r = manifest[it->second];
    if (parsed->second < 0 || parsed->second >= r.frames) return nullptr;
    frame = parsed->second;
    return &r;
  }

  geometry::CameraRig current_rig() {
    std::shared_lock lock(rig_mu);
    return ws.rig();
  }

  void routes() {
    server.Get("/api/calibration", [this](const httplib::Request&, httplib::Response& res) {
      std::shared_lock lock(rig_mu);
      res.set_content(binio::read_file(ws.calibration_path().string()), "application/json");
    });

    server.Get("/api/frames", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::json ids = nlohmann::json::array();
      for (const auto& r : manifest) {
        for (int f = 0; f < r.frames; ++f) ids.push_back(make_frame_id(r.sample_id, f));
      }
      json_reply(res, {{"frames", ids}});
    });

    server.Get(R"(/api/frame/([^/]+)/channel/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 int frame = 0;
                 const auto* r = record_for(req.matches[1], frame);
                 const std::string ch = req.matches[2];
                 if (!r) return error_reply(res, 404, "unknown frame " + std::string(req.matches[1]));
                 if (preprocess::channel_index(ch) < 0) return error_reply(res, 404, "unknown channel " + ch);
                 const cv::Mat plane = dataset::read_plane(ws.root().string(), r->sample_id, frame, ch);
                 double lo = 0.0, hi = 0.0;
                 cv::minMaxLoc(plane, &lo, &hi);
                 const auto png = encode_png(to_display(plane, lo, hi));
                 res.set_content(std::string(png.begin(), png.end()), "image/png");
               });

    server.Post("/api/overlay", [this](const httplib::Request& req, httplib::Response& res) {
      nlohmann::json body;
      try {
        body = nlohmann::json::parse(req.body);
      } catch (const nlohmann::json::exception& e) {
        return error_reply(res, 400, std::string("invalid JSON: ") + e.what());
      }
      try {
        const std::string frame_id = body.at("frame_id").get<std::string>();
        const std::string ref = body.at("ref_channel").get<std::string>();
        const std::string tgt = body.at("target_channel").get<std::string>();
        const double blend = body.value("blend", 0.5);
        const ExtrinsicDeltas deltas = deltas_from_json(body.value("deltas", nlohmann::json()));
        int frame = 0;
        const auto* r = record_for(frame_id, frame);
        if (!r) return error_reply(res, 404, "unknown frame " + frame_id);
        for (const auto& c : {ref, tgt}) {
          if (preprocess::channel_index(c) < 0) return error_reply(res, 400, "unknown channel " + c);
        }
        const auto base = current_rig();
        const auto rig = apply_deltas(base, preprocess::sensor_for_channel(tgt), deltas);
        preprocess::RawFrame raw;
        if (static_cast<int>(r->landmarks.size()) == r->frames) raw.landmarks = r->landmarks[frame];
        for (const auto& c : {std::string("D"), ref, tgt}) {
          raw.planes[c] = dataset::read_plane(ws.root().string(), r->sample_id, frame, c);
        }
        const auto png = encode_png(render_overlay(raw, rig, ref, tgt, blend));
        res.set_content(std::string(png.begin(), png.end()), "image/png");
      } catch (const nlohmann::json::exception& e) {
        error_reply(res, 400, e.what());
      } catch (const IoError& e) {
        error_reply(res, 404, e.what());
      } catch (const Error& e) {
        error_reply(res, 400, e.what());
      }
    });

    server.Post("/api/calibration/accept", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto rig = geometry::rig_from_json(nlohmann::json::parse(req.body));
        std::unique_lock lock(rig_mu);
        ws.save_rig(rig);
        json_reply(res, {{"status", "accepted"}, {"rig_hash", geometry::rig_hash(rig)}});
      } catch (const nlohmann::json::exception& e) {
        error_reply(res, 400, std::string("invalid JSON: ") + e.what());
      } catch (const Error& e) {
        error_reply(res, 400, e.what());
      }
    });

    server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          try {
            std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            error_reply(res, 500, e.what());
          } catch (...) {
            error_reply(res, 500, "internal error");
          }
        });
  }
};

InspectorServer::InspectorServer(Workspace ws) : impl_(std::make_unique<Impl>(std::move(ws))) {}

InspectorServer::~InspectorServer() { stop(); }

int InspectorServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound <= 0) throw IoError("cannot bind an inspector port on " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("port " + std::to_string(port) + " is busy or unavailable on " + host);
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void InspectorServer::wait() {
  if (impl_ && impl_->thread.joinable()) impl_->thread.join();
}

void InspectorServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace mcpad::orchestrate
