#include "mcpad/orchestrate/runner.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

#include "mcpad/common/binary_io.hpp"
#include "mcpad/common/error.hpp"
#include "mcpad/common/hash.hpp"
#include "mcpad/dataset/frames.hpp"
#include "mcpad/models/checkpoint.hpp"

namespace mcpad::orchestrate {

namespace {

// Runs job(i) for i in [0, n) on up to `workers` threads; rethrows the first error.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& job) {
  const std::size_t threads = std::max<std::size_t>(1, std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers))));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::string sidecar_rig_hash(const fs::path& cube) {
  std::ifstream in(cube.string() + ".json");
  if (!in) return {};
  try {
    const auto j = nlohmann::json::parse(in);
    return j.value("rig_hash", std::string());
  } catch (const nlohmann::json::exception&) {
    return {};
  }
}

std::map<std::string, const dataset::SampleRecord*> index_records(
    const std::vector<dataset::SampleRecord>& manifest) {
  std::map<std::string, const dataset::SampleRecord*> out;
  for (const auto& r : manifest) out[r.sample_id] = &r;
  return out;
}

const dataset::SampleRecord& find_record(
    const std::map<std::string, const dataset::SampleRecord*>& index, const std::string& id) {
  auto it = index.find(id);
  if (it == index.end()) throw ProtocolError("sample " + id + " is not in the manifest");
  return *it->second;
}

preprocess::ChannelCube load_cube_checked(const Workspace& ws, double scale,
                                          const std::string& id, int frame) {
  const fs::path p = ws.cube_path(scale, id, frame);
  if (!fs::exists(p)) {
    throw IoError("missing cube for sample " + id + " frame " + std::to_string(frame) + " (" +
                  p.string() + "); run preprocess first");
  }
  return preprocess::read_cube(p.string());
}

}  // namespace

PreprocessSummary run_preprocess(const Workspace& ws, const PreprocessOptions& opt,
                                 const std::vector<std::string>& sample_ids, const Logger& log) {
  const auto manifest = ws.manifest();
  const auto rig = ws.rig();
  const std::string hash = geometry::rig_hash(rig);
  const auto index = index_records(manifest);

  struct Job {
    const dataset::SampleRecord* record;
    int frame;
  };
  std::vector<Job> jobs;
  auto add = [&](const dataset::SampleRecord& r) {
    for (int f : dataset::sample_frames(r.frames, opt.frames_per_video)) jobs.push_back({&r, f});
  };
  if (sample_ids.empty()) {
    for (const auto& r : manifest) add(r);
  } else {
    for (const auto& id : sample_ids) add(find_record(index, id));
  }

  preprocess::PipelineConfig cfg;
  cfg.scale = opt.scale;
  std::atomic<int> written{0}, skipped{0};
  parallel_for(jobs.size(), opt.workers, [&](std::size_t i) {
    const Job& job = jobs[i];
    const fs::path out = ws.cube_path(opt.scale, job.record->sample_id, job.frame);
    if (!opt.force && fs::exists(out) && sidecar_rig_hash(out) == hash) {
      ++skipped;
      return;
    }
    const auto raw = dataset::read_raw_frame(ws.root().string(), *job.record, job.frame);
    preprocess::ChannelCube cube = preprocess::preprocess_frame(raw, rig, cfg);
    cube.provenance.sample_id = job.record->sample_id;
    cube.provenance.frame_index = job.frame;
    ensure_dir(out.parent_path());
    preprocess::write_cube(out.string(), cube);
    ++written;
  });
  if (log) {
    log("preprocess s" + scale_token(opt.scale) + ": " + std::to_string(written.load()) +
        " written, " + std::to_string(skipped.load()) + " up to date");
  }
  return {written.load(), skipped.load()};
}

std::vector<models::Example> load_examples(const Workspace& ws,
                                           const protocols::ProtocolDefinition& protocol,
                                           dataset::Fold fold, const std::string& combo,
                                           double scale, int frames_per_video) {
  const auto manifest = ws.manifest();
  const auto index = index_records(manifest);
  const auto parsed = preprocess::parse_combo(combo);
  std::vector<models::Example> out;
  for (const auto& id : protocol.fold(fold)) {
    const auto& r = find_record(index, id);
    for (int f : dataset::sample_frames(r.frames, frames_per_video)) {
      const auto cube = load_cube_checked(ws, scale, id, f);
      models::Example e;
      e.id = id;
      e.label = r.is_bonafide() ? 1.0 : 0.0;
      e.input = models::cube_to_tensor(preprocess::select_channels(cube, parsed));
      out.push_back(std::move(e));
    }
  }
  return out;
}

evaluation::ScoreFile score_fold(const Workspace& ws, const models::Detector& detector,
                                 const protocols::ProtocolDefinition& protocol,
                                 dataset::Fold fold, double scale, int frames_per_video,
                                 int workers) {
  const auto manifest = ws.manifest();
  const auto index = index_records(manifest);
  const auto& ids = protocol.fold(fold);
  evaluation::ScoreFile sf;
  sf.fold = std::string(dataset::fold_name(fold));
  sf.rows.resize(ids.size());
  parallel_for(ids.size(), workers, [&](std::size_t i) {
    const auto& r = find_record(index, ids[i]);
    double total = 0.0;
    const auto frames = dataset::sample_frames(r.frames, frames_per_video);
    for (int f : frames) total += detector.score(load_cube_checked(ws, scale, r.sample_id, f));
    evaluation::ScoreRow& row = sf.rows[i];
    row.sample_id = r.sample_id;
    row.label = r.label;
    row.attack_type = r.attack_type;
    row.score = total / static_cast<double>(frames.size());
  });
  return sf;
}

nlohmann::ordered_json cell_spec_to_json(const CellSpec& s) {
  nlohmann::ordered_json j;
  j["protocol"] = s.protocol;
  j["combo"] = s.combo;
  j["scale"] = s.scale;
  j["seed"] = s.seed;
  j["preset"] = s.preset;
  j["train"] = models::train_config_to_json(s.train);
  j["frames_per_video"] = s.frames_per_video;
  return j;
}

CellSpec cell_spec_from_json(const nlohmann::json& j) {
  CellSpec s;
  try {
    s.protocol = j.at("protocol").get<std::string>();
    s.combo = j.at("combo").get<std::string>();
    s.scale = j.at("scale").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.preset = j.at("preset").get<std::string>();
    s.train = models::train_config_from_json(j.at("train"));
    s.frames_per_video = j.at("frames_per_video").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("$", e.what());
  }
  return s;
}

std::string cell_hash(const CellSpec& spec, const protocols::ProtocolDefinition& protocol) {
  CellSpec s = spec;
  s.train.seed = s.seed;
  nlohmann::ordered_json j;
  j["cell"] = cell_spec_to_json(s);
  j["protocol"] = protocols::protocol_to_json(protocol);
  return sha256_hex(j.dump()).substr(0, 16);
}

models::Checkpoint train_cell(const Workspace& ws, const CellSpec& spec,
                              const protocols::ProtocolDefinition& protocol, const Logger& log) {
  const auto combo = preprocess::parse_combo(spec.combo);
  const auto model_cfg = models::preset_config(spec.preset, combo.size());
  models::TrainConfig tc = spec.train;
  tc.seed = spec.seed;
  const auto train = load_examples(ws, protocol, dataset::Fold::Train, spec.combo, spec.scale,
                                   spec.frames_per_video);
  const auto dev = load_examples(ws, protocol, dataset::Fold::Dev, spec.combo, spec.scale,
                                 spec.frames_per_video);
  models::EpochCallback cb;
  if (log) {
    cb = [&](int epoch, double tl, double dl) {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "  epoch %d train %.5f dev %.5f", epoch, tl, dl);
      log(buf);
    };
  }
  return models::train_model(train, dev, model_cfg, tc, spec.combo, cb);
}

namespace {

nlohmann::ordered_json result_to_json(const CellResult& r) {
  nlohmann::ordered_json j;
  j["hash"] = r.hash;
  j["spec"] = cell_spec_to_json(r.spec);
  j["metrics"] = evaluation::metrics_to_json(r.metrics);
  j["runtime_s"] = r.runtime_s;
  j["best_epoch"] = r.best_epoch;
  return j;
}

}  // namespace

CellResult run_cell(const Workspace& ws, const CellSpec& spec, const RunOptions& opt) {
  preprocess::parse_combo(spec.combo);  // fail before any work
  const auto protocol = ws.protocol(spec.protocol);
  CellResult result;
  result.spec = spec;
  result.spec.train.seed = spec.seed;
  result.hash = cell_hash(spec, protocol);
  const fs::path dir = ws.run_dir(result.hash);
  const fs::path cell_json = dir / "cell.json";

  if (!opt.force && fs::exists(cell_json)) {
    const auto j = nlohmann::json::parse(binio::read_file(cell_json.string()));
    if (j.value("hash", std::string()) == result.hash) {
      result.metrics = evaluation::metrics_from_json(j.at("metrics"));
      result.runtime_s = j.at("runtime_s").get<double>();
      result.best_epoch = j.at("best_epoch").get<int>();
      result.reused = true;
      return result;
    }
  }

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> ids;
  for (const auto& fold : protocol.folds) ids.insert(ids.end(), fold.begin(), fold.end());
  PreprocessOptions popt;
  popt.scale = spec.scale;
  popt.frames_per_video = spec.frames_per_video;
  popt.workers = opt.workers;
  run_preprocess(ws, popt, ids, opt.log);

  if (opt.log) {
    opt.log("cell " + result.hash + ": " + spec.protocol + " " + spec.combo + " s" +
            scale_token(spec.scale) + " seed " + std::to_string(spec.seed));
  }
  const models::Checkpoint ckpt = train_cell(ws, spec, protocol, opt.log);
  const models::Detector detector(ckpt);
  const auto dev = score_fold(ws, detector, protocol, dataset::Fold::Dev, spec.scale,
                              spec.frames_per_video, opt.workers);
  const auto test = score_fold(ws, detector, protocol, dataset::Fold::Test, spec.scale,
                               spec.frames_per_video, opt.workers);
  const double tau = evaluation::select_threshold(dev);
  result.metrics = evaluation::compute_metrics(test, tau);
  result.best_epoch = ckpt.curve.best_epoch;
  result.runtime_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  ensure_dir(dir);
  models::save_checkpoint((dir / "checkpoint.mckp").string(), ckpt);
  evaluation::save_scores((dir / "scores_dev.csv").string(), dev);
  evaluation::save_scores((dir / "scores_test.csv").string(), test);
  binio::write_file((dir / "metrics.json").string(),
                    evaluation::metrics_to_json(result.metrics).dump(2) + "\n");
  // cell.json last: its presence marks the cell complete.
  binio::write_file(cell_json.string(), result_to_json(result).dump(2) + "\n");
  return result;
}

}  // namespace mcpad::orchestrate
