#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "../support/scratch.hpp"
#include "mcpad/common/error.hpp"
#include "mcpad/dataset/frames.hpp"
#include "mcpad/dataset/synth.hpp"
#include "mcpad/models/checkpoint.hpp"
#include "mcpad/orchestrate/embeddings.hpp"
#include "mcpad/orchestrate/inspector.hpp"
#include "mcpad/orchestrate/overlay.hpp"
#include "mcpad/orchestrate/runner.hpp"
#include "mcpad/orchestrate/sweep.hpp"
#include "mcpad/orchestrate/workspace.hpp"
#include "mcpad/preprocess/cube.hpp"

// Last: <resolv.h> via httplib defines macros that collide with Eigen.
#include <httplib.h>

using namespace mcpad;
using namespace mcpad::orchestrate;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// A small synthetic workspace shared by the tests in this file.
class OrchestrateTest : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    root_ = scratch::path("mcpad_orchestrate_ws");
    fs::remove_all(root_);
    dataset::SynthConfig cfg = dataset::default_synth_config();
    cfg.counts = {{"bonafide", 8}, {"Print", 4}, {"Rigidmask", 4}};
    cfg.subjects = 4;
    cfg.frames = 1;
    cfg.width = cfg.height = 128;
    dataset::synth_generate(cfg, root_.string());
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static SweepSpec quick_sweep() {
    SweepSpec s;
    s.combos = {"RGB"};
    s.train.epochs = 1;
    s.train.batch_size = 4;
    s.frames_per_video = 1;
    return s;
  }

  static fs::path root_;
};
fs::path OrchestrateTest::root_;

}  // namespace

TEST(WorkspaceNames, ScaleTokensAndFrameIds) {
  EXPECT_EQ(scale_token(1.0), "1");
  EXPECT_EQ(scale_token(0.5), "0.5");
  EXPECT_EQ(scale_token(0.0125), "0.0125");
  EXPECT_EQ(make_frame_id("video_00001", 3), "video_00001-f003");
  const auto parsed = parse_frame_id("a-f-b-f012");
  ASSERT_TRUE(parsed);
  EXPECT_EQ(parsed->first, "a-f-b");
  EXPECT_EQ(parsed->second, 12);
  EXPECT_FALSE(parse_frame_id("nothing"));
  EXPECT_EQ(standard_scales().size(), 8u);
}

TEST(Overlay, DeltasBoundedAndComposed) {
  EXPECT_THROW(validate_deltas({6, 0, 0, 0, 0, 0}), Error);
  EXPECT_THROW(validate_deltas({0, 0, 0, 0, 0, -51}), Error);
  EXPECT_NO_THROW(validate_deltas({5, -5, 5, 50, -50, 50}));
  const auto rig = dataset::synth_rig(64, 64);
  const auto same = apply_deltas(rig, "swir", {});
  EXPECT_EQ(geometry::rig_hash(same), geometry::rig_hash(rig));
  const auto moved = apply_deltas(rig, "swir", {0, 0, 0, 10, 0, 0});
  EXPECT_NEAR(moved.at("swir").extrinsics.translation.x(), 0.01, 1e-15);
  const auto turned = apply_deltas(rig, "swir", {0, 0, 90.0 / 18.0, 0, 0, 0});
  EXPECT_NEAR(geometry::rotation_angle(turned.at("swir").extrinsics.rotation), 5.0 * M_PI / 180.0, 1e-12);
  EXPECT_THROW(apply_deltas(rig, "nope", {}), Error);
}

TEST(Overlay, DisplayStretch) {
  cv::Mat m(1, 3, CV_16UC1);
  m.at<std::uint16_t>(0, 0) = 100;
  m.at<std::uint16_t>(0, 1) = 150;
  m.at<std::uint16_t>(0, 2) = 200;
  const cv::Mat d = to_display(m, 100, 200);
  EXPECT_EQ(d.at<std::uint8_t>(0, 0), 0);
  EXPECT_EQ(d.at<std::uint8_t>(0, 1), 128);
  EXPECT_EQ(d.at<std::uint8_t>(0, 2), 255);
}

TEST_F(OrchestrateTest, SweepRunsOnceThenResumes) {
  const Workspace ws(root_);
  const SweepSpec spec = quick_sweep();
  const auto rows = run_sweep(ws, spec);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_FALSE(rows[0].reused);
  const std::string csv = slurp(ws.results_path());
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "protocol,combo,scale,seed,acer_pct,apcer_pct,bpcer_pct,threshold,runtime_s,cell_hash");
  const fs::path run = ws.run_dir(rows[0].cell_hash);
  for (const char* f : {"checkpoint.mckp", "scores_dev.csv", "scores_test.csv", "metrics.json", "cell.json"}) {
    EXPECT_TRUE(fs::exists(run / f)) << f;
  }
  const auto ckpt_time = fs::last_write_time(run / "checkpoint.mckp");

  const auto again = run_sweep(ws, spec);
  ASSERT_EQ(again.size(), 1u);
  EXPECT_TRUE(again[0].reused);
  EXPECT_EQ(fs::last_write_time(run / "checkpoint.mckp"), ckpt_time);
  EXPECT_EQ(slurp(ws.results_path()), csv);
}

TEST_F(OrchestrateTest, ForcedRerunReproducesMetrics) {
  const Workspace ws(root_);
  CellSpec cell;
  cell.combo = "RGB-SWIR";
  cell.train.epochs = 1;
  cell.train.batch_size = 4;
  cell.frames_per_video = 1;
  const CellResult a = run_cell(ws, cell);
  RunOptions force;
  force.force = true;
  const CellResult b = run_cell(ws, cell, force);
  EXPECT_FALSE(b.reused);
  EXPECT_EQ(a.hash, b.hash);
  EXPECT_EQ(a.metrics.acer, b.metrics.acer);
  EXPECT_EQ(a.metrics.threshold, b.metrics.threshold);
  CellSpec other = cell;
  other.seed = 1;
  EXPECT_NE(cell_hash(other, ws.protocol("grandtest-c")), a.hash);
  const auto back = cell_spec_from_json(cell_spec_to_json(cell));
  EXPECT_EQ(cell_spec_to_json(back).dump(), cell_spec_to_json(cell).dump());
}

TEST_F(OrchestrateTest, BadComboFailsBeforeTraining) {
  const Workspace ws(scratch::path("mcpad_never_created"));
  SweepSpec spec = quick_sweep();
  spec.combos = {"RGB", "RGB-XRAY"};
  EXPECT_THROW(run_sweep(ws, spec), Error);
  EXPECT_FALSE(fs::exists(ws.root() / "runs"));
  spec.combos.clear();
  EXPECT_THROW(validate_sweep(spec), Error);
}

TEST_F(OrchestrateTest, EmbeddingsExportRoundTrip) {
  const Workspace ws(root_);
  CellSpec cell;
  cell.train.epochs = 0;
  cell.frames_per_video = 1;
  const auto protocol = ws.protocol("grandtest-c");
  PreprocessOptions pre;
  pre.frames_per_video = 1;
  run_preprocess(ws, pre);
  const models::Checkpoint ckpt = train_cell(ws, cell, protocol);
  const fs::path out = root_ / "emb_dev.csv";
  const auto table = export_embeddings(ws, ckpt, protocol, dataset::Fold::Dev, 1.0, out.string(), 1);
  EXPECT_EQ(table.meta.size(), protocol.fold(dataset::Fold::Dev).size());
  EXPECT_EQ(table.dim(), ckpt.model.feature_channels());
  const auto back = evaluation::load_embeddings(out.string());
  EXPECT_EQ(back.features, table.features);
  EXPECT_THROW(export_embeddings(ws, ckpt, protocol, dataset::Fold::Dev, 0.5, out.string(), 1), IoError);
}

namespace {

nlohmann::json overlay_body(const std::string& frame, double tx) {
  return {{"frame_id", frame},
          {"ref_channel", "NIR_850nm"},
          {"target_channel", "SWIR_1450nm"},
          {"deltas", {{"rx", 0}, {"ry", 0}, {"rz", 0}, {"tx", tx}, {"ty", 0}, {"tz", 0}}},
          {"blend", 0.5}};
}

}  // namespace

TEST_F(OrchestrateTest, InspectorEndpoints) {
  const Workspace ws(root_);
  const auto original_rig = ws.rig();
  InspectorServer server(ws);
  const int port = server.start();
  httplib::Client cli("127.0.0.1", port);

  auto cal = cli.Get("/api/calibration");
  ASSERT_TRUE(cal);
  EXPECT_EQ(cal->status, 200);
  EXPECT_EQ(geometry::rig_hash(geometry::rig_from_json(nlohmann::json::parse(cal->body))),
            geometry::rig_hash(original_rig));

  auto frames = cli.Get("/api/frames");
  ASSERT_TRUE(frames);
  const auto ids = nlohmann::json::parse(frames->body).at("frames");
  ASSERT_EQ(ids.size(), ws.manifest().size());
  const std::string frame = ids[0].get<std::string>();

  auto png = cli.Get("/api/frame/" + frame + "/channel/T");
  ASSERT_TRUE(png);
  EXPECT_EQ(png->status, 200);
  EXPECT_EQ(png->body.substr(1, 3), "PNG");
  EXPECT_EQ(cli.Get("/api/frame/" + frame + "/channel/UV")->status, 404);
  EXPECT_EQ(cli.Get("/api/frame/nosuch-f000/channel/T")->status, 404);

  // Zero deltas reproduce the baseline composite built directly from the files.
  const auto rec = ws.manifest()[0];
  preprocess::RawFrame raw;
  raw.landmarks = rec.landmarks[0];
  for (const char* c : {"D", "NIR_850nm", "SWIR_1450nm"}) {
    raw.planes[c] = dataset::read_plane(root_.string(), rec.sample_id, 0, c);
  }
  const auto expected = encode_png(render_overlay(raw, original_rig, "NIR_850nm", "SWIR_1450nm", 0.5));
  auto base = cli.Post("/api/overlay", overlay_body(frame, 0).dump(), "application/json");
  ASSERT_TRUE(base);
  ASSERT_EQ(base->status, 200);
  EXPECT_EQ(base->body, std::string(expected.begin(), expected.end()));

  // Slider out and back: the final image equals the initial one.
  auto moved = cli.Post("/api/overlay", overlay_body(frame, 10).dump(), "application/json");
  ASSERT_EQ(moved->status, 200);
  EXPECT_NE(moved->body, base->body);
  auto back = cli.Post("/api/overlay", overlay_body(frame, 0).dump(), "application/json");
  EXPECT_EQ(back->body, base->body);
  EXPECT_EQ(cli.Post("/api/overlay", overlay_body(frame, 80).dump(), "application/json")->status, 400);
  EXPECT_EQ(cli.Post("/api/overlay", "{not json", "application/json")->status, 400);

  // Reads never touch the stored calibration.
  EXPECT_EQ(geometry::rig_hash(ws.rig()), geometry::rig_hash(original_rig));

  // Accept +10 mm on the SWIR camera, read it back, and check preprocessing uses it.
  const auto shifted = apply_deltas(original_rig, "swir", {0, 0, 0, 10, 0, 0});
  auto accepted = cli.Post("/api/calibration/accept", geometry::rig_to_json(shifted).dump(), "application/json");
  ASSERT_TRUE(accepted);
  ASSERT_EQ(accepted->status, 200);
  const std::string new_hash = geometry::rig_hash(shifted);
  EXPECT_EQ(nlohmann::json::parse(accepted->body).at("rig_hash"), new_hash);
  const auto readback = geometry::rig_from_json(nlohmann::json::parse(cli.Get("/api/calibration")->body));
  EXPECT_NEAR(readback.at("swir").extrinsics.translation.x(),
              original_rig.at("swir").extrinsics.translation.x() + 0.01, 1e-12);
  EXPECT_EQ(cli.Post("/api/calibration/accept", "{\"reference_id\": 3}", "application/json")->status, 400);

  server.stop();

  PreprocessOptions pre;
  pre.frames_per_video = 1;
  const auto summary = run_preprocess(ws, pre, {rec.sample_id});
  EXPECT_EQ(summary.written, 1);
  const auto cube = preprocess::read_cube(ws.cube_path(1.0, rec.sample_id, 0).string());
  EXPECT_EQ(cube.provenance.rig_hash, new_hash);

  ws.save_rig(original_rig);
}

TEST_F(OrchestrateTest, BusyPortRejected) {
  const Workspace ws(root_);
  InspectorServer first(ws);
  const int port = first.start();
  InspectorServer second(ws);
  EXPECT_THROW(second.start("127.0.0.1", port), IoError);
  first.stop();
}
