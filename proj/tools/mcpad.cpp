// Command-line front end for the multi-channel PAD framework.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include "mcpad/common/binary_io.hpp"
#include "mcpad/common/error.hpp"
#include "mcpad/dataset/fixture.hpp"
#include "mcpad/dataset/synth.hpp"
#include "mcpad/evaluation/cost.hpp"
#include "mcpad/evaluation/fusion.hpp"
#include "mcpad/evaluation/metrics.hpp"
#include "mcpad/models/checkpoint.hpp"
#include "mcpad/models/complexity.hpp"
#include "mcpad/orchestrate/embeddings.hpp"
#include "mcpad/orchestrate/inspector.hpp"
#include "mcpad/orchestrate/runner.hpp"
#include "mcpad/orchestrate/sweep.hpp"

using namespace mcpad;
namespace orc = mcpad::orchestrate;

namespace {

void log_line(const std::string& s) { std::cerr << s << '\n'; }

dataset::Fold fold_arg(const std::string& name) {
  const auto f = dataset::parse_fold(name);
  if (!f) throw Error("unknown fold '" + name + "' (train, dev, test)");
  return *f;
}

std::string fmt_rate(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f%%", *v);
  return buf;
}

void print_metrics(const evaluation::MetricsReport& m) {
  std::printf("threshold %.9g  APCER %s  BPCER %s  ACER %s  (%d bonafide, %d attacks)\n",
              m.threshold, fmt_rate(m.apcer).c_str(), fmt_rate(m.bpcer).c_str(),
              fmt_rate(m.acer).c_str(), m.bonafide, m.attacks);
  for (const auto& [name, v] : m.apcer_by_attack) {
    std::printf("  APCER %-13s %6.2f%%  (n=%d)\n", name.c_str(), v, m.attacks_by_type.at(name));
  }
}

struct TrainOpts {
  int epochs = -1;
  double lr = -1.0;
  int batch = -1;
  double weight_decay = -1.0;

  void add(CLI::App* cmd) {
    cmd->add_option("--epochs", epochs, "Training epochs");
    cmd->add_option("--lr", lr, "Learning rate");
    cmd->add_option("--batch", batch, "Batch size");
    cmd->add_option("--weight-decay", weight_decay, "L2 weight decay");
  }
  void apply(models::TrainConfig& t) const {
    if (epochs >= 0) t.epochs = epochs;
    if (lr > 0) t.learning_rate = lr;
    if (batch > 0) t.batch_size = batch;
    if (weight_decay >= 0) t.weight_decay = weight_decay;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-channel face presentation attack detection toolkit"};
  app.require_subcommand(1);

  std::string workspace = ".";
  std::string protocol = "grandtest-c";
  std::string combo = "RGB";
  double scale = 1.0;
  std::uint64_t seed = 0;
  std::string preset = "desk-scale";
  int port = 8080;
  int workers = 1;
  int frames_per_video = 10;
  bool force = false;
  TrainOpts topts;

  auto add_ws = [&](CLI::App* c) { c->add_option("-w,--workspace", workspace, "Workspace directory"); };

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-channel dataset");
  add_ws(synth);
  int bonafide = -1, per_attack = -1, subjects = -1, frames = -1, size = -1;
  synth->add_option("--seed", seed, "Generator seed");
  synth->add_option("--bonafide", bonafide, "Bonafide videos");
  synth->add_option("--per-attack", per_attack, "Videos per attack type");
  synth->add_option("--subjects", subjects, "Number of subjects");
  synth->add_option("--frames", frames, "Frames per video");
  synth->add_option("--size", size, "Frame width and height");

  // fixture
  auto* fixture = app.add_subcommand("fixture", "Write the metadata-only protocol fixture");
  std::string fixture_dir = "fixtures";
  fixture->add_option("--out", fixture_dir, "Output directory");

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "Register, align and normalize frames into cubes");
  add_ws(prep);
  prep->add_option("--scale", scale, "Resolution scale factor");
  prep->add_option("--frames-per-video", frames_per_video, "Frames sampled per video");
  prep->add_option("--workers", workers, "Worker threads");
  prep->add_flag("--force", force, "Rebuild existing cubes");

  // protocol
  auto* proto = app.add_subcommand("protocol", "Build, validate and save a protocol");
  add_ws(proto);
  proto->add_option("-p,--protocol", protocol, "grandtest-c | impersonation-c | obfuscation-c | LOO_<Attack>");
  std::string proto_out;
  proto->add_option("--out", proto_out, "Output JSON (default: workspace protocols/)");

  // train
  auto* train = app.add_subcommand("train", "Train a detector on one protocol and combo");
  add_ws(train);
  train->add_option("-p,--protocol", protocol);
  train->add_option("-c,--combo", combo, "Channel combination, e.g. RGB-SWIR");
  train->add_option("--scale", scale);
  train->add_option("--seed", seed);
  train->add_option("--preset", preset, "desk-scale | paper-scale");
  train->add_option("--frames-per-video", frames_per_video);
  std::string ckpt_path = "checkpoint.mckp";
  train->add_option("-o,--out", ckpt_path, "Checkpoint path");
  topts.add(train);

  // score
  auto* score = app.add_subcommand("score", "Score a protocol fold with a checkpoint");
  add_ws(score);
  score->add_option("--checkpoint", ckpt_path)->required();
  score->add_option("-p,--protocol", protocol);
  std::string fold = "test";
  score->add_option("--fold", fold);
  score->add_option("--scale", scale);
  score->add_option("--frames-per-video", frames_per_video);
  score->add_option("--workers", workers);
  std::string out_path;
  score->add_option("-o,--out", out_path, "Score CSV")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Metrics at the dev-selected threshold");
  std::string dev_csv, test_csv;
  double target = evaluation::kDefaultBpcerTarget;
  eval->add_option("--dev", dev_csv, "Dev score CSV")->required();
  eval->add_option("--test", test_csv, "Test score CSV")->required();
  eval->add_option("--bpcer-target", target, "Dev BPCER target (fraction)");
  eval->add_option("-o,--out", out_path, "Metrics JSON");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a protocol x combo x scale x seed sweep");
  add_ws(sweep);
  std::string spec_path;
  std::vector<std::string> protocols, combos;
  std::vector<double> scales;
  std::vector<std::uint64_t> seeds;
  sweep->add_option("--spec", spec_path, "Sweep spec JSON");
  sweep->add_option("-p,--protocol", protocols, "Protocols")->delimiter(',');
  sweep->add_option("-c,--combo", combos, "Channel combos")->delimiter(',');
  sweep->add_option("--scale", scales, "Scale factors")->delimiter(',');
  sweep->add_option("--seed", seeds, "Seeds")->delimiter(',');
  sweep->add_option("--preset", preset);
  sweep->add_option("--frames-per-video", frames_per_video);
  sweep->add_option("--workers", workers, "Concurrent cells");
  sweep->add_flag("--force", force, "Recompute completed cells");
  topts.add(sweep);

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Score-level or feature-level fusion");
  std::string method = "Mean";
  std::vector<std::string> dev_files, test_files;
  fuse->add_option("--method", method, "Mean | LLR | MLP | GMM | SVM (embeddings)");
  fuse->add_option("--dev", dev_files, "Per-system dev files")->delimiter(',')->required();
  fuse->add_option("--test", test_files, "Per-system test files")->delimiter(',')->required();
  std::string fused_dev_out;
  fuse->add_option("-o,--out", out_path, "Fused test score CSV")->required();
  fuse->add_option("--dev-out", fused_dev_out, "Fused dev score CSV");

  // cost
  auto* cost = app.add_subcommand("cost", "Hardware cost versus ACER");
  std::string results_path;
  std::vector<double> acers;
  cost->add_option("-c,--combo", combos, "Combos")->delimiter(',');
  cost->add_option("--acer", acers, "ACER per combo (percent)")->delimiter(',');
  cost->add_option("--results", results_path, "results.csv: average ACER per combo");
  cost->add_option("-o,--out", out_path, "Cost CSV");

  // export-embeddings
  auto* emb = app.add_subcommand("export-embeddings", "Export per-sample embeddings as CSV");
  add_ws(emb);
  emb->add_option("--checkpoint", ckpt_path)->required();
  emb->add_option("-p,--protocol", protocol);
  emb->add_option("--fold", fold);
  emb->add_option("--scale", scale);
  emb->add_option("--frames-per-video", frames_per_video);
  emb->add_option("-o,--out", out_path)->required();

  // complexity
  auto* cx = app.add_subcommand("complexity", "Parameter and MAC counts of a model preset");
  cx->add_option("--preset", preset);
  cx->add_option("-c,--combo", combo);

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the calibration inspector API");
  add_ws(serve);
  std::string host = "127.0.0.1";
  serve->add_option("--host", host);
  serve->add_option("--port", port);

  CLI11_PARSE(app, argc, argv);

  try {
    const orc::Workspace ws(workspace);

    if (*synth) {
      auto cfg = dataset::default_synth_config();
      cfg.seed = seed == 0 ? cfg.seed : seed;
      if (bonafide >= 0) cfg.counts["bonafide"] = bonafide;
      if (per_attack >= 0) {
        for (auto t : dataset::kAllAttackTypes) cfg.counts[std::string(dataset::attack_type_name(t))] = per_attack;
      }
      if (subjects > 0) cfg.subjects = subjects;
      if (frames > 0) cfg.frames = frames;
      if (size > 0) cfg.width = cfg.height = size;
      const auto ds = dataset::synth_generate(cfg, workspace);
      std::printf("wrote %zu samples to %s\n", ds.records.size(), workspace.c_str());
    } else if (*fixture) {
      dataset::write_protocol_fixture(fixture_dir);
      std::printf("wrote %s/manifest.json and folds.json\n", fixture_dir.c_str());
    } else if (*prep) {
      orc::PreprocessOptions opt;
      opt.scale = scale;
      opt.frames_per_video = frames_per_video;
      opt.force = force;
      opt.workers = workers;
      orc::run_preprocess(ws, opt, {}, log_line);
    } else if (*proto) {
      const auto manifest = ws.manifest();
      const auto p = protocols::build_named_protocol(manifest, ws.folds(), protocol);
      const auto stats = protocols::protocol_stats(p, manifest);
      for (auto f : dataset::kAllFolds) {
        const auto& s = stats[static_cast<std::size_t>(f)];
        std::printf("%-5s bonafide %4d  attacks %4d\n", std::string(dataset::fold_name(f)).c_str(),
                    s.bonafide, s.attacks);
      }
      const auto violations = protocols::validate_protocol(p, manifest);
      for (const auto& v : violations) {
        std::printf("violation %s: %s\n", std::string(protocols::violation_name(v.kind)).c_str(),
                    v.detail.c_str());
      }
      const std::string out = proto_out.empty() ? ws.protocol_path(protocol).string() : proto_out;
      orc::ensure_dir(orc::fs::path(out).parent_path());
      protocols::save_protocol(out, p);
      std::printf("saved %s\n", out.c_str());
      return violations.empty() ? 0 : 2;
    } else if (*train) {
      orc::CellSpec spec;
      spec.protocol = protocol;
      spec.combo = combo;
      spec.scale = scale;
      spec.seed = seed;
      spec.preset = preset;
      spec.frames_per_video = frames_per_video;
      topts.apply(spec.train);
      const auto p = ws.protocol(protocol);
      const auto ckpt = orc::train_cell(ws, spec, p, log_line);
      models::save_checkpoint(ckpt_path, ckpt);
      std::printf("best epoch %d; saved %s\n", ckpt.curve.best_epoch, ckpt_path.c_str());
    } else if (*score) {
      const models::Detector det(models::load_checkpoint(ckpt_path));
      const auto sf = orc::score_fold(ws, det, ws.protocol(protocol), fold_arg(fold), scale,
                                      frames_per_video, workers);
      evaluation::save_scores(out_path, sf);
      std::printf("scored %zu samples -> %s\n", sf.rows.size(), out_path.c_str());
    } else if (*eval) {
      const auto dev = evaluation::load_scores(dev_csv, "dev");
      const auto test = evaluation::load_scores(test_csv, "test");
      const auto m = evaluation::compute_metrics(test, evaluation::select_threshold(dev, target));
      print_metrics(m);
      if (!out_path.empty()) binio::write_file(out_path, evaluation::metrics_to_json(m).dump(2) + "\n");
    } else if (*sweep) {
      orc::SweepSpec spec;
      if (!spec_path.empty()) spec = orc::sweep_spec_from_json(nlohmann::json::parse(binio::read_file(spec_path)));
      if (!protocols.empty()) spec.protocols = protocols;
      if (!combos.empty()) spec.combos = combos;
      if (!scales.empty()) spec.scales = scales;
      if (!seeds.empty()) spec.seeds = seeds;
      if (sweep->count("--preset")) spec.preset = preset;
      if (sweep->count("--frames-per-video")) spec.frames_per_video = frames_per_video;
      if (sweep->count("--workers")) spec.workers = workers;
      topts.apply(spec.train);
      orc::RunOptions ro;
      ro.force = force;
      ro.log = log_line;
      const auto rows = orc::run_sweep(ws, spec, ro);
      std::fputs(orc::results_csv(rows).c_str(), stdout);
    } else if (*fuse) {
      evaluation::FusedScores fused;
      if (method == "SVM") {
        std::vector<evaluation::EmbeddingTable> d, t;
        for (const auto& f : dev_files) d.push_back(evaluation::load_embeddings(f));
        for (const auto& f : test_files) t.push_back(evaluation::load_embeddings(f));
        fused = evaluation::fuse_features(d, t);
      } else {
        std::vector<evaluation::ScoreFile> d, t;
        for (const auto& f : dev_files) d.push_back(evaluation::load_scores(f, "dev"));
        for (const auto& f : test_files) t.push_back(evaluation::load_scores(f, "test"));
        fused = evaluation::fuse_scores_with_dev(evaluation::parse_fusion_method(method), d, t);
      }
      evaluation::save_scores(out_path, fused.test);
      if (!fused_dev_out.empty()) evaluation::save_scores(fused_dev_out, fused.dev);
      print_metrics(evaluation::compute_metrics(fused.test, evaluation::select_threshold(fused.dev)));
    } else if (*cost) {
      std::map<std::string, double> acer_by;
      std::vector<std::string> order = combos;
      if (!results_path.empty()) {
        // Average ACER per combo over every row of a sweep results file.
        std::istringstream in(binio::read_file(results_path));
        std::string line;
        std::getline(in, line);
        std::map<std::string, std::pair<double, int>> acc;
        while (std::getline(in, line)) {
          std::vector<std::string> f;
          std::stringstream ls(line);
          for (std::string tok; std::getline(ls, tok, ',');) f.push_back(tok);
          if (f.size() < 5 || f[4] == "NA") continue;
          auto& a = acc[f[1]];
          a.first += std::stod(f[4]);
          a.second += 1;
          if (std::find(order.begin(), order.end(), f[1]) == order.end() && combos.empty()) {
            order.push_back(f[1]);
          }
        }
        for (const auto& [c, a] : acc) acer_by[c] = a.first / a.second;
      } else {
        if (acers.size() != combos.size()) throw Error("--acer needs one value per --combo");
        for (std::size_t i = 0; i < combos.size(); ++i) acer_by[combos[i]] = acers[i];
      }
      const auto csv = evaluation::cost_report_csv(evaluation::cost_report(order, acer_by));
      if (!out_path.empty()) binio::write_file(out_path, csv);
      std::fputs(csv.c_str(), stdout);
    } else if (*emb) {
      const auto t = orc::export_embeddings(ws, models::load_checkpoint(ckpt_path), ws.protocol(protocol),
                                            fold_arg(fold), scale, out_path, frames_per_video);
      std::printf("exported %zu x %d -> %s\n", t.meta.size(), t.dim(), out_path.c_str());
    } else if (*cx) {
      const auto c = preprocess::parse_combo(combo);
      const auto r = models::model_complexity_report(models::preset_config(preset, c.size()));
      std::printf("%s, %s (%d channels): %lld parameters, %.3f GMACs\n", preset.c_str(), combo.c_str(),
                  c.size(), static_cast<long long>(r.parameters), r.macs / 1e9);
    } else if (*serve) {
      orc::InspectorServer server(ws);
      const int bound = server.start(host, port);
      std::fprintf(stderr, "inspector listening on http://%s:%d/api/\n", host.c_str(), bound);
      server.wait();
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
