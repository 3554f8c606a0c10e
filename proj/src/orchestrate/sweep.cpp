#include "mcpad/orchestrate/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <mutex>
#include <thread>
#include <tuple>

#include "mcpad/common/binary_io.hpp"
#include "mcpad/common/error.hpp"
#include "mcpad/preprocess/channels.hpp"

namespace mcpad::orchestrate {

std::vector<double> standard_scales() { return {0.0125, 0.025, 0.05, 0.1, 0.2, 0.25, 0.5, 1.0}; }

SweepSpec sweep_spec_from_json(const nlohmann::json& j) {
  SweepSpec s;
  try {
    if (j.contains("protocols")) s.protocols = j.at("protocols").get<std::vector<std::string>>();
    if (j.contains("combos")) s.combos = j.at("combos").get<std::vector<std::string>>();
    if (j.contains("scales")) s.scales = j.at("scales").get<std::vector<double>>();
    if (j.contains("seeds")) s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("preset")) s.preset = j.at("preset").get<std::string>();
    if (j.contains("train")) s.train = models::train_config_from_json(j.at("train"));
    if (j.contains("frames_per_video")) s.frames_per_video = j.at("frames_per_video").get<int>();
    if (j.contains("workers")) s.workers = j.at("workers").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("$", e.what());
  }
  return s;
}

nlohmann::ordered_json sweep_spec_to_json(const SweepSpec& s) {
  nlohmann::ordered_json j;
  j["protocols"] = s.protocols;
  j["combos"] = s.combos;
  j["scales"] = s.scales;
  j["seeds"] = s.seeds;
  j["preset"] = s.preset;
  j["train"] = models::train_config_to_json(s.train);
  j["frames_per_video"] = s.frames_per_video;
  j["workers"] = s.workers;
  return j;
}

void validate_sweep(const SweepSpec& spec) {
  if (spec.protocols.empty() || spec.combos.empty() || spec.scales.empty() || spec.seeds.empty()) {
    throw Error("sweep axes must be non-empty");
  }
  for (const auto& c : spec.combos) preprocess::parse_combo(c);
  for (double s : spec.scales) {
    if (!(s > 0.0 && s <= 1.0)) throw Error("scale factors must lie in (0, 1]");
  }
  models::preset_config(spec.preset, 3);
}

namespace {

std::string opt_num(const std::optional<double>& v) {
  if (!v) return "NA";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}

}  // namespace

std::string results_csv(const std::vector<SweepRow>& rows) {
  std::string out = "protocol,combo,scale,seed,acer_pct,apcer_pct,bpcer_pct,threshold,runtime_s,cell_hash\n";
  char buf[64];
  for (const auto& r : rows) {
    out += r.protocol + "," + r.combo + "," + scale_token(r.scale) + "," + std::to_string(r.seed) +
           "," + opt_num(r.acer) + "," + opt_num(r.apcer) + "," + opt_num(r.bpcer) + ",";
    std::snprintf(buf, sizeof(buf), "%.9g,%.3f,", r.threshold, r.runtime_s);
    out += buf + r.cell_hash + "\n";
  }
  return out;
}

std::vector<SweepRow> run_sweep(const Workspace& ws, const SweepSpec& spec, const RunOptions& opt) {
  validate_sweep(spec);
  std::vector<CellSpec> cells;
  for (const auto& p : spec.protocols) {
    for (const auto& c : spec.combos) {
      for (double s : spec.scales) {
        for (auto seed : spec.seeds) {
          CellSpec cs;
          cs.protocol = p;
          cs.combo = c;
          cs.scale = s;
          cs.seed = seed;
          cs.preset = spec.preset;
          cs.train = spec.train;
          cs.frames_per_video = spec.frames_per_video;
          cells.push_back(cs);
        }
      }
    }
  }
  std::sort(cells.begin(), cells.end(), [](const CellSpec& a, const CellSpec& b) {
    return std::tie(a.protocol, a.combo, a.scale, a.seed) < std::tie(b.protocol, b.combo, b.scale, b.seed);
  });
  cells.erase(std::unique(cells.begin(), cells.end(),
                          [](const CellSpec& a, const CellSpec& b) {
                            return std::tie(a.protocol, a.combo, a.scale, a.seed) ==
                                   std::tie(b.protocol, b.combo, b.scale, b.seed);
                          }),
              cells.end());

  std::vector<SweepRow> rows(cells.size());
  std::mutex log_mu;
  RunOptions cell_opt = opt;
  if (opt.log) {
    cell_opt.log = [&](const std::string& line) {
      std::lock_guard<std::mutex> lock(log_mu);
      opt.log(line);
    };
  }
  // Cells in parallel share the preprocessing step; give each one thread for it.
  if (spec.workers > 1) cell_opt.workers = 1;

  auto run_one = [&](std::size_t i) {
    const CellResult r = run_cell(ws, cells[i], cell_opt);
    SweepRow& row = rows[i];
    row.protocol = cells[i].protocol;
    row.combo = cells[i].combo;
    row.scale = cells[i].scale;
    row.seed = cells[i].seed;
    row.acer = r.metrics.acer;
    row.apcer = r.metrics.apcer;
    row.bpcer = r.metrics.bpcer;
    row.threshold = r.metrics.threshold;
    row.runtime_s = r.runtime_s;
    row.cell_hash = r.hash;
    row.reused = r.reused;
  };

  const std::size_t workers = static_cast<std::size_t>(std::max(1, spec.workers));
  if (workers == 1 || cells.size() <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_one(i);
  } else {
    // Preprocess each (scale) up front so concurrent cells never write the same cube.
    for (double s : spec.scales) {
      PreprocessOptions popt;
      popt.scale = s;
      popt.frames_per_video = spec.frames_per_video;
      popt.workers = static_cast<int>(workers);
      run_preprocess(ws, popt, {}, cell_opt.log);
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(workers, cells.size()); ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
          try {
            run_one(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mu);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  binio::write_file(ws.results_path().string(), results_csv(rows));
  return rows;
}

}  // namespace mcpad::orchestrate
