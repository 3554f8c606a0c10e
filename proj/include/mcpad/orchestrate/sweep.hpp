#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mcpad/orchestrate/runner.hpp"

namespace mcpad::orchestrate {

struct SweepSpec {
  std::vector<std::string> protocols{"grandtest-c"};
  std::vector<std::string> combos{"RGB"};
  std::vector<double> scales{1.0};
  std::vector<std::uint64_t> seeds{0};
  std::string preset = "desk-scale";
  models::TrainConfig train;
  int frames_per_video = 10;
  int workers = 1;  ///< cells run concurrently
};

/// The resolution axis used for the scaling study.
std::vector<double> standard_scales();

SweepSpec sweep_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json sweep_spec_to_json(const SweepSpec& s);

/// Throws (before any training) on empty axes or unparseable combos.
void validate_sweep(const SweepSpec& spec);

struct SweepRow {
  std::string protocol;
  std::string combo;
  double scale = 1.0;
  std::uint64_t seed = 0;
  std::optional<double> acer;
  std::optional<double> apcer;
  std::optional<double> bpcer;
  double threshold = 0.0;
  double runtime_s = 0.0;
  std::string cell_hash;
  bool reused = false;
};

/// One cell per (protocol, combo, scale, seed); completed cells are reused.
/// Writes results.csv sorted by (protocol, combo, scale, seed) and returns
/// the rows in that order.
std::vector<SweepRow> run_sweep(const Workspace& ws, const SweepSpec& spec,
                                const RunOptions& opt = {});

std::string results_csv(const std::vector<SweepRow>& rows);

}  // namespace mcpad::orchestrate
