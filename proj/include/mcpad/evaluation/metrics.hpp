#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "mcpad/evaluation/scores.hpp"

namespace mcpad::evaluation {

inline constexpr double kDefaultBpcerTarget = 0.01;
inline constexpr double kThresholdEta = 1e-9;

/// Accept iff score >= tau. With bonafide dev scores sorted ascending b(1..N)
/// and k = floor(target * N): tau = b(k + 1), or b(N) + eta when k = N.
/// At most k bonafide scores fall below tau, so dev BPCER <= target.
double select_threshold(const ScoreFile& dev, double bpcer_target = kDefaultBpcerTarget);

/// Rates are percentages. A rate whose population is empty is not applicable
/// (nullopt), and ACER then is too.
struct MetricsReport {
  double threshold = 0.0;
  std::optional<double> apcer;
  std::optional<double> bpcer;
  std::optional<double> acer;
  int bonafide = 0;
  int attacks = 0;
  std::map<std::string, double> apcer_by_attack;
  std::map<std::string, int> attacks_by_type;
};

MetricsReport compute_metrics(const ScoreFile& test, double threshold);

nlohmann::ordered_json metrics_to_json(const MetricsReport& m);
MetricsReport metrics_from_json(const nlohmann::json& j);

}  // namespace mcpad::evaluation
