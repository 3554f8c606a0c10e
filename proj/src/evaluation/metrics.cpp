#include "mcpad/evaluation/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "mcpad/common/error.hpp"

namespace mcpad::evaluation {

double select_threshold(const ScoreFile& dev, double bpcer_target) {
  if (!(bpcer_target >= 0.0 && bpcer_target <= 1.0)) {
    throw EvaluationError("BPCER target must lie in [0, 1]");
  }
  std::vector<double> b;
  for (const auto& r : dev.rows) {
    if (r.is_bonafide()) b.push_back(r.score);
  }
  if (b.empty()) throw EvaluationError("threshold selection needs bonafide dev scores");
  std::sort(b.begin(), b.end());
  const std::size_t n = b.size();
  // Guard floor() against representation error (0.01 * 300 = 3.0000000000000004).
  auto k = static_cast<std::size_t>(std::floor(bpcer_target * static_cast<double>(n) + 1e-9));
  while (k > 0 && static_cast<double>(k) > bpcer_target * static_cast<double>(n) + 1e-9) --k;
  k = std::min(k, n);
  if (k + 1 > n) return b[n - 1] + kThresholdEta;
  return b[k];
}

MetricsReport compute_metrics(const ScoreFile& test, double threshold) {
  MetricsReport m;
  m.threshold = threshold;
  int rejected_bf = 0;
  int accepted_pa = 0;
  std::map<std::string, int> accepted_by;
  for (const auto& r : test.rows) {
    const bool accepted = r.score >= threshold;
    if (r.is_bonafide()) {
      ++m.bonafide;
      if (!accepted) ++rejected_bf;
    } else {
      const std::string name(r.attack_type ? dataset::attack_type_name(*r.attack_type) : "unknown");
      ++m.attacks;
      ++m.attacks_by_type[name];
      accepted_by[name];
      if (accepted) {
        ++accepted_pa;
        ++accepted_by[name];
      }
    }
  }
  if (m.bonafide == 0 && m.attacks == 0) throw EvaluationError("empty score file");
  if (m.attacks > 0) m.apcer = 100.0 * accepted_pa / m.attacks;
  if (m.bonafide > 0) m.bpcer = 100.0 * rejected_bf / m.bonafide;
  if (m.apcer && m.bpcer) m.acer = (*m.apcer + *m.bpcer) / 2.0;
  for (const auto& [name, n] : m.attacks_by_type) {
    m.apcer_by_attack[name] = 100.0 * accepted_by[name] / n;
  }
  return m;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> get_opt(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

nlohmann::ordered_json metrics_to_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["threshold"] = m.threshold;
  j["apcer_pct"] = opt(m.apcer);
  j["bpcer_pct"] = opt(m.bpcer);
  j["acer_pct"] = opt(m.acer);
  j["bonafide"] = m.bonafide;
  j["attacks"] = m.attacks;
  j["apcer_by_attack_pct"] = m.apcer_by_attack;
  j["attacks_by_type"] = m.attacks_by_type;
  return j;
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport m;
  try {
    m.threshold = j.at("threshold").get<double>();
    m.apcer = get_opt(j, "apcer_pct");
    m.bpcer = get_opt(j, "bpcer_pct");
    m.acer = get_opt(j, "acer_pct");
    m.bonafide = j.at("bonafide").get<int>();
    m.attacks = j.at("attacks").get<int>();
    m.apcer_by_attack = j.at("apcer_by_attack_pct").get<std::map<std::string, double>>();
    m.attacks_by_type = j.at("attacks_by_type").get<std::map<std::string, int>>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("$", e.what());
  }
  return m;
}

}  // namespace mcpad::evaluation
