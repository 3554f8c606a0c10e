#include "mcpad/evaluation/cost.hpp"

#include <cstdio>
#include <set>

#include "mcpad/common/error.hpp"

namespace mcpad::evaluation {

double SensorCostTable::cost(Modality m) const {
  if (m == Modality::Depth && depth == DepthCosting::Stereo) m = Modality::NIR;
  auto it = unit_cost.find(m);
  if (it == unit_cost.end()) {
    throw EvaluationError("no cost for modality " + std::string(preprocess::modality_token(m)));
  }
  return it->second;
}

double combo_cost(const preprocess::ChannelCombo& combo, const SensorCostTable& table) {
  const auto mods = combo.modalities();
  const std::set<Modality> distinct(mods.begin(), mods.end());
  double total = 0.0;
  for (Modality m : distinct) total += table.cost(m);
  return total;
}

double combo_cost(const std::string& combo, const SensorCostTable& table) {
  return combo_cost(preprocess::parse_combo(combo), table);
}

std::vector<CostRow> cost_report(const std::vector<std::string>& combos,
                                 const std::map<std::string, double>& acer_by_combo,
                                 const SensorCostTable& table) {
  std::vector<CostRow> rows;
  for (const auto& c : combos) {
    auto it = acer_by_combo.find(c);
    if (it == acer_by_combo.end()) throw EvaluationError("no ACER for combo " + c);
    rows.push_back({c, combo_cost(c, table), it->second});
  }
  return rows;
}

std::string cost_report_csv(const std::vector<CostRow>& rows) {
  std::string out = "combo,cost_usd,acer_pct\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), ",%.2f,%.6g\n", r.cost_usd, r.acer_pct);
    out += r.combo + buf;
  }
  return out;
}

}  // namespace mcpad::evaluation
