#pragma once

#include <map>
#include <string>
#include <vector>

#include "mcpad/preprocess/channels.hpp"

namespace mcpad::evaluation {

using preprocess::Modality;

enum class DepthCosting {
  Stereo,       ///< depth from the NIR pair: one extra NIR camera
  DepthSensor,  ///< a dedicated depth unit
};

/// Approximate unit cost in USD per modality.
struct SensorCostTable {
  std::map<Modality, double> unit_cost{
      {Modality::RGB, 1300.0},    {Modality::NIR, 1250.0},  {Modality::SWIR, 31500.0},
      {Modality::Thermal, 10500.0}, {Modality::Depth, 150.0},
  };
  DepthCosting depth = DepthCosting::Stereo;

  double cost(Modality m) const;
};

/// Sum of unit costs over the distinct modalities of the combo.
double combo_cost(const preprocess::ChannelCombo& combo, const SensorCostTable& table = {});
double combo_cost(const std::string& combo, const SensorCostTable& table = {});

struct CostRow {
  std::string combo;
  double cost_usd = 0.0;
  double acer_pct = 0.0;
};

/// One row per combo, in input order. Throws EvaluationError when a combo has
/// no ACER entry.
std::vector<CostRow> cost_report(const std::vector<std::string>& combos,
                                 const std::map<std::string, double>& acer_by_combo,
                                 const SensorCostTable& table = {});

/// CSV `combo,cost_usd,acer_pct`.
std::string cost_report_csv(const std::vector<CostRow>& rows);

}  // namespace mcpad::evaluation
