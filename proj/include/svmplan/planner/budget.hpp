#ifndef SVMPLAN_PLANNER_BUDGET_HPP
#define SVMPLAN_PLANNER_BUDGET_HPP

#include <algorithm>
#include <array>
#include <string>
#include <vector>

#include "svmplan/dataset.hpp"
#include "svmplan/error.hpp"
#include "svmplan/features.hpp"

namespace svmplan::planner {

/// Radio output levels a concentrator can be configured to, dBm.
inline constexpr std::array<double, 4> kTxPowerLevels{21.0, 24.0, 27.0, 30.0};

inline bool valid_tx_power(double p) {
  return std::find(kTxPowerLevels.begin(), kTxPowerLevels.end(), p) != kTxPowerLevels.end();
}

struct Concentrator {
  features::Antenna antenna;
  double tx_power = 21.0;
  std::string label;

  friend bool operator==(const Concentrator&, const Concentrator&) = default;
};

inline void require_valid(const Concentrator& c) {
  if (!c.antenna.position.valid()) throw InvalidArgument("concentrator '" + c.label + "': invalid position");
  if (!(c.antenna.mast_height >= 0.0)) throw InvalidArgument("concentrator '" + c.label + "': negative mast height");
  if (!valid_tx_power(c.tx_power))
    throw InvalidArgument("concentrator '" + c.label + "': tx_power must be one of 21, 24, 27, 30 dBm");
}

/// Gains are carried for reporting; the learned models already absorb the
/// gains in force during the measurement campaign.
struct LinkBudget {
  double tx_gain = 0.0;
  double rx_gain = 0.0;
  double sensitivity = dataset::kSensitivity;
  double reference_tx_power = 21.0;

  std::vector<std::string> warnings() const {
    std::vector<std::string> w;
    if (sensitivity != dataset::kSensitivity)
      w.push_back("receiver sensitivity overridden to " + std::to_string(sensitivity) + " dBm (default -119)");
    return w;
  }

  friend bool operator==(const LinkBudget&, const LinkBudget&) = default;
};

/// Predicted RSS shifted by the difference between the configured and the
/// training transmit power.
inline double adjusted_rss(double predicted, double tx_power, const LinkBudget& b) {
  return predicted + (tx_power - b.reference_tx_power);
}

} // namespace svmplan::planner

#endif // SVMPLAN_PLANNER_BUDGET_HPP
