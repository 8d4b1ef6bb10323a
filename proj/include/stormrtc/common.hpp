#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace stormrtc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Arr = Eigen::ArrayXd;
using Index = Eigen::Index;

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kHoursPerDay = 24.0;
// mm/h over an area in m^2 -> m^3/s
inline constexpr double kMmHourM2ToM3s = 1.0 / 3.6e6;

/// Raised when a state goes non-finite; carries a time-step diagnostic.
struct SimulationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Cumulative volume bookkeeping for one subsystem, in m^3.
/// `clipped` is the mass restored when a depth is floored at zero;
/// `infiltration` is net into soil storage (negative while drying).
struct MassLedger {
  double rain = 0.0;
  double et = 0.0;
  double infiltration = 0.0;
  double inflow = 0.0;
  double outflow = 0.0;
  double clipped = 0.0;
};

inline double clamp01(double u) { return u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u); }

}  // namespace stormrtc
