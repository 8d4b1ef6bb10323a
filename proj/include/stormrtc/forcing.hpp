#pragma once

#include <string>
#include <vector>

#include "stormrtc/common.hpp"

namespace stormrtc {

/// Piecewise-constant rainfall intensity on a uniform time grid.
struct RainSeries {
  double t0 = 0.0;                 // s
  double step = 0.0;               // s, > 0
  std::vector<double> intensity;   // mm/h, one value per step

  double end() const { return t0 + step * static_cast<double>(intensity.size()); }
  /// Intensity at time t (mm/h); 0 outside the covered window.
  double at(double t) const;
  /// Total depth of the series in mm.
  double cumulative_depth_mm() const;
  void validate() const;
};

/// Piecewise-constant evapotranspiration / evaporation rate.
struct EtSeries {
  double t0 = 0.0;
  double step = 0.0;
  std::vector<double> rate;        // mm/day
  double constant_rate = 0.0;      // used when `rate` is empty

  static EtSeries constant(double rate_mm_per_day);
  double at(double t) const;       // mm/day
  void validate() const;
};

/// Sherman-form intensity-duration-frequency relation:
/// i(d) = a / (d + b)^c with d in minutes and i in mm/h.
struct IdfCurve {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double return_period_yr = 0.0;
  double min_duration_min = 5.0;
  double max_duration_min = 1440.0;

  double intensity_mm_h(double duration_min) const;  // throws outside validity
};

enum class HyetographMethod { kConstant, kAlternatingBlock };

HyetographMethod hyetograph_method_from_string(const std::string& s);

/// Builds a design-storm hyetograph whose total depth equals
/// intensity(duration) * duration. Alternating-block places the largest
/// incremental depth at the center block and alternates outward.
RainSeries design_storm(const IdfCurve& idf, double duration_s, double step_s,
                        HyetographMethod method);

struct StormSpec {
  IdfCurve idf;
  double duration_s = 0.0;
  HyetographMethod method = HyetographMethod::kAlternatingBlock;
};

/// Concatenates design storms separated by dry gaps into one series.
RainSeries storm_train(const std::vector<StormSpec>& storms, double gap_s,
                       double step_s, double lead_s = 0.0, double tail_s = 0.0);

/// Reads `timestamp,intensity_mm_per_hr` (ISO-8601 timestamps, header row
/// required). Missing steps are zero-filled only when `fill_gaps` is set.
RainSeries load_rain_csv(const std::string& path, bool fill_gaps = false);

/// Reads `timestamp,rate_mm_per_day`.
EtSeries load_et_csv(const std::string& path);

/// Piecewise-constant hold onto a finer uniform grid; `new_step_s` must
/// divide the source step. Preserves cumulative depth exactly.
RainSeries resample_hold(const RainSeries& src, double new_step_s);

}  // namespace stormrtc
