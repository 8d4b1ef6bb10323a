#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stormrtc/coupled.hpp"
#include "stormrtc/forcing.hpp"

namespace stormrtc {

/// Record index window [k_b, k_f).
struct MetricsWindow {
  std::size_t k_b = 0;
  std::size_t k_f = 0;
};

/// (max inflow peak - max outflow peak) / max inflow peak; negative means
/// amplification. Empty when the inflow peak is zero (not applicable).
std::optional<double> peak_flow_reduction(std::span<const double> q_in,
                                          std::span<const double> q_out,
                                          const MetricsWindow& w);

/// max over reaches and steps of h^c divided by the allowable depth.
double relative_max_flood_depth(std::span<const double> h_c_max, double h_c_lim,
                                const MetricsWindow& w);

/// Sum |du| per controller, normalized by the maximum across the set
/// (ties all report 1).
std::vector<double> relative_control_effort(
    const std::vector<std::span<const double>>& u_series, const MetricsWindow& w);

/// Hours with max-over-reaches depth strictly above the limit.
double flood_duration_hours(std::span<const double> h_c_max, double h_c_lim, double dt_s,
                            const MetricsWindow& w);

struct ExceedancePoint {
  double value = 0.0;
  double probability = 0.0;  // Weibull plotting position m/(N+1)
};

/// Empirical survival curve, sorted by decreasing value.
std::vector<ExceedancePoint> exceedance_curve(std::span<const double> values);

struct RainEvent {
  double start_s = 0.0;
  double end_s = 0.0;
};

std::vector<RainEvent> rain_events(const RainSeries& rain, double threshold_mm_h);

/// For a two-event forcing, splits the record range at the inter-event
/// midpoint; otherwise one window covering everything.
std::pair<MetricsWindow, std::optional<MetricsWindow>> peak_windows(
    const std::vector<RainEvent>& events, std::size_t n_records, double dt_s);

struct ComparisonRow {
  std::string controller;
  std::optional<double> peak_reduction_1;
  std::optional<double> peak_reduction_2;
  double relative_max_depth = 0.0;
  double effort_sum = 0.0;       // before normalization
  double relative_effort = 0.0;  // after
  double flood_duration_h = 0.0;
};

/// Table-4-style comparison across completed logs.
std::vector<ComparisonRow> build_comparison(const std::vector<const SimulationLog*>& logs,
                                            const RainSeries& rain, double h_c_lim,
                                            double rain_threshold_mm_h = 0.1);

}  // namespace stormrtc
