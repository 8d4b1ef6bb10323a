#include "stormrtc/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace stormrtc {

namespace {

double window_max(std::span<const double> v, const MetricsWindow& w) {
  double m = 0.0;
  const std::size_t hi = std::min(w.k_f, v.size());
  for (std::size_t k = w.k_b; k < hi; ++k) m = std::max(m, v[k]);
  return m;
}

}  // namespace

std::optional<double> peak_flow_reduction(std::span<const double> q_in,
                                          std::span<const double> q_out,
                                          const MetricsWindow& w) {
  const double peak_in = window_max(q_in, w);
  if (peak_in <= 0.0) return std::nullopt;
  return (peak_in - window_max(q_out, w)) / peak_in;
}

double relative_max_flood_depth(std::span<const double> h_c_max, double h_c_lim,
                                const MetricsWindow& w) {
  return window_max(h_c_max, w) / h_c_lim;
}

std::vector<double> relative_control_effort(
    const std::vector<std::span<const double>>& u_series, const MetricsWindow& w) {
  std::vector<double> sums(u_series.size(), 0.0);
  for (std::size_t c = 0; c < u_series.size(); ++c) {
    const auto& u = u_series[c];
    const std::size_t hi = std::min(w.k_f, u.size());
    for (std::size_t k = w.k_b + 1; k < hi; ++k) sums[c] += std::abs(u[k] - u[k - 1]);
  }
  const double top = sums.empty() ? 0.0 : *std::max_element(sums.begin(), sums.end());
  std::vector<double> out(sums.size(), 0.0);
  if (top > 0.0)
    for (std::size_t c = 0; c < sums.size(); ++c) out[c] = sums[c] / top;
  return out;
}

double flood_duration_hours(std::span<const double> h_c_max, double h_c_lim, double dt_s,
                            const MetricsWindow& w) {
  std::size_t count = 0;
  const std::size_t hi = std::min(w.k_f, h_c_max.size());
  for (std::size_t k = w.k_b; k < hi; ++k)
    if (h_c_max[k] > h_c_lim) ++count;
  return static_cast<double>(count) * dt_s / kSecondsPerHour;
}

std::vector<ExceedancePoint> exceedance_curve(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::vector<ExceedancePoint> out(sorted.size());
  const double denom = static_cast<double>(sorted.size()) + 1.0;
  for (std::size_t m = 0; m < sorted.size(); ++m)
    out[m] = {sorted[m], static_cast<double>(m + 1) / denom};
  return out;
}

std::vector<RainEvent> rain_events(const RainSeries& rain, double threshold_mm_h) {
  std::vector<RainEvent> events;
  bool active = false;
  double start = 0.0;
  for (std::size_t k = 0; k < rain.intensity.size(); ++k) {
    const double t = rain.t0 + static_cast<double>(k) * rain.step;
    const bool wet = rain.intensity[k] > threshold_mm_h;
    if (wet && !active) {
      active = true;
      start = t;
    } else if (!wet && active) {
      active = false;
      events.push_back({start, t});
    }
  }
  if (active) events.push_back({start, rain.end()});
  return events;
}

std::pair<MetricsWindow, std::optional<MetricsWindow>> peak_windows(
    const std::vector<RainEvent>& events, std::size_t n_records, double dt_s) {
  if (events.size() != 2) return {{0, n_records}, std::nullopt};
  const double mid_s = 0.5 * (events[0].end_s + events[1].start_s);
  auto mid = static_cast<std::size_t>(mid_s / dt_s);
  mid = std::min(mid, n_records);
  return {{0, mid}, MetricsWindow{mid, n_records}};
}

std::vector<ComparisonRow> build_comparison(const std::vector<const SimulationLog*>& logs,
                                            const RainSeries& rain, double h_c_lim,
                                            double rain_threshold_mm_h) {
  std::vector<ComparisonRow> rows;
  if (logs.empty()) return rows;
  const double dt = logs.front()->dt;
  const std::size_t n = logs.front()->records.size();
  const auto [w1, w2] = peak_windows(rain_events(rain, rain_threshold_mm_h), n, dt);
  const MetricsWindow full{0, n};

  std::vector<std::vector<double>> u_store(logs.size());
  std::vector<std::span<const double>> u_spans;
  for (std::size_t c = 0; c < logs.size(); ++c) {
    u_store[c].reserve(n);
    for (const auto& r : logs[c]->records) u_store[c].push_back(r.u);
    u_spans.emplace_back(u_store[c]);
  }
  const std::vector<double> efforts_rel = relative_control_effort(u_spans, full);

  for (std::size_t c = 0; c < logs.size(); ++c) {
    const auto& recs = logs[c]->records;
    std::vector<double> q_w(recs.size()), q_r(recs.size()), h_c(recs.size());
    for (std::size_t k = 0; k < recs.size(); ++k) {
      q_w[k] = recs[k].q_w_m3s;
      q_r[k] = recs[k].q_r_m3s;
      h_c[k] = recs[k].h_c_max_m;
    }
    ComparisonRow row;
    row.controller = logs[c]->controller;
    row.peak_reduction_1 = peak_flow_reduction(q_w, q_r, w1);
    if (w2) row.peak_reduction_2 = peak_flow_reduction(q_w, q_r, *w2);
    row.relative_max_depth = relative_max_flood_depth(h_c, h_c_lim, full);
    double effort = 0.0;
    for (std::size_t k = 1; k < recs.size(); ++k)
      effort += std::abs(recs[k].u - recs[k - 1].u);
    row.effort_sum = effort;
    row.relative_effort = efforts_rel[c];
    row.flood_duration_h = flood_duration_hours(h_c, h_c_lim, dt, full);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace stormrtc
