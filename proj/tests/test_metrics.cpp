#include <doctest.h>

#include <cmath>
#include <vector>

#include "stormrtc/metrics.hpp"

using namespace stormrtc;

TEST_CASE("peak flow reduction sign conventions") {
  const std::vector<double> q_in{1.0, 10.0, 4.0, 0.5};
  const MetricsWindow w{0, 4};
  CHECK(*peak_flow_reduction(q_in, q_in, w) == doctest::Approx(0.0));
  const std::vector<double> shaved{0.5, 2.5, 2.0, 1.0};
  CHECK(*peak_flow_reduction(q_in, shaved, w) == doctest::Approx(0.75));
  const std::vector<double> amplified{0.0, 12.0, 3.0, 0.0};
  CHECK(*peak_flow_reduction(q_in, amplified, w) == doctest::Approx(-0.2));
  const std::vector<double> zeros{0.0, 0.0};
  CHECK(!peak_flow_reduction(zeros, zeros, MetricsWindow{0, 2}).has_value());
}

TEST_CASE("relative maximum flood depth is a plain ratio") {
  const MetricsWindow w{0, 3};
  CHECK(relative_max_flood_depth(std::vector<double>{0.0, 0.0, 0.0}, 1.8, w) == 0.0);
  CHECK(relative_max_flood_depth(std::vector<double>{0.3, 1.8, 0.2}, 1.8, w) ==
        doctest::Approx(1.0));
  CHECK(relative_max_flood_depth(std::vector<double>{2.7, 0.1, 0.0}, 1.8, w) ==
        doctest::Approx(1.5));
}

TEST_CASE("relative control effort normalizes to the busiest controller") {
  const std::vector<double> passive{1.0, 1.0, 1.0, 1.0, 1.0};
  const std::vector<double> toggler{0.0, 1.0, 0.0, 1.0, 0.0};
  const std::vector<double> gentle{0.0, 0.25, 0.5, 0.5, 0.5};
  std::vector<std::span<const double>> series{passive, toggler, gentle};
  const auto rel = relative_control_effort(series, MetricsWindow{0, 5});
  CHECK(rel[0] == doctest::Approx(0.0));  // passive is exactly zero
  CHECK(rel[1] == doctest::Approx(1.0));  // sum |du| = 4 before normalization
  CHECK(rel[2] == doctest::Approx(0.5 / 4.0));
}

TEST_CASE("flood duration uses union-over-reaches semantics via the max series") {
  // max over reaches already collapses simultaneous exceedances to one step
  std::vector<double> h(60, 0.5);
  for (int k = 10; k < 20; ++k) h[static_cast<std::size_t>(k)] = 2.0;
  CHECK(flood_duration_hours(h, 1.8, 60.0, MetricsWindow{0, h.size()}) ==
        doctest::Approx(10.0 / 60.0));
  CHECK(flood_duration_hours(h, 5.0, 60.0, MetricsWindow{0, h.size()}) == 0.0);
  // strictly greater: equality does not count
  std::vector<double> at_limit(5, 1.8);
  CHECK(flood_duration_hours(at_limit, 1.8, 60.0, MetricsWindow{0, 5}) == 0.0);
}

TEST_CASE("exceedance curve follows the weibull plotting position") {
  const std::vector<double> v{3.0, 1.0, 2.0};
  const auto curve = exceedance_curve(v);
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].value == doctest::Approx(3.0));
  CHECK(curve[0].probability == doctest::Approx(0.25));
  CHECK(curve[1].probability == doctest::Approx(0.5));
  CHECK(curve[2].probability == doctest::Approx(0.75));
  for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].value <= curve[i - 1].value);

  const auto flat = exceedance_curve(std::vector<double>{2.0, 2.0, 2.0});
  for (const auto& p : flat) CHECK(p.value == doctest::Approx(2.0));
}

TEST_CASE("rain events and two-storm windows") {
  RainSeries rain;
  rain.step = 600.0;
  rain.intensity.assign(60, 0.0);
  for (int k = 3; k < 9; ++k) rain.intensity[static_cast<std::size_t>(k)] = 8.0;
  for (int k = 30; k < 36; ++k) rain.intensity[static_cast<std::size_t>(k)] = 5.0;
  const auto events = rain_events(rain, 0.1);
  REQUIRE(events.size() == 2);
  CHECK(events[0].start_s == doctest::Approx(1800.0));
  CHECK(events[0].end_s == doctest::Approx(5400.0));
  CHECK(events[1].start_s == doctest::Approx(18000.0));

  const auto [w1, w2] = peak_windows(events, 40000, 1.0);
  REQUIRE(w2.has_value());
  CHECK(w1.k_f == (5400 + 18000) / 2);
  CHECK(w2->k_b == w1.k_f);
  CHECK(w2->k_f == 40000);

  const auto single = peak_windows({events[0]}, 100, 1.0);
  CHECK(!single.second.has_value());
  CHECK(single.first.k_f == 100);
}

TEST_CASE("effort ties all report one") {
  const std::vector<double> a{0.0, 1.0, 1.0};
  const std::vector<double> b{1.0, 0.0, 0.0};
  std::vector<std::span<const double>> series{a, b};
  const auto rel = relative_control_effort(series, MetricsWindow{0, 3});
  CHECK(rel[0] == doctest::Approx(1.0));
  CHECK(rel[1] == doctest::Approx(1.0));
}
