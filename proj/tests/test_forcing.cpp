#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "stormrtc/forcing.hpp"

using namespace stormrtc;

namespace {

IdfCurve curve_with_12h_intensity(double i_12h) {
  // i(d) = a / (d + 8)^0.7 with d in minutes
  IdfCurve idf;
  idf.b = 8.0;
  idf.c = 0.7;
  idf.a = i_12h * std::pow(720.0 + idf.b, idf.c);
  idf.max_duration_min = 1440.0;
  return idf;
}

std::string write_temp(const std::string& name, const std::string& contents) {
  const std::string path = "/tmp/stormrtc_test_" + name;
  std::ofstream out(path);
  out << contents;
  return path;
}

}  // namespace

TEST_CASE("design storm total depth matches the IDF volume") {
  const IdfCurve idf = curve_with_12h_intensity(15.875);
  const RainSeries storm =
      design_storm(idf, 12 * 3600.0, 1800.0, HyetographMethod::kAlternatingBlock);
  // 15.875 mm/h for 12 h = 190.5 mm = 7.5 in
  CHECK(storm.cumulative_depth_mm() == doctest::Approx(190.5).epsilon(1e-9));
  CHECK(storm.intensity.size() == 24);

  const RainSeries flat =
      design_storm(idf, 12 * 3600.0, 1800.0, HyetographMethod::kConstant);
  CHECK(flat.cumulative_depth_mm() == doctest::Approx(190.5).epsilon(1e-9));
  for (double v : flat.intensity) CHECK(v == doctest::Approx(15.875));
}

TEST_CASE("alternating blocks descend from the center outward") {
  IdfCurve idf;
  idf.a = 1000.0;
  idf.b = 10.0;
  idf.c = 0.7;
  const double step_s = 600.0;
  const RainSeries storm =
      design_storm(idf, 1800.0, step_s, HyetographMethod::kAlternatingBlock);
  REQUIRE(storm.intensity.size() == 3);

  // Independent incremental depths straight from the formula.
  auto cum = [&](double d_min) {
    return (1000.0 / std::pow(d_min + 10.0, 0.7)) * (d_min / 60.0);
  };
  const double inc1 = cum(10.0);
  const double inc2 = cum(20.0) - cum(10.0);
  const double inc3 = cum(30.0) - cum(20.0);
  const double step_h = step_s / 3600.0;
  CHECK(storm.intensity[1] == doctest::Approx(inc1 / step_h));  // center block largest
  CHECK(storm.intensity[2] == doctest::Approx(inc2 / step_h));
  CHECK(storm.intensity[0] == doctest::Approx(inc3 / step_h));
  CHECK(storm.intensity[1] >= storm.intensity[2]);
  CHECK(storm.intensity[2] >= storm.intensity[0]);
}

TEST_CASE("design storm rejects durations outside the IDF validity range") {
  IdfCurve idf = curve_with_12h_intensity(15.0);
  idf.max_duration_min = 120.0;
  CHECK_THROWS_AS(design_storm(idf, 12 * 3600.0, 1800.0, HyetographMethod::kConstant),
                  ConfigError);
  CHECK_THROWS_AS(design_storm(idf, 3600.0, 700.0, HyetographMethod::kConstant),
                  ConfigError);  // not a multiple of the step
}

TEST_CASE("storm train separates events with dry gaps") {
  const IdfCurve idf = curve_with_12h_intensity(15.875);
  std::vector<StormSpec> storms(2);
  storms[0] = {idf, 7200.0, HyetographMethod::kConstant};
  storms[1] = {idf, 7200.0, HyetographMethod::kConstant};
  const RainSeries train = storm_train(storms, 3600.0, 1800.0, 1800.0);
  CHECK(train.intensity.size() == 1 + 4 + 2 + 4);
  CHECK(train.intensity[0] == 0.0);
  CHECK(train.intensity[5] == 0.0);
  CHECK(train.intensity[6] == 0.0);
  CHECK(train.at(1800.0 * 1.5) > 0.0);
}

TEST_CASE("rain csv loads well-formed series") {
  const std::string path = write_temp("rain_ok.csv",
                                      "timestamp,intensity_mm_per_hr\n"
                                      "2021-04-22T00:00:00,0.0\n"
                                      "2021-04-22T00:05:00,12.5\n"
                                      "2021-04-22T00:10:00,3.0\n");
  const RainSeries s = load_rain_csv(path);
  CHECK(s.intensity.size() == 3);
  CHECK(s.step == doctest::Approx(300.0));
  CHECK(s.intensity[1] == doctest::Approx(12.5));
}

TEST_CASE("rain csv rejects negative intensity with the row number") {
  const std::string path = write_temp("rain_neg.csv",
                                      "timestamp,intensity_mm_per_hr\n"
                                      "2021-04-22T00:00:00,0.0\n"
                                      "2021-04-22T00:05:00,-1.0\n");
  CHECK_THROWS_WITH_AS(static_cast<void>(load_rain_csv(path)),
                       doctest::Contains("negative intensity at row 3"), ConfigError);
}

TEST_CASE("rain csv rejects disorder and unsanctioned gaps") {
  const std::string bad = write_temp("rain_mono.csv",
                                     "timestamp,intensity_mm_per_hr\n"
                                     "2021-04-22T00:10:00,1.0\n"
                                     "2021-04-22T00:05:00,2.0\n");
  CHECK_THROWS_AS(static_cast<void>(load_rain_csv(bad)), ConfigError);

  const std::string gap = write_temp("rain_gap.csv",
                                     "timestamp,intensity_mm_per_hr\n"
                                     "2021-04-22T00:00:00,1.0\n"
                                     "2021-04-22T00:05:00,2.0\n"
                                     "2021-04-22T00:20:00,3.0\n");
  CHECK_THROWS_AS(static_cast<void>(load_rain_csv(gap)), ConfigError);
  const RainSeries filled = load_rain_csv(gap, true);
  CHECK(filled.intensity.size() == 5);
  CHECK(filled.intensity[2] == 0.0);
  CHECK(filled.intensity[3] == 0.0);
}

TEST_CASE("piecewise-constant resampling preserves cumulative depth exactly") {
  RainSeries src;
  src.step = 300.0;
  src.intensity = {5.0, 0.0, 12.0, 7.5, 1.25};
  const RainSeries fine = resample_hold(src, 60.0);
  CHECK(fine.intensity.size() == 25);
  CHECK(fine.cumulative_depth_mm() == doctest::Approx(src.cumulative_depth_mm()).epsilon(1e-15));
  CHECK(fine.at(301.0) == doctest::Approx(src.at(301.0)));
}

TEST_CASE("et series lookup") {
  const EtSeries c = EtSeries::constant(2.0);
  CHECK(c.at(12345.0) == doctest::Approx(2.0));
  const std::string path = write_temp("et.csv",
                                      "timestamp,rate_mm_per_day\n"
                                      "2021-04-22T00:00:00,2.0\n"
                                      "2021-04-23T00:00:00,4.0\n");
  const EtSeries s = load_et_csv(path);
  CHECK(s.at(100.0) == doctest::Approx(2.0));
  CHECK(s.at(86400.0 + 100.0) == doctest::Approx(4.0));
}
