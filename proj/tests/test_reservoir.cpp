#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "stormrtc/reservoir.hpp"

using namespace stormrtc;

namespace {

ReservoirSpec table3_spec() {
  ReservoirSpec spec;
  spec.k_o = 1.538;
  spec.k_s = 6.3;
  spec.crest = 5.5;
  spec.orifice_invert = 0.0;
  spec.min_engage = 0.24;
  spec.porosity = 1.0;
  spec.area = StageArea::constant(10530.0);
  return spec;
}

}  // namespace

TEST_CASE("stage-discharge covers orifice, spillway and dead zones") {
  const ReservoirSpec spec = table3_spec();
  CHECK(reservoir_outflow(spec, 3.0, 0.0) == 0.0);           // closed valve below crest
  CHECK(reservoir_outflow(spec, 0.20, 1.0) == 0.0);          // below engagement
  CHECK(reservoir_outflow(spec, 0.24, 1.0) == 0.0);
  // k_o = 1.538, engagement 0.24, h = 4.24 -> 1.538*sqrt(4) = 3.076
  CHECK(reservoir_outflow(spec, 4.24, 1.0) == doctest::Approx(3.076).epsilon(1e-12));
  // spillway only: k_s = 6.3, crest 5.5, h = 6.5 -> 6.3
  CHECK(reservoir_outflow(spec, 6.5, 0.0) == doctest::Approx(6.3).epsilon(1e-12));
  // both devices above the crest
  CHECK(reservoir_outflow(spec, 6.5, 1.0) ==
        doctest::Approx(1.538 * std::sqrt(6.5 - 0.24) + 6.3).epsilon(1e-12));
}

TEST_CASE("outflow is non-decreasing in depth and opening") {
  const ReservoirSpec spec = table3_spec();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> hd(0.0, 8.0), ud(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const double h = hd(rng), u = ud(rng);
    CHECK(reservoir_outflow(spec, h + 0.1, u) >= reservoir_outflow(spec, h, u));
    CHECK(reservoir_outflow(spec, h, std::min(1.0, u + 0.1)) >=
          reservoir_outflow(spec, h, u));
  }
}

TEST_CASE("linearization matches the hand-evaluated jacobian") {
  const ReservoirSpec spec = table3_spec();
  // u*=1, h_hat = 4 (h = 4.24), below crest
  ReservoirLin lin = linearize_reservoir(spec, 4.24, 1.0);
  CHECK(lin.alpha == doctest::Approx(1.538 / 4.0).epsilon(1e-12));
  CHECK(lin.beta == doctest::Approx(3.076).epsilon(1e-12));
  CHECK(lin.gamma == doctest::Approx(3.076).epsilon(1e-12));
  // closed valve: orifice slope scales with u*
  lin = linearize_reservoir(spec, 4.24, 0.0);
  CHECK(lin.alpha == 0.0);
  CHECK(lin.beta == doctest::Approx(3.076).epsilon(1e-12));
}

TEST_CASE("linearization agrees with central finite differences in smooth regions") {
  const ReservoirSpec spec = table3_spec();
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> ud(0.05, 1.0);
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    // sample away from the engagement and crest kinks
    const double h = pick(rng) < 0.5
                         ? 0.25 + 0.05 + pick(rng) * (5.5 - 0.4 - 0.25)
                         : 5.55 + pick(rng) * 2.5;
    const double u = ud(rng);
    const ReservoirLin lin = linearize_reservoir(spec, h, u);
    const double dh = 1e-6 * std::max(1.0, h);
    const double fd_a = (reservoir_outflow(spec, h + dh, u) -
                         reservoir_outflow(spec, h - dh, u)) /
                        (2.0 * dh);
    const double du = 1e-6;
    const double fd_b = (reservoir_outflow(spec, h, u + du) -
                         reservoir_outflow(spec, h, u - du)) /
                        (2.0 * du);
    CHECK(lin.alpha == doctest::Approx(fd_a).epsilon(1e-6));
    CHECK(lin.beta == doctest::Approx(fd_b).epsilon(1e-6));
  }
}

TEST_CASE("linearization remainder is second order") {
  const ReservoirSpec spec = table3_spec();
  const double h0 = 2.0, u0 = 0.7;
  const ReservoirLin lin = linearize_reservoir(spec, h0, u0);
  auto remainder = [&](double dh) {
    double worst = 0.0;
    for (double x : {-dh, -0.5 * dh, 0.5 * dh, dh}) {
      const double exact = reservoir_outflow(spec, h0 + x, u0);
      const double approx = lin.gamma + lin.alpha * x;
      worst = std::max(worst, std::abs(exact - approx));
    }
    return worst;
  };
  const double r1 = remainder(0.01);
  const double r2 = remainder(0.005);
  CHECK(r2 <= 0.35 * r1 + 1e-12);  // quadratic scaling
}

TEST_CASE("no-flux depth is constant") {
  const ReservoirSpec spec = table3_spec();
  ReservoirState s;
  s.h = 0.20;  // below engagement, below crest
  MassLedger led;
  for (int k = 0; k < 1000; ++k) reservoir_step(spec, s, 0.0, 0.0, 0.0, 0.0, 10.0, led);
  CHECK(s.h == doctest::Approx(0.20).epsilon(1e-12));
  CHECK(s.q_out == 0.0);
}

TEST_CASE("steady inflow converges to the stage-discharge root") {
  const ReservoirSpec spec = table3_spec();
  ReservoirState s;
  s.h = 0.0;
  MassLedger led;
  const double q_in = 2.0;  // m^3/s
  for (int k = 0; k < 400000; ++k) reservoir_step(spec, s, q_in, 0.0, 0.0, 1.0, 10.0, led);
  // root of k_o sqrt(h_hat) = q_in
  const double h_hat = (q_in / spec.k_o) * (q_in / spec.k_o);
  CHECK(s.h == doctest::Approx(h_hat + 0.24).epsilon(1e-4 / (h_hat + 0.24)));
  CHECK(s.q_out == doctest::Approx(q_in).epsilon(1e-6));
}

TEST_CASE("linearized step at the operating point reproduces the euler step") {
  const ReservoirSpec spec = table3_spec();
  ReservoirState s;
  s.h = 3.0;
  s.h_op = 3.0;
  s.u_op = 0.6;
  s.op_init = true;
  MassLedger led;
  const double dt = 30.0, q_in = 1.2, u = 0.6;
  const double expected =
      3.0 + dt / (10530.0) * (q_in - reservoir_outflow(spec, 3.0, 0.6));
  reservoir_step(spec, s, q_in, 0.0, 0.0, u, dt, led);
  CHECK(s.h == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("volume balance closes over a storm-like inflow") {
  const ReservoirSpec spec = table3_spec();
  ReservoirState s;
  MassLedger led;
  const double dt = 5.0;
  double inflow_vol = 0.0, outflow_vol = 0.0;
  double q_prev = reservoir_outflow(spec, s.h, 1.0);
  for (int k = 0; k < 20000; ++k) {
    const double t = k * dt;
    const double q_in = t < 3600.0 ? 8.0 * std::sin(3.14159 * t / 3600.0) : 0.0;
    const double u = (k / 90) % 2 == 0 ? 1.0 : 0.3;
    inflow_vol += q_in * dt;
    outflow_vol += reservoir_outflow(spec, s.h, u) * dt;  // logged closure series
    reservoir_step(spec, s, q_in, 0.0, 0.0, u, dt, led);
    (void)q_prev;
  }
  const double d_storage = reservoir_storage_m3(spec, s.h);
  REQUIRE(inflow_vol > 0.0);
  CHECK(std::abs(inflow_vol - outflow_vol - d_storage + led.clipped) / inflow_vol < 0.005);
  // the internal effective-flux ledger closes to machine precision
  CHECK(std::abs(led.inflow - led.outflow - d_storage + led.clipped) / inflow_vol < 1e-9);
}

TEST_CASE("stage-area table interpolates and integrates") {
  StageArea table;
  table.stage_m = {0.0, 2.0, 4.0};
  table.area_m2 = {100.0, 200.0, 400.0};
  table.validate();
  CHECK(table(1.0) == doctest::Approx(150.0));
  CHECK(table(-1.0) == doctest::Approx(100.0));
  CHECK(table(9.0) == doctest::Approx(400.0));
  CHECK(table.volume_between(0.0, 2.0) == doctest::Approx(300.0));
  CHECK(table.volume_between(0.0, 4.0) == doctest::Approx(900.0));
}

TEST_CASE("spec validation flags bad parameters") {
  ReservoirSpec spec = table3_spec();
  spec.k_o = -1.0;
  CHECK_THROWS_WITH_AS(spec.validate(), doctest::Contains("k_o must be positive"),
                       ConfigError);
}

TEST_CASE("engagement default follows the hydraulic-diameter rule") {
  CHECK(ReservoirSpec::engagement_from_diameter(1.2) == doctest::Approx(0.24));
}

TEST_CASE("stage-area table loads from csv") {
  const std::string path = "/tmp/stormrtc_stage_area.csv";
  {
    std::ofstream out(path);
    out << "h_m,area_m2\n0.0,100.0\n2.0,250.0\n5.0,400.0\n";
  }
  const StageArea table = StageArea::from_csv(path);
  CHECK(table(1.0) == doctest::Approx(175.0));
  CHECK(table(5.5) == doctest::Approx(400.0));
}
