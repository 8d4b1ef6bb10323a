#pragma once

#include <vector>

#include "stormrtc/common.hpp"

namespace stormrtc {

/// Monotone stage-area relation; a single entry means constant area.
struct StageArea {
  std::vector<double> stage_m;
  std::vector<double> area_m2;

  static StageArea constant(double area);
  static StageArea from_csv(const std::string& path);  // h_m,area_m2 with header
  double operator()(double h) const;                   // clamped interpolation
  /// Exact volume between two stages, m^3 (per unit porosity).
  double volume_between(double h_lo, double h_hi) const;
  void validate() const;
};

struct ReservoirSpec {
  double k_o = 0.0;            // orifice constant, m^(5/2)/s per unit opening
  double k_s = 0.0;            // spillway constant
  double crest = 0.0;          // p, m
  double orifice_invert = 0.0; // h_o, m
  double min_engage = 0.0;     // h_m, m
  double porosity = 1.0;       // eta
  StageArea area;

  /// 0.2 x hydraulic diameter rule when a circular orifice diameter is given.
  static double engagement_from_diameter(double diameter_m) { return 0.2 * diameter_m; }
  double engagement_threshold() const { return orifice_invert + min_engage; }
  void validate() const;
};

struct ReservoirState {
  double h = 0.0;      // m
  double q_out = 0.0;  // m^3/s, closure of (h, last u)
  double h_op = 0.0;   // operating point from the previous step
  double u_op = 1.0;
  bool op_init = false;
};

/// Orifice + spillway stage-discharge, m^3/s.
double reservoir_outflow(const ReservoirSpec& spec, double h, double u);

struct ReservoirLin {
  double alpha = 0.0;  // dq/dh at the operating point
  double beta = 0.0;   // dq/du
  double gamma = 0.0;  // q at the operating point
};

/// Jacobian of the outflow about (h*, u*). The 1/sqrt orifice term is
/// evaluated no closer to the engagement threshold than h_hat = 1e-3 m.
ReservoirLin linearize_reservoir(const ReservoirSpec& spec, double h_star, double u_star);

/// One relinearized explicit step. `q_in_w` is the upstream inflow in m^3/s;
/// rain/evaporation act on the live surface area. Refreshes the operating
/// point to the pre-step (h, u) and recomputes q_out from the nonlinear
/// stage-discharge at the new depth.
void reservoir_step(const ReservoirSpec& spec, ReservoirState& state, double q_in_w,
                    double rain_mm_h, double ev_mm_day, double u, double dt_s,
                    MassLedger& ledger);

double reservoir_storage_m3(const ReservoirSpec& spec, double h);

double reservoir_dt_advisory(const ReservoirSpec& spec);

}  // namespace stormrtc
