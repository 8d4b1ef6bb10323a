#include "stormrtc/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stormrtc {

namespace {
constexpr double kSqrtFloor = 1e-3;  // m, regularizes the 1/sqrt(h_hat) gain
}

StageArea StageArea::constant(double area) {
  StageArea s;
  s.stage_m = {0.0};
  s.area_m2 = {area};
  return s;
}

StageArea StageArea::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  std::getline(in, line);  // header
  StageArea s;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    double h, a;
    char comma;
    if (!(ss >> h >> comma >> a)) throw ConfigError(path + ": bad stage-area row");
    s.stage_m.push_back(h);
    s.area_m2.push_back(a);
  }
  s.validate();
  return s;
}

void StageArea::validate() const {
  if (stage_m.empty() || stage_m.size() != area_m2.size())
    throw ConfigError("stage-area table must be non-empty and rectangular");
  for (std::size_t k = 0; k < stage_m.size(); ++k) {
    if (!(area_m2[k] > 0.0)) throw ConfigError("stage-area areas must be positive");
    if (k > 0 && (stage_m[k] <= stage_m[k - 1] || area_m2[k] < area_m2[k - 1]))
      throw ConfigError("stage-area table must be strictly increasing in stage and "
                        "non-decreasing in area");
  }
}

double StageArea::operator()(double h) const {
  if (stage_m.size() == 1) return area_m2[0];
  if (h <= stage_m.front()) return area_m2.front();
  if (h >= stage_m.back()) return area_m2.back();
  const auto it = std::upper_bound(stage_m.begin(), stage_m.end(), h);
  const std::size_t k = static_cast<std::size_t>(it - stage_m.begin());
  const double w = (h - stage_m[k - 1]) / (stage_m[k] - stage_m[k - 1]);
  return area_m2[k - 1] + w * (area_m2[k] - area_m2[k - 1]);
}

double StageArea::volume_between(double h_lo, double h_hi) const {
  if (h_hi < h_lo) return -volume_between(h_hi, h_lo);
  if (stage_m.size() == 1) return area_m2[0] * (h_hi - h_lo);
  // trapezoid integration of the piecewise-linear area over [h_lo, h_hi]
  double vol = 0.0;
  double h = h_lo;
  while (h < h_hi) {
    const auto it = std::upper_bound(stage_m.begin(), stage_m.end(), h);
    double h_next = (it == stage_m.end()) ? h_hi : std::min(*it, h_hi);
    if (h_next <= h) h_next = h_hi;
    vol += 0.5 * ((*this)(h) + (*this)(h_next)) * (h_next - h);
    h = h_next;
  }
  return vol;
}

void ReservoirSpec::validate() const {
  if (!(k_o > 0.0)) throw ConfigError("k_o must be positive");
  if (!(k_s > 0.0)) throw ConfigError("k_s must be positive");
  if (orifice_invert < 0.0) throw ConfigError("orifice invert must be non-negative");
  if (min_engage < 0.0) throw ConfigError("minimum engagement depth must be non-negative");
  if (!(porosity > 0.0 && porosity <= 1.0)) throw ConfigError("porosity must be in (0,1]");
  area.validate();
}

double reservoir_outflow(const ReservoirSpec& spec, double h, double u) {
  const double h_hat = std::max(h - spec.engagement_threshold(), 0.0);
  double q = u * spec.k_o * std::sqrt(h_hat);
  if (h > spec.crest) q += spec.k_s * std::pow(h - spec.crest, 1.5);
  return q;
}

ReservoirLin linearize_reservoir(const ReservoirSpec& spec, double h_star, double u_star) {
  ReservoirLin lin;
  const double h_hat = std::max(h_star - spec.engagement_threshold(), 0.0);
  lin.beta = spec.k_o * std::sqrt(h_hat);
  if (h_hat > 0.0)
    lin.alpha = u_star * spec.k_o / (2.0 * std::sqrt(std::max(h_hat, kSqrtFloor)));
  if (h_star > spec.crest)
    lin.alpha += 1.5 * spec.k_s * std::sqrt(h_star - spec.crest);
  lin.gamma = reservoir_outflow(spec, h_star, u_star);
  return lin;
}

void reservoir_step(const ReservoirSpec& spec, ReservoirState& state, double q_in_w,
                    double rain_mm_h, double ev_mm_day, double u, double dt_s,
                    MassLedger& ledger) {
  if (!state.op_init) {
    state.h_op = state.h;
    state.u_op = u;
    state.op_init = true;
  }
  const ReservoirLin lin = linearize_reservoir(spec, state.h_op, state.u_op);
  const double area = spec.area(state.h);
  const double mu = 1.0 / (area * spec.porosity);
  const double q_in =
      q_in_w + (rain_mm_h - ev_mm_day / kHoursPerDay) * area * kMmHourM2ToM3s;

  const double a = 1.0 - dt_s * lin.alpha * mu;
  const double b = -dt_s * lin.beta * mu;
  const double psi =
      dt_s * mu * (lin.alpha * state.h_op + lin.beta * state.u_op - lin.gamma + q_in);
  double h_new = a * state.h + b * u + psi;
  if (!std::isfinite(h_new))
    throw SimulationError("reservoir state went non-finite; reduce dt (advisory: " +
                          std::to_string(reservoir_dt_advisory(spec)) + " s)");

  // Flux actually removed by the linearized update, for exact bookkeeping.
  const double q_eff =
      lin.gamma + lin.alpha * (state.h - state.h_op) + lin.beta * (u - state.u_op);
  ledger.inflow += q_in * dt_s;
  ledger.outflow += q_eff * dt_s;
  if (h_new < 0.0) {
    ledger.clipped += -h_new * area * spec.porosity;
    h_new = 0.0;
  }

  state.h_op = state.h;
  state.u_op = u;
  state.h = h_new;
  state.q_out = reservoir_outflow(spec, h_new, u);
}

double reservoir_storage_m3(const ReservoirSpec& spec, double h) {
  return spec.porosity * spec.area.volume_between(0.0, h);
}

double reservoir_dt_advisory(const ReservoirSpec& spec) {
  // Largest depth gain: orifice at the sqrt floor plus spill 2 m over crest.
  const double alpha_max =
      spec.k_o / (2.0 * std::sqrt(kSqrtFloor)) + 1.5 * spec.k_s * std::sqrt(2.0);
  const double area_min = spec.area(0.0);
  return 0.5 * area_min * spec.porosity / alpha_max;
}

}  // namespace stormrtc
