#pragma once

#include <string>
#include <vector>

#include "stormrtc/channel.hpp"
#include "stormrtc/common.hpp"
#include "stormrtc/forcing.hpp"
#include "stormrtc/reservoir.hpp"
#include "stormrtc/watershed.hpp"

namespace stormrtc {

struct PlantSpec {
  WatershedGrid watershed;
  ReservoirSpec reservoir;
  ChannelSpec channel;
  double f_d0_pervious_mm = 5.0;
  double f_d0_impervious_mm = 10.0;
  double reservoir_h0_m = 0.0;
};

struct SystemState {
  WatershedState ws;
  ReservoirState res;
  ChannelState ch;
  double t = 0.0;
};

struct SystemLedgers {
  MassLedger watershed;
  MassLedger reservoir;
  MassLedger channel;
};

SystemState plant_initial_state(const PlantSpec& plant);

/// Advances the watershed (nonlinear), reservoir (relinearized) and channel
/// (nonlinear Euler) one step under the held control u. The reservoir sees
/// the watershed outlet closure at the step start; the channel sees the
/// reservoir stage-discharge closure at the step start with the current u.
void plant_step(const PlantSpec& plant, SystemState& state, double u, double rain_mm_h,
                double et_mm_day, double dt_s, SystemLedgers& ledgers);

/// State ordering: [h_ef (q), f_d (q), q_out^w, h^r, q_out^r, h^c (n_c)].
struct LinearizedSystem {
  Vec e_diag;  // 0 on the algebraic flow rows
  Mat a;
  Vec b;       // single control column
  Vec psi;

  Index q = 0, n_c = 0;
  Index idx_q_w() const { return 2 * q; }
  Index idx_h_r() const { return 2 * q + 1; }
  Index idx_q_r() const { return 2 * q + 2; }
  Index idx_h_c(Index i) const { return 2 * q + 3 + i; }
  Index dim() const { return 2 * q + 3 + n_c; }
};

/// Assembles E, A(k), B(k), psi(k) about the current state so that one
/// affine update of the dynamic rows reproduces the sequential composition
/// of the three subsystem steps exactly; the zero rows of E carry the
/// algebraic flow closures.
LinearizedSystem assemble(const PlantSpec& plant, const SystemState& state, double u,
                          double rain_mm_h, double et_mm_day, double dt_s);

struct LogRecord {
  double t = 0.0;
  double rain_mm_h = 0.0;
  double q_w_m3s = 0.0;
  double h_r_m = 0.0;
  double q_r_m3s = 0.0;
  double u = 0.0;
  double h_c_max_m = 0.0;
  double h_c_outlet_m = 0.0;
  double clip_w_m3 = 0.0;  // cumulative
  double clip_r_m3 = 0.0;
  double clip_c_m3 = 0.0;
};

struct MpcSolveDiag {
  double t = 0.0;
  int evaluations = 0;
  int sweeps = 0;
  double j_warm = 0.0;
  double j_final = 0.0;
};

struct SimulationLog {
  std::string controller;
  double dt = 0.0;
  double control_interval = 0.0;
  std::vector<LogRecord> records;
  SystemLedgers ledgers;
  SystemState final_state;
  double initial_ponded_m3 = 0.0, initial_soil_m3 = 0.0;
  double initial_reservoir_m3 = 0.0, initial_channel_m3 = 0.0;
  int clipped_commands = 0;  // controller outputs outside [0,1]
  std::vector<MpcSolveDiag> mpc_diags;
};

struct Measurement {
  double t = 0.0;
  double h_r = 0.0;
  const Vec* h_c = nullptr;
  double rain_mm_h = 0.0;
  const SystemState* state = nullptr;  // full-state access for predictors
};

class Controller {
 public:
  virtual ~Controller() = default;
  virtual double control(const Measurement& y, double dt_ctrl_s) = 0;
  virtual std::string name() const = 0;
  /// Non-fatal synthesis failures (e.g. DARE non-convergence).
  int warnings = 0;
};

/// Runs the closed loop: the controller is queried once per control interval
/// with the measured outputs, u is held in between, one record per step.
SimulationLog simulate(const PlantSpec& plant, const RainSeries& rain,
                       const EtSeries& et, Controller& controller, double dt_s,
                       double control_interval_s, double t_end_s);

}  // namespace stormrtc
