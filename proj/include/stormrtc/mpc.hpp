#pragma once

#include <deque>
#include <random>
#include <vector>

#include "stormrtc/common.hpp"
#include "stormrtc/coupled.hpp"

namespace stormrtc {

struct MpcConfig {
  int prediction_intervals = 8;    // N_p: control moves per solve
  int control_horizon = 2;         // moves applied per solve
  double control_interval_s = 3600.0;
  double rho_u = 1.0;
  double rho_x = 1.0;
  double rho_r = 1.0e3;
  double rho_c = 1.0e4;
  double h_ref_r_m = -1.0;         // < 0: use the spillway crest
  double h_ref_c_m = 1.8;
  double du_min = -1.0;
  double du_max = 1.0;
  int max_evals = 250;             // forward-simulation budget per solve
  double tol = 1e-6;
  int restarts = 2;
  double warm_noise_var = 0.2;
  double internal_dt_s = 10.0;     // plant step inside the predictor

  void validate() const;
};

struct Prediction {
  bool ok = false;
  Vec h_r;   // reservoir depth at each interval end
  Mat h_c;   // intervals x reaches
};

/// Watershed rollout over the horizon; the watershed is autonomous, so this
/// is shared by every candidate trajectory of one solve.
struct HorizonCache {
  bool ok = false;
  double dt = 0.0;
  long steps_per_interval = 0;
  std::vector<double> q_w;        // outlet flux per internal step, m^3/s
  std::vector<double> rain_mm_h;  // forcing samples per internal step
  std::vector<double> et_mm_day;
};

HorizonCache roll_watershed(const PlantSpec& plant, const SystemState& start,
                            const RainSeries& rain, const EtSeries& et, Index moves,
                            double interval_s, double dt_s);

Prediction predict_with_cache(const PlantSpec& plant, const SystemState& start,
                              const Vec& u_traj, const HorizonCache& cache);

/// Forward-simulates the plant under the trajectory, each move held for one
/// control interval, sampling depths at interval ends. Rain beyond the
/// series is zero (perfect foresight over the covered window). Identical to
/// stepping the coupled plant; the autonomous watershed is rolled out once.
Prediction mpc_predict(const PlantSpec& plant, const SystemState& start, const Vec& u_traj,
                       const RainSeries& rain, const EtSeries& et, double interval_s,
                       double dt_s);

/// rho_u sum du^2 + rho_x sum dh_r^2 + rho_r sum max(h_r - ref, 0)
/// + rho_c sum over steps and reaches of max(h_c - ref, 0).
/// Unstable predictions cost +infinity.
double mpc_objective(const MpcConfig& cfg, double h_ref_r, const Vec& u_traj,
                     double u_prev, double h_r0, const Prediction& pred);

/// Feasibility projection: clamp each move into the box intersected with the
/// slew window from its predecessor (forward pass).
Vec mpc_project(Vec u, double u_prev, const MpcConfig& cfg);

struct MpcSolveResult {
  Vec u;
  MpcSolveDiag diag;
};

/// Multi-start projected coordinate descent over the box+slew set. The
/// perturbed warm start is always a candidate, so the returned objective
/// never exceeds it. Never throws on optimizer trouble; returns the best
/// feasible iterate found within the evaluation budget.
MpcSolveResult mpc_solve(const PlantSpec& plant, const SystemState& start,
                         const RainSeries& rain, const EtSeries& et, const MpcConfig& cfg,
                         double u_prev, const Vec& warm_base, std::mt19937_64& rng);

/// Receding-horizon controller: re-solves when the applied segment is
/// exhausted, applies the first `control_horizon` moves, and warm-starts the
/// next solve from the shifted remainder.
class MpcControl final : public Controller {
 public:
  MpcControl(const PlantSpec& plant, const RainSeries& rain, const EtSeries& et,
             MpcConfig cfg, std::uint64_t seed);
  double control(const Measurement& y, double dt_ctrl_s) override;
  std::string name() const override { return "mpc"; }
  const std::vector<MpcSolveDiag>& diagnostics() const { return diags_; }

 private:
  const PlantSpec* plant_;
  const RainSeries* rain_;
  const EtSeries* et_;
  MpcConfig cfg_;
  std::mt19937_64 rng_;
  std::deque<double> schedule_;
  Vec last_traj_;
  double u_prev_ = 1.0;
  std::vector<MpcSolveDiag> diags_;
};

}  // namespace stormrtc
