#include "stormrtc/mpc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stormrtc {

void MpcConfig::validate() const {
  if (prediction_intervals < 1) throw ConfigError("prediction horizon must be >= 1");
  if (control_horizon < 1 || control_horizon > prediction_intervals)
    throw ConfigError("control horizon must be in [1, prediction horizon]");
  if (rho_u < 0 || rho_x < 0 || rho_r < 0 || rho_c < 0)
    throw ConfigError("MPC weights must be non-negative");
  if (du_min > 0.0 || du_max < 0.0)
    throw ConfigError("slew bounds must satisfy du_min <= 0 <= du_max");
  if (h_ref_c_m <= 0.0) throw ConfigError("channel reference depth must be positive");
  if (internal_dt_s <= 0.0 || control_interval_s <= 0.0)
    throw ConfigError("MPC time steps must be positive");
  if (warm_noise_var < 0.0) throw ConfigError("warm-start noise variance must be >= 0");
}

HorizonCache roll_watershed(const PlantSpec& plant, const SystemState& start,
                            const RainSeries& rain, const EtSeries& et,
                            Index moves, double interval_s, double dt_s) {
  HorizonCache cache;
  cache.dt = dt_s;
  cache.steps_per_interval = static_cast<long>(std::llround(interval_s / dt_s));
  const long total = cache.steps_per_interval * static_cast<long>(moves);
  cache.q_w.reserve(static_cast<std::size_t>(total));
  cache.rain_mm_h.reserve(static_cast<std::size_t>(total));
  cache.et_mm_day.reserve(static_cast<std::size_t>(total));

  WatershedState ws = start.ws;
  MassLedger scratch;
  double t = start.t;
  cache.ok = true;
  try {
    for (long k = 0; k < total; ++k) {
      const double r = rain.at(t), e = et.at(t);
      cache.q_w.push_back(ws.q_out);
      cache.rain_mm_h.push_back(r);
      cache.et_mm_day.push_back(e);
      watershed_step(plant.watershed, ws, r, e, dt_s, scratch);
      t += dt_s;
    }
  } catch (const SimulationError&) {
    cache.ok = false;
  }
  return cache;
}

Prediction predict_with_cache(const PlantSpec& plant, const SystemState& start,
                              const Vec& u_traj, const HorizonCache& cache) {
  Prediction pred;
  const Index moves = u_traj.size();
  pred.h_r.resize(moves);
  pred.h_c.resize(moves, plant.channel.reaches());
  if (!cache.ok) return pred;

  ReservoirState res = start.res;
  ChannelState ch = start.ch;
  MassLedger scratch_r, scratch_c;
  try {
    long k = 0;
    for (Index m = 0; m < moves; ++m) {
      const double u = u_traj[m];
      for (long s = 0; s < cache.steps_per_interval; ++s, ++k) {
        const std::size_t kk = static_cast<std::size_t>(k);
        const double q_r = reservoir_outflow(plant.reservoir, res.h, u);
        res.q_out = q_r;
        reservoir_step(plant.reservoir, res, cache.q_w[kk], cache.rain_mm_h[kk],
                       cache.et_mm_day[kk], u, cache.dt, scratch_r);
        channel_step(plant.channel, ch, q_r, cache.dt, scratch_c);
      }
      pred.h_r[m] = res.h;
      pred.h_c.row(m) = ch.h.transpose();
    }
  } catch (const SimulationError&) {
    pred.ok = false;
    return pred;
  }
  pred.ok = true;
  return pred;
}

Prediction mpc_predict(const PlantSpec& plant, const SystemState& start, const Vec& u_traj,
                       const RainSeries& rain, const EtSeries& et, double interval_s,
                       double dt_s) {
  // The watershed is autonomous, so its rollout is shared by every candidate
  // trajectory; only the controlled reservoir and channel are re-simulated.
  const HorizonCache cache =
      roll_watershed(plant, start, rain, et, u_traj.size(), interval_s, dt_s);
  return predict_with_cache(plant, start, u_traj, cache);
}

double mpc_objective(const MpcConfig& cfg, double h_ref_r, const Vec& u_traj,
                     double u_prev, double h_r0, const Prediction& pred) {
  if (!pred.ok) return std::numeric_limits<double>::infinity();
  double j = 0.0;
  double u_last = u_prev;
  double h_last = h_r0;
  for (Index m = 0; m < u_traj.size(); ++m) {
    const double du = u_traj[m] - u_last;
    const double dh = pred.h_r[m] - h_last;
    j += cfg.rho_u * du * du + cfg.rho_x * dh * dh;
    j += cfg.rho_r * std::max(pred.h_r[m] - h_ref_r, 0.0);
    u_last = u_traj[m];
    h_last = pred.h_r[m];
  }
  if (cfg.rho_c > 0.0)
    j += cfg.rho_c * (pred.h_c.array() - cfg.h_ref_c_m).max(0.0).sum();
  return j;
}

Vec mpc_project(Vec u, double u_prev, const MpcConfig& cfg) {
  double prev = u_prev;
  for (Index m = 0; m < u.size(); ++m) {
    const double lo = std::max(0.0, prev + cfg.du_min);
    const double hi = std::min(1.0, prev + cfg.du_max);
    u[m] = std::min(std::max(u[m], lo), hi);
    prev = u[m];
  }
  return u;
}

namespace {

// Uniform-flow discharge of the first reach at the reference depth: the
// largest release the channel carries without exceeding it.
double channel_capacity(const ChannelSpec& ch, double h_ref) {
  const double w = ch.width[0];
  const double a = w * h_ref;
  const double r = a / (w + 2.0 * h_ref);
  const double s = std::max(ch.slope_offset[0], 1e-6);
  return a * std::pow(r, 2.0 / 3.0) * std::sqrt(s) / ch.n_manning[0];
}

// Feedback-form start: hold the release near a target rate by scaling the
// valve against the simulated orifice head over the horizon.
Vec rate_tracking_start(const PlantSpec& plant, const SystemState& start,
                        const HorizonCache& cache, Index moves, double q_target) {
  Vec u = Vec::Ones(moves);
  if (!cache.ok) return u;
  ReservoirState res = start.res;
  MassLedger scratch;
  long k = 0;
  for (Index m = 0; m < moves; ++m) {
    const double full_open = reservoir_outflow(plant.reservoir, res.h, 1.0);
    u[m] = full_open > 1e-9 ? clamp01(q_target / full_open) : 1.0;
    for (long s = 0; s < cache.steps_per_interval; ++s, ++k) {
      const std::size_t kk = static_cast<std::size_t>(k);
      reservoir_step(plant.reservoir, res, cache.q_w[kk], cache.rain_mm_h[kk],
                     cache.et_mm_day[kk], u[m], cache.dt, scratch);
    }
  }
  return u;
}

struct Evaluator {
  const PlantSpec& plant;
  const SystemState& start;
  const HorizonCache& cache;
  const MpcConfig& cfg;
  double h_ref_r;
  double u_prev;
  int evals = 0;

  double operator()(const Vec& u) {
    ++evals;
    const Prediction pred = predict_with_cache(plant, start, u, cache);
    return mpc_objective(cfg, h_ref_r, u, u_prev, start.res.h, pred);
  }
};

}  // namespace

MpcSolveResult mpc_solve(const PlantSpec& plant, const SystemState& start,
                         const RainSeries& rain, const EtSeries& et, const MpcConfig& cfg,
                         double u_prev, const Vec& warm_base, std::mt19937_64& rng) {
  const Index moves = cfg.prediction_intervals;
  const double h_ref_r = cfg.h_ref_r_m < 0.0 ? plant.reservoir.crest : cfg.h_ref_r_m;
  const HorizonCache cache = roll_watershed(plant, start, rain, et, moves,
                                            cfg.control_interval_s, cfg.internal_dt_s);
  Evaluator eval{plant, start, cache, cfg, h_ref_r, u_prev};

  // Warm start: multiplicative normal perturbation of the shifted previous
  // trajectory, then projected feasible.
  std::normal_distribution<double> noise(0.0, std::sqrt(cfg.warm_noise_var));
  Vec warm = warm_base;
  for (Index m = 0; m < moves; ++m) warm[m] *= 1.0 + noise(rng);
  warm = mpc_project(std::move(warm), u_prev, cfg);
  const double j_warm = eval(warm);

  std::vector<Vec> starts;
  starts.push_back(warm);
  starts.push_back(mpc_project(warm_base, u_prev, cfg));
  starts.push_back(mpc_project(Vec::Constant(moves, u_prev), u_prev, cfg));
  const double q_cap = channel_capacity(plant.channel, cfg.h_ref_c_m);
  for (const double scale : {0.95, 1.5, 2.5, 4.0})
    starts.push_back(mpc_project(
        rate_tracking_start(plant, start, cache, moves, scale * q_cap), u_prev, cfg));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int rsx = 0; rsx < cfg.restarts; ++rsx) {
    Vec r(moves);
    for (Index m = 0; m < moves; ++m) r[m] = uniform(rng);
    starts.push_back(mpc_project(std::move(r), u_prev, cfg));
  }
  if (moves <= 2) {
    // tiny instances: seed from the {0, 1/2, 1} lattice for global coverage
    const double levels[3] = {0.0, 0.5, 1.0};
    Vec c(moves);
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < (moves == 2 ? 3 : 1); ++k) {
        c[0] = levels[i];
        if (moves == 2) c[1] = levels[k];
        starts.push_back(mpc_project(c, u_prev, cfg));
      }
  }

  // Score every start first, then spend the budget descending from the best.
  std::vector<std::pair<double, std::size_t>> ranked;
  ranked.reserve(starts.size());
  for (std::size_t sx = 0; sx < starts.size(); ++sx)
    ranked.emplace_back(sx == 0 ? j_warm : eval(starts[sx]), sx);
  std::sort(ranked.begin(), ranked.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  Vec best = starts[ranked.front().second];
  double j_best = ranked.front().first;
  int sweeps = 0;
  const std::size_t descents = std::min<std::size_t>(3, ranked.size());
  for (std::size_t dx = 0; dx < descents; ++dx) {
    if (eval.evals >= cfg.max_evals) break;
    Vec cur = starts[ranked[dx].second];
    double j_cur = ranked[dx].first;
    // Projected coordinate descent with a shrinking step.
    for (double step = 0.5; step >= 1.0 / 64.0 && eval.evals < cfg.max_evals;) {
      bool improved = false;
      ++sweeps;
      for (Index m = 0; m < moves && eval.evals < cfg.max_evals; ++m) {
        for (const double dir : {+1.0, -1.0}) {
          Vec trial = cur;
          trial[m] += dir * step;
          trial = mpc_project(std::move(trial), u_prev, cfg);
          if ((trial - cur).cwiseAbs().maxCoeff() < 1e-12) continue;
          const double j_trial = eval(trial);
          if (j_trial < j_cur - cfg.tol * (1.0 + std::abs(j_cur))) {
            cur = std::move(trial);
            j_cur = j_trial;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    if (j_cur < j_best) {
      j_best = j_cur;
      best = cur;
    }
  }

  MpcSolveResult out;
  out.u = std::move(best);
  out.diag.evaluations = eval.evals;
  out.diag.sweeps = sweeps;
  out.diag.j_warm = j_warm;
  out.diag.j_final = j_best;
  out.diag.t = start.t;
  return out;
}

MpcControl::MpcControl(const PlantSpec& plant, const RainSeries& rain, const EtSeries& et,
                       MpcConfig cfg, std::uint64_t seed)
    : plant_(&plant), rain_(&rain), et_(&et), cfg_(std::move(cfg)), rng_(seed) {
  cfg_.validate();
}

double MpcControl::control(const Measurement& y, double dt_ctrl_s) {
  (void)dt_ctrl_s;
  if (schedule_.empty()) {
    const Index moves = cfg_.prediction_intervals;
    Vec warm_base(moves);
    if (last_traj_.size() == 0) {
      warm_base.setConstant(u_prev_);
    } else {
      // shift out the applied segment, hold the tail value
      const Index applied = std::min<Index>(cfg_.control_horizon, last_traj_.size());
      for (Index m = 0; m < moves; ++m) {
        const Index src = m + applied;
        warm_base[m] = src < last_traj_.size() ? last_traj_[src]
                                               : last_traj_[last_traj_.size() - 1];
      }
    }
    MpcSolveResult res =
        mpc_solve(*plant_, *y.state, *rain_, *et_, cfg_, u_prev_, warm_base, rng_);
    diags_.push_back(res.diag);
    last_traj_ = res.u;
    for (int m = 0; m < cfg_.control_horizon; ++m) schedule_.push_back(res.u[m]);
  }
  const double u = schedule_.front();
  schedule_.pop_front();
  u_prev_ = u;
  return u;
}

}  // namespace stormrtc
