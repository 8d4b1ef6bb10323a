#include "stormrtc/controllers.hpp"

#include <Eigen/Cholesky>

#include <cmath>

namespace stormrtc {

DareResult solve_dare(const Mat& a, const Mat& b, const Mat& q, const Mat& r,
                      double tol, int max_iter) {
  DareResult out;
  Mat p = q;
  double theta = 1.0;
  double prev_residual = std::numeric_limits<double>::infinity();
  int worse_streak = 0;
  for (int it = 1; it <= max_iter; ++it) {
    const Mat btp = b.transpose() * p;
    const Mat gram = r + btp * b;
    const Mat gain = gram.llt().solve(btp * a);
    Mat next = a.transpose() * p * a - (btp * a).transpose() * gain + q;
    next = 0.5 * (next + next.transpose());  // keep symmetric under round-off
    const double residual = (next - p).cwiseAbs().maxCoeff();
    out.iterations = it;
    out.residual = residual;
    if (residual <= tol) {
      // p itself satisfies ||Ric(p) - p|| <= tol; return it unchanged.
      out.converged = true;
      break;
    }
    if (residual > prev_residual) {
      if (++worse_streak >= 3 && theta > 0.125) {
        theta *= 0.5;
        worse_streak = 0;
      }
    } else {
      worse_streak = 0;
    }
    prev_residual = residual;
    p += theta * (next - p);
  }
  out.p = p;
  const Mat btp = b.transpose() * p;
  out.k = (r + btp * b).llt().solve(btp * a);
  return out;
}

ReservoirPair discrete_reservoir_pair(const ReservoirSpec& spec, double h, double u_op,
                                      double dt_s) {
  const ReservoirLin lin = linearize_reservoir(spec, h, u_op);
  const double mu = 1.0 / (spec.area(h) * spec.porosity);
  return {1.0 - dt_s * lin.alpha * mu, -dt_s * lin.beta * mu};
}

namespace {
// Below a few centimeters of orifice head the valve has no usable authority
// and the stage-discharge kink dominates the linearization.
constexpr double kAuthorityHead = 0.05;  // m
}  // namespace

double DlqrControl::control(const Measurement& y, double dt_ctrl_s) {
  if (y.h_r - spec_->engagement_threshold() < kAuthorityHead) {
    u_prev_ = 0.0;
    return 0.0;
  }
  const ReservoirPair pair = discrete_reservoir_pair(*spec_, y.h_r, u_prev_, dt_ctrl_s);
  if (pair.b == 0.0) {
    u_prev_ = 0.0;
    return 0.0;
  }
  Mat a(1, 1), b(1, 1), q(1, 1), r(1, 1);
  a << pair.a;
  b << pair.b;
  q << cfg_.q;
  r << cfg_.r;
  const DareResult dare = solve_dare(a, b, q, r);
  if (!dare.converged) {
    ++warnings;
    return u_prev_;
  }
  const double u = clamp01(-dare.k(0, 0) * y.h_r);
  u_prev_ = u;
  return u;
}

double DlqiControl::control(const Measurement& y, double dt_ctrl_s) {
  if (y.h_r - spec_->engagement_threshold() < kAuthorityHead) {
    u_prev_ = 0.0;
    return 0.0;
  }
  const ReservoirPair pair = discrete_reservoir_pair(*spec_, y.h_r, u_prev_, dt_ctrl_s);
  if (pair.b == 0.0) {
    u_prev_ = 0.0;
    return 0.0;
  }
  Mat a(2, 2), b(2, 1), q(2, 2), r(1, 1);
  a << pair.a, 0.0, -1.0, 1.0;  // [A 0; -C I] with C = 1
  b << pair.b, 0.0;
  q << cfg_.q_state, 0.0, 0.0, cfg_.q_integral;
  r << cfg_.r;
  const DareResult dare = solve_dare(a, b, q, r);
  if (!dare.converged) {
    ++warnings;
    return u_prev_;
  }
  const double k_s = dare.k(0, 0), k_e = dare.k(0, 1);
  const double u_raw = -(k_s * y.h_r + k_e * e_int_);
  const double u = clamp01(u_raw);
  if (u == u_raw) e_int_ += cfg_.reference_m - y.h_r;  // freeze while saturated
  u_prev_ = u;
  return u;
}

}  // namespace stormrtc
