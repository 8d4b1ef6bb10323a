#pragma once

#include <limits>
#include <string>

#include "stormrtc/common.hpp"
#include "stormrtc/coupled.hpp"
#include "stormrtc/reservoir.hpp"

namespace stormrtc {

class PassiveControl final : public Controller {
 public:
  double control(const Measurement&, double) override { return 1.0; }
  std::string name() const override { return "passive"; }
};

struct OnOffConfig {
  double h_cr_m = 3.0;
};

class OnOffControl final : public Controller {
 public:
  explicit OnOffControl(OnOffConfig cfg) : cfg_(cfg) {}
  double control(const Measurement& y, double) override {
    return y.h_r >= cfg_.h_cr_m ? 1.0 : 0.0;
  }
  std::string name() const override { return "onoff"; }

 private:
  OnOffConfig cfg_;
};

struct DetentionConfig {
  double t_d_h = 6.0;
  double rain_threshold_mm_h = 0.1;
};

/// Closed during any rain event and for t_d afterwards, otherwise open.
class DetentionControl final : public Controller {
 public:
  explicit DetentionControl(DetentionConfig cfg) : cfg_(cfg) {}
  double control(const Measurement& y, double) override {
    if (y.rain_mm_h > cfg_.rain_threshold_mm_h) {
      last_rain_t_ = y.t;
      return 0.0;
    }
    if (last_rain_t_ == -std::numeric_limits<double>::infinity()) return 1.0;
    return (y.t - last_rain_t_) > cfg_.t_d_h * kSecondsPerHour ? 1.0 : 0.0;
  }
  std::string name() const override { return "detention"; }

 private:
  DetentionConfig cfg_;
  double last_rain_t_ = -std::numeric_limits<double>::infinity();
};

struct DareResult {
  Mat p;
  Mat k;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

/// Damped fixed-point iteration of the Riccati map from P0 = Q.
/// K = (R + B'PB)^{-1} B'PA.
DareResult solve_dare(const Mat& a, const Mat& b, const Mat& q, const Mat& r,
                      double tol = 1e-10, int max_iter = 10000);

struct LqrConfig {
  double q = 1.0;  // state cost (Q = C'C with C = 1)
  double r = 1.0;
};

/// Discretizes the freshly linearized reservoir pair at the control interval
/// and applies u = clip(-K h, 0, 1); falls back to the previous command when
/// the DARE does not converge.
class DlqrControl final : public Controller {
 public:
  DlqrControl(const ReservoirSpec& spec, LqrConfig cfg) : spec_(&spec), cfg_(cfg) {}
  double control(const Measurement& y, double dt_ctrl_s) override;
  std::string name() const override { return "dlqr"; }

 private:
  const ReservoirSpec* spec_;
  LqrConfig cfg_;
  double u_prev_ = 1.0;
};

struct DlqiConfig {
  double q_state = 1.0;
  double q_integral = 1.5e3;
  double r = 1.0e2;
  double reference_m = 1.0;
};

/// Servo LQ regulator on the reservoir depth augmented with the tracking
/// error integral; the integrator freezes while the command saturates.
class DlqiControl final : public Controller {
 public:
  DlqiControl(const ReservoirSpec& spec, DlqiConfig cfg) : spec_(&spec), cfg_(cfg) {}
  double control(const Measurement& y, double dt_ctrl_s) override;
  std::string name() const override { return "dlqi"; }
  /// Integral error in m*s.
  double integral_error(double dt_ctrl_s) const { return e_int_ * dt_ctrl_s; }

 private:
  const ReservoirSpec* spec_;
  DlqiConfig cfg_;
  double e_int_ = 0.0;  // per-interval units, consistent with the synthesis pair
  double u_prev_ = 1.0;
};

struct ReservoirPair {
  double a = 1.0;
  double b = 0.0;
};

/// Discrete (A^r, B^r) at the measured depth about the last command.
ReservoirPair discrete_reservoir_pair(const ReservoirSpec& spec, double h, double u_op,
                                      double dt_s);

}  // namespace stormrtc
