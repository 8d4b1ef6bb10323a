#include "stormrtc/channel.hpp"

#include <cmath>

namespace stormrtc {

namespace {
constexpr double kDepthEps = 1e-12;  // m, below this a reach carries no flow
}

void ChannelSpec::validate() const {
  const Index n = reaches();
  if (n < 1) throw ConfigError("channel needs at least one sub-reach");
  if (length.size() != n || n_manning.size() != n || bed_elev.size() != n)
    throw ConfigError("channel field dimensions disagree");
  if ((width.array() <= 0).any() || (length.array() <= 0).any() ||
      (n_manning.array() <= 0).any())
    throw ConfigError("channel widths, lengths and Manning n must be positive");
}

void ChannelSpec::finalize() {
  validate();
  const Index n = reaches();
  slope_op = Mat::Zero(n, n);
  slope_offset = Vec::Zero(n);
  for (Index i = 0; i + 1 < n; ++i) {
    slope_op(i, i) = 1.0 / length[i];
    slope_op(i, i + 1) = -1.0 / length[i];
    slope_offset[i] = (bed_elev[i] - bed_elev[i + 1]) / length[i];
  }
  slope_offset[n - 1] = outlet_slope;
}

ChannelSpec make_channel(Index reaches, double width_m, double reach_length_m,
                         double manning_n, double bed_slope, double outlet_slope) {
  ChannelSpec spec;
  spec.width = Vec::Constant(reaches, width_m);
  spec.length = Vec::Constant(reaches, reach_length_m);
  spec.n_manning = Vec::Constant(reaches, manning_n);
  spec.bed_elev.resize(reaches);
  for (Index i = 0; i < reaches; ++i)
    spec.bed_elev[i] = static_cast<double>(reaches - 1 - i) * reach_length_m * bed_slope;
  spec.outlet_slope = outlet_slope;
  spec.finalize();
  return spec;
}

void section_geometry(const ChannelSpec& spec, const Vec& h, Vec& area, Vec& r_h) {
  area = spec.width.cwiseProduct(h);
  r_h = area.cwiseQuotient(spec.width + 2.0 * h);
}

Vec surface_slopes(const ChannelSpec& spec, const Vec& h) {
  return spec.slope_op * h + spec.slope_offset;
}

Vec channel_outflows(const ChannelSpec& spec, const Vec& h) {
  const Index n = spec.reaches();
  Vec area, r_h;
  section_geometry(spec, h, area, r_h);
  const Vec s = surface_slopes(spec, h);
  Vec q = Vec::Zero(n);
  for (Index i = 0; i < n; ++i) {
    if (h[i] <= kDepthEps || s[i] <= 0.0) continue;
    q[i] = area[i] * std::pow(r_h[i], 2.0 / 3.0) * std::sqrt(s[i]) / spec.n_manning[i];
  }
  return q;
}

Vec channel_net_flux(const ChannelSpec& spec, const Vec& h, double upstream_m3s) {
  const Index n = spec.reaches();
  const Vec q = channel_outflows(spec, h);
  Vec dq(n);
  dq[0] = upstream_m3s - q[0];
  for (Index i = 1; i < n; ++i) dq[i] = q[i - 1] - q[i];
  return dq;
}

void channel_step(const ChannelSpec& spec, ChannelState& state, double upstream_m3s,
                  double dt_s, MassLedger& ledger) {
  const Index n = spec.reaches();
  const Vec q = channel_outflows(spec, state.h);
  ledger.inflow += upstream_m3s * dt_s;
  ledger.outflow += q[n - 1] * dt_s;
  for (Index i = 0; i < n; ++i) {
    const double inflow = (i == 0) ? upstream_m3s : q[i - 1];
    const double cell_area = spec.width[i] * spec.length[i];
    double h_new = state.h[i] + dt_s * (inflow - q[i]) / cell_area;
    if (!std::isfinite(h_new))
      throw SimulationError("channel state went non-finite; reduce dt (advisory: " +
                            std::to_string(channel_dt_advisory(spec, 1.0)) + " s)");
    if (h_new < 0.0) {
      ledger.clipped += -h_new * cell_area;
      h_new = 0.0;
    }
    state.h[i] = h_new;
  }
}

Mat channel_jacobian(const ChannelSpec& spec, const Vec& h0, double dt_s) {
  const Index n = spec.reaches();
  Mat jac = Mat::Identity(n, n);
  const Vec s = surface_slopes(spec, h0);
  for (Index i = 0; i < n; ++i) {
    if (h0[i] <= kDepthEps || s[i] <= 0.0) continue;  // floored rows: no flow, no slope
    const double w = spec.width[i];
    const double a = w * h0[i];
    const double r = a / (w + 2.0 * h0[i]);
    const double da = w;
    const double dr = w * w / ((w + 2.0 * h0[i]) * (w + 2.0 * h0[i]));
    const double sq = std::sqrt(s[i]);
    const double r23 = std::pow(r, 2.0 / 3.0);
    const double inv_n = 1.0 / spec.n_manning[i];
    // dq_i/dh through geometry and through the slope operator
    const double dq_geom = inv_n * sq * (da * r23 + a * (2.0 / 3.0) * std::pow(r, -1.0 / 3.0) * dr);
    const double dq_ds = inv_n * a * r23 / (2.0 * sq);
    const double dq_dhi = dq_geom + dq_ds * spec.slope_op(i, i);
    const double dq_dhn = (i + 1 < n) ? dq_ds * spec.slope_op(i, i + 1) : 0.0;

    const double inv_area_i = 1.0 / (spec.width[i] * spec.length[i]);
    jac(i, i) -= dt_s * inv_area_i * dq_dhi;
    if (i + 1 < n) jac(i, i + 1) -= dt_s * inv_area_i * dq_dhn;
    if (i + 1 < n) {
      const double inv_area_d = 1.0 / (spec.width[i + 1] * spec.length[i + 1]);
      jac(i + 1, i) += dt_s * inv_area_d * dq_dhi;
      jac(i + 1, i + 1) += dt_s * inv_area_d * dq_dhn;
    }
  }
  return jac;
}

double channel_storage_m3(const ChannelSpec& spec, const ChannelState& state) {
  return state.h.cwiseProduct(spec.width).cwiseProduct(spec.length).sum();
}

double channel_dt_advisory(const ChannelSpec& spec, double ref_depth_m) {
  double dt = 1e9;
  for (Index i = 0; i < spec.reaches(); ++i) {
    const double w = spec.width[i];
    const double a = w * ref_depth_m;
    const double r = a / (w + 2.0 * ref_depth_m);
    const double s = std::max(spec.slope_offset[i], 1e-4);
    const double v = std::pow(r, 2.0 / 3.0) * std::sqrt(s) / spec.n_manning[i];
    const double celerity = (5.0 / 3.0) * v;
    if (celerity > 0.0) dt = std::min(dt, spec.length[i] / celerity);
  }
  return dt;
}

}  // namespace stormrtc
