#pragma once

#include "stormrtc/common.hpp"

namespace stormrtc {

/// 1-D chain of rectangular sub-reaches draining toward the last reach.
struct ChannelSpec {
  Vec width;      // m, per reach
  Vec length;     // m
  Vec n_manning;  // s m^-1/3
  Vec bed_elev;   // m, decreasing downstream
  double outlet_slope = 0.0;

  // Built by finalize(): water-surface slope s(h) = slope_op * h + slope_offset.
  Mat slope_op;
  Vec slope_offset;

  Index reaches() const { return width.size(); }
  void finalize();
  void validate() const;
};

/// Uniform geometry helper; bed elevations follow the bottom slope.
ChannelSpec make_channel(Index reaches, double width_m, double reach_length_m,
                         double manning_n, double bed_slope, double outlet_slope);

struct ChannelState {
  Vec h;  // m, per reach
};

/// Rectangular section: a = w*h, r_h = a / (w + 2h).
void section_geometry(const ChannelSpec& spec, const Vec& h, Vec& area, Vec& r_h);

/// Water-surface slopes, last entry pinned to the outlet boundary slope.
/// Entries may be negative; flows floor them at zero.
Vec surface_slopes(const ChannelSpec& spec, const Vec& h);

/// Manning outflow per reach, m^3/s (adverse surface slopes give zero flow).
Vec channel_outflows(const ChannelSpec& spec, const Vec& h);

/// Net flux per reach: reach i receives q_{i-1} (the first receives the
/// upstream inflow) and loses q_i.
Vec channel_net_flux(const ChannelSpec& spec, const Vec& h, double upstream_m3s);

/// Explicit Euler depth update with zero-floor clipping.
void channel_step(const ChannelSpec& spec, ChannelState& state, double upstream_m3s,
                  double dt_s, MassLedger& ledger);

/// Jacobian of channel_step's map h -> h' about h0 (tridiagonal).
Mat channel_jacobian(const ChannelSpec& spec, const Vec& h0, double dt_s);

double channel_storage_m3(const ChannelSpec& spec, const ChannelState& state);

/// Advisory explicit step from the kinematic celerity at a reference depth.
double channel_dt_advisory(const ChannelSpec& spec, double ref_depth_m);

}  // namespace stormrtc
