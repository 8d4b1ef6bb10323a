#pragma once

#include <Eigen/SparseCore>

#include <string>
#include <vector>

#include "stormrtc/common.hpp"

namespace stormrtc {

/// Static per-cell hydrology of the gridded rainfall-runoff plant.
/// Cells are row-major; derived routing fields are built by finalize().
struct WatershedGrid {
  int rows = 0;
  int cols = 0;
  double dx = 0.0;  // m
  double dy = 0.0;  // m

  Arr dem;         // m
  Arr n_manning;   // s m^-1/3
  Arr h0;          // initial abstraction, mm
  Arr ksat;        // mm/h (0 on impervious cells)
  Arr suction;     // mm
  Arr dtheta;      // moisture deficit, -
  Eigen::Array<bool, Eigen::Dynamic, 1> pervious;
  std::vector<Index> outlets;  // flat indices, must be boundary cells

  double f_d_min_mm = 5.0;
  double min_slope = 1e-4;

  // Derived by finalize():
  Arr filled_dem;                 // m, sink-filled
  Arr slope;                      // m/m, steepest descent (outlets: normal-flow)
  std::vector<Index> downstream;  // flat index, -1 for outlets
  Arr conveyance;                 // m^3/s per mm^{5/3}: 1e-5 * (dx+dy)/2 * sqrt(s0) / n

  Index size() const { return static_cast<Index>(rows) * cols; }
  double cell_area() const { return dx * dy; }
  Index flat(int r, int c) const { return static_cast<Index>(r) * cols + c; }
  bool is_outlet(Index i) const;

  /// Fills sinks (priority flood from the outlets with an epsilon gradient),
  /// derives D8 directions, slopes, and the lumped conveyance.
  void finalize();

  /// Direction boolean matrix: q_in = B * q_out.
  Eigen::SparseMatrix<double> direction_matrix() const;
};

struct VTiltedParams {
  int rows = 50;
  int cols = 81;  // odd; the center column is the channel
  double cell_size_m = 20.0;
  double hillslope_slope = 0.05;  // x direction, toward the channel
  double channel_slope = 0.02;    // y direction, toward the outlet

  double n_hillslope = 0.30;
  double suction_mm = 110.0;
  double moisture_deficit = 0.453;
  double ksat_mm_h = 10.92;
  double h0_hillslope_mm = 10.0;

  double n_channel = 0.018;
  double h0_channel_mm = 0.0;
};

/// Two tilted pervious planes draining to a central impervious channel
/// column that drains to a single outlet cell at the downstream end.
WatershedGrid make_v_tilted(const VTiltedParams& p);

/// Loads per-cell matrices from row-major space-delimited text files.
/// `pervious` entries are 0/1.
WatershedGrid grid_from_files(const std::string& dem_path, const std::string& n_path,
                              const std::string& h0_path, const std::string& ksat_path,
                              const std::string& suction_path,
                              const std::string& dtheta_path,
                              const std::string& pervious_path, double dx, double dy,
                              const std::vector<std::pair<int, int>>& outlets);

struct WatershedState {
  Arr h_ef;            // ponded depth, mm
  Arr f_d;             // accumulated infiltration depth, mm
  double q_out = 0.0;  // outlet discharge, m^3/s (closure of h_ef)
};

WatershedState watershed_initial_state(const WatershedGrid& grid, double f_d0_pervious_mm,
                                       double f_d0_impervious_mm);

/// Green-Ampt infiltration capacity, mm/h. Requires f_d > 0.
double infiltration_capacity(double ksat_mm_h, double suction_mm, double dtheta,
                             double h_ef_mm, double f_d_mm);

struct InfiltrationStep {
  double rate_mm_h = 0.0;  // f; negative while the soil dries
  double f_d_mm = 0.0;     // updated accumulated depth
};

/// One explicit infiltration update for a cell. `net_in_mm_h` is the water
/// arriving at the surface this step (inflow + rain - outflow); ponded depth
/// joins the supply so f never exceeds the water actually available. Drying
/// (negative f) is capped at the ET rate and at the f_d_min floor.
InfiltrationStep infiltration_step(double capacity_mm_h, double net_in_mm_h,
                                   double et_mm_h, double h_ef_mm, double f_d_mm,
                                   double f_d_min_mm, double dt_s);

/// Kinematic cell outflow, m^3/s: conveyance * max(h_ef - h0, 0)^(5/3).
double cell_outflow(double h_ef_mm, double h0_mm, double conveyance);

/// Advances the whole grid one explicit step. Rain/ET are uniform rates.
void watershed_step(const WatershedGrid& grid, WatershedState& state, double rain_mm_h,
                    double et_mm_day, double dt_s, MassLedger& ledger);

/// Ponded storage over the grid, m^3.
double watershed_storage_m3(const WatershedGrid& grid, const WatershedState& state);
/// Soil storage (accumulated infiltration) over the grid, m^3.
double watershed_soil_storage_m3(const WatershedGrid& grid, const WatershedState& state);

/// Largest stable explicit step (with a safety factor of 2) for a reference
/// ponded depth, s.
double watershed_dt_advisory(const WatershedGrid& grid, double ref_depth_mm);

}  // namespace stormrtc
