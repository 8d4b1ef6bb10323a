#include "stormrtc/watershed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

namespace stormrtc {

namespace {

constexpr double kFillEps = 1e-6;  // m, epsilon gradient for sink filling

struct Neighbor {
  int dr, dc;
};
constexpr Neighbor kNeighbors[8] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                                    {0, 1},   {1, -1}, {1, 0},  {1, 1}};

}  // namespace

bool WatershedGrid::is_outlet(Index i) const {
  return std::find(outlets.begin(), outlets.end(), i) != outlets.end();
}

void WatershedGrid::finalize() {
  const Index q = size();
  if (rows < 1 || cols < 1) throw ConfigError("watershed grid must be non-empty");
  if (dx <= 0.0 || dy <= 0.0) throw ConfigError("cell sizes must be positive");
  if (dem.size() != q || n_manning.size() != q || h0.size() != q || ksat.size() != q ||
      suction.size() != q || dtheta.size() != q || pervious.size() != q)
    throw ConfigError("watershed field dimensions do not match the grid");
  if (!dem.isFinite().all()) throw ConfigError("DEM contains non-finite values");
  if ((n_manning <= 0.0).any()) throw ConfigError("Manning n must be positive");
  if (outlets.empty()) throw ConfigError("at least one outlet cell is required");
  for (Index o : outlets) {
    const int r = static_cast<int>(o / cols), c = static_cast<int>(o % cols);
    if (r != 0 && r != rows - 1 && c != 0 && c != cols - 1)
      throw ConfigError("outlet cells must lie on the grid boundary");
  }

  // Priority flood seeded at the outlets: every cell ends with a strictly
  // descending path to an outlet.
  filled_dem = dem;
  std::vector<char> visited(static_cast<std::size_t>(q), 0);
  using Entry = std::pair<double, Index>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  for (Index o : outlets) {
    visited[static_cast<std::size_t>(o)] = 1;
    pq.emplace(filled_dem[o], o);
  }
  while (!pq.empty()) {
    const auto [elev, i] = pq.top();
    pq.pop();
    const int r = static_cast<int>(i / cols), c = static_cast<int>(i % cols);
    for (const auto& nb : kNeighbors) {
      const int rr = r + nb.dr, cc = c + nb.dc;
      if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
      const Index j = flat(rr, cc);
      if (visited[static_cast<std::size_t>(j)]) continue;
      visited[static_cast<std::size_t>(j)] = 1;
      filled_dem[j] = std::max(dem[j], elev + kFillEps);
      pq.emplace(filled_dem[j], j);
    }
  }

  const double diag = std::hypot(dx, dy);
  slope.resize(q);
  downstream.assign(static_cast<std::size_t>(q), -1);
  for (Index i = 0; i < q; ++i) {
    const int r = static_cast<int>(i / cols), c = static_cast<int>(i % cols);
    if (is_outlet(i)) {
      // Normal-flow boundary: continue the steepest incoming gradient.
      double best = 0.0;
      for (const auto& nb : kNeighbors) {
        const int rr = r + nb.dr, cc = c + nb.dc;
        if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
        const double dist = (nb.dr != 0 && nb.dc != 0) ? diag : (nb.dr != 0 ? dy : dx);
        best = std::max(best, (filled_dem[flat(rr, cc)] - filled_dem[i]) / dist);
      }
      slope[i] = std::max(best, min_slope);
      continue;
    }
    double best = 0.0;
    Index best_j = -1;
    for (const auto& nb : kNeighbors) {
      const int rr = r + nb.dr, cc = c + nb.dc;
      if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
      const Index j = flat(rr, cc);
      const double dist = (nb.dr != 0 && nb.dc != 0) ? diag : (nb.dr != 0 ? dy : dx);
      const double s = (filled_dem[i] - filled_dem[j]) / dist;
      if (s > best) {
        best = s;
        best_j = j;
      }
    }
    if (best_j < 0)
      throw ConfigError("flat region at cell " + std::to_string(i) +
                        " could not be resolved by the epsilon-gradient fill");
    slope[i] = std::max(best, min_slope);
    downstream[static_cast<std::size_t>(i)] = best_j;
  }

  // Lumped conveyance, Eq.-style: k_f * (dx+dy)/2 * sqrt(s0) / n with k_f=1e-5;
  // applied to max(h_ef-h0,0)^{5/3} in mm it yields a flux in m^3/s.
  conveyance = 1e-5 * 0.5 * (dx + dy) * slope.sqrt() / n_manning;
}

Eigen::SparseMatrix<double> WatershedGrid::direction_matrix() const {
  const Index q = size();
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(q));
  for (Index j = 0; j < q; ++j) {
    const Index i = downstream[static_cast<std::size_t>(j)];
    if (i >= 0) trips.emplace_back(i, j, 1.0);
  }
  Eigen::SparseMatrix<double> b(q, q);
  b.setFromTriplets(trips.begin(), trips.end());
  return b;
}

WatershedGrid make_v_tilted(const VTiltedParams& p) {
  if (p.cols % 2 == 0) throw ConfigError("v-tilted grid needs an odd column count");
  WatershedGrid g;
  g.rows = p.rows;
  g.cols = p.cols;
  g.dx = g.dy = p.cell_size_m;
  const Index q = g.size();
  g.dem.resize(q);
  g.n_manning.resize(q);
  g.h0.resize(q);
  g.ksat.resize(q);
  g.suction.resize(q);
  g.dtheta.resize(q);
  g.pervious.resize(q);

  const int center = p.cols / 2;
  for (int r = 0; r < p.rows; ++r) {
    for (int c = 0; c < p.cols; ++c) {
      const Index i = g.flat(r, c);
      const double channel_elev = (p.rows - 1 - r) * p.cell_size_m * p.channel_slope;
      const double off = std::abs(c - center) * p.cell_size_m * p.hillslope_slope;
      g.dem[i] = channel_elev + off;
      const bool channel = (c == center);
      g.pervious[i] = !channel;
      g.n_manning[i] = channel ? p.n_channel : p.n_hillslope;
      g.h0[i] = channel ? p.h0_channel_mm : p.h0_hillslope_mm;
      g.ksat[i] = channel ? 0.0 : p.ksat_mm_h;
      g.suction[i] = channel ? 0.0 : p.suction_mm;
      g.dtheta[i] = channel ? 0.0 : p.moisture_deficit;
    }
  }
  g.outlets = {g.flat(p.rows - 1, center)};
  g.finalize();
  return g;
}

namespace {

Arr read_matrix_file(const std::string& path, int& rows, int& cols) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::vector<double> values;
  std::string line;
  rows = 0;
  cols = -1;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (row.empty()) continue;
    if (cols < 0) cols = static_cast<int>(row.size());
    if (static_cast<int>(row.size()) != cols)
      throw ConfigError(path + ": ragged row " + std::to_string(rows + 1));
    values.insert(values.end(), row.begin(), row.end());
    ++rows;
  }
  if (rows == 0) throw ConfigError(path + ": no data");
  return Eigen::Map<Arr>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace

WatershedGrid grid_from_files(const std::string& dem_path, const std::string& n_path,
                              const std::string& h0_path, const std::string& ksat_path,
                              const std::string& suction_path,
                              const std::string& dtheta_path,
                              const std::string& pervious_path, double dx, double dy,
                              const std::vector<std::pair<int, int>>& outlets) {
  WatershedGrid g;
  g.dx = dx;
  g.dy = dy;
  int r0 = 0, c0 = 0;
  g.dem = read_matrix_file(dem_path, g.rows, g.cols);
  auto expect = [&](const std::string& path) {
    Arr a = read_matrix_file(path, r0, c0);
    if (r0 != g.rows || c0 != g.cols)
      throw ConfigError(path + ": dimensions differ from the DEM");
    return a;
  };
  g.n_manning = expect(n_path);
  g.h0 = expect(h0_path);
  g.ksat = expect(ksat_path);
  g.suction = expect(suction_path);
  g.dtheta = expect(dtheta_path);
  const Arr perv = expect(pervious_path);
  g.pervious = perv > 0.5;
  for (const auto& [r, c] : outlets) {
    if (r < 0 || r >= g.rows || c < 0 || c >= g.cols)
      throw ConfigError("outlet cell outside the grid");
    g.outlets.push_back(g.flat(r, c));
  }
  g.finalize();
  return g;
}

WatershedState watershed_initial_state(const WatershedGrid& grid, double f_d0_pervious_mm,
                                       double f_d0_impervious_mm) {
  WatershedState s;
  s.h_ef = Arr::Zero(grid.size());
  s.f_d.resize(grid.size());
  for (Index i = 0; i < grid.size(); ++i)
    s.f_d[i] = std::max(grid.pervious[i] ? f_d0_pervious_mm : f_d0_impervious_mm,
                        grid.f_d_min_mm);
  s.q_out = 0.0;
  return s;
}

double infiltration_capacity(double ksat_mm_h, double suction_mm, double dtheta,
                             double h_ef_mm, double f_d_mm) {
  if (!(f_d_mm > 0.0)) throw SimulationError("infiltration capacity needs f_d > 0");
  return ksat_mm_h * (1.0 + (suction_mm + h_ef_mm) * dtheta / f_d_mm);
}

InfiltrationStep infiltration_step(double capacity_mm_h, double net_in_mm_h,
                                   double et_mm_h, double h_ef_mm, double f_d_mm,
                                   double f_d_min_mm, double dt_s) {
  const double dt_h = dt_s / kSecondsPerHour;
  const double supply = net_in_mm_h - et_mm_h + h_ef_mm / dt_h;
  double f = std::min(capacity_mm_h, supply);
  // Drying is limited by the ET flux and by the f_d floor.
  f = std::max(f, -et_mm_h);
  f = std::max(f, (f_d_min_mm - f_d_mm) / dt_h);
  return {f, f_d_mm + f * dt_h};
}

double cell_outflow(double h_ef_mm, double h0_mm, double conveyance) {
  const double excess = h_ef_mm - h0_mm;
  if (excess <= 0.0) return 0.0;
  return conveyance * std::pow(excess, 5.0 / 3.0);
}

void watershed_step(const WatershedGrid& grid, WatershedState& state, double rain_mm_h,
                    double et_mm_day, double dt_s, MassLedger& ledger) {
  const Index q = grid.size();
  const double dt_h = dt_s / kSecondsPerHour;
  const double area = grid.cell_area();
  const double flux_to_rate = 3.6e6 / area;  // m^3/s -> mm/h over one cell
  const double vol_per_mm = area / 1000.0;   // mm over one cell -> m^3
  const double et_mm_h = et_mm_day / kHoursPerDay;

  // Outflow flux per cell at the current state, then scatter to receivers.
  static thread_local std::vector<double> out_rate, in_rate;
  out_rate.assign(static_cast<std::size_t>(q), 0.0);
  in_rate.assign(static_cast<std::size_t>(q), 0.0);
  double outlet_flux = 0.0;
  for (Index i = 0; i < q; ++i) {
    const double flux = cell_outflow(state.h_ef[i], grid.h0[i], grid.conveyance[i]);
    out_rate[static_cast<std::size_t>(i)] = flux * flux_to_rate;
    const Index ds = grid.downstream[static_cast<std::size_t>(i)];
    if (ds >= 0)
      in_rate[static_cast<std::size_t>(ds)] += flux * flux_to_rate;
    else
      outlet_flux += flux;
  }

  double clipped_mm = 0.0, infil_mm = 0.0, et_mm = 0.0;
  for (Index i = 0; i < q; ++i) {
    const std::size_t ii = static_cast<std::size_t>(i);
    const double et_pot = grid.pervious[i] ? et_mm_h : 0.0;
    const double cap = grid.ksat[i] <= 0.0
                           ? 0.0
                           : infiltration_capacity(grid.ksat[i], grid.suction[i],
                                                   grid.dtheta[i], state.h_ef[i],
                                                   state.f_d[i]);
    const double net_in = in_rate[ii] + rain_mm_h - out_rate[ii];
    const InfiltrationStep inf = infiltration_step(cap, net_in, et_pot, state.h_ef[i],
                                                   state.f_d[i], grid.f_d_min_mm, dt_s);
    // ET drawn from the surface only up to what is actually there.
    const double et_app =
        std::min(et_pot, std::max(0.0, state.h_ef[i] / dt_h + net_in - inf.rate_mm_h));
    double h_new = state.h_ef[i] + dt_h * (net_in - et_app - inf.rate_mm_h);
    if (!std::isfinite(h_new))
      throw SimulationError(
          "watershed state went non-finite; reduce dt (advisory: " +
          std::to_string(watershed_dt_advisory(grid, 100.0)) + " s)");
    if (h_new < 0.0) {
      clipped_mm += -h_new;
      h_new = 0.0;
    }
    state.h_ef[i] = h_new;
    state.f_d[i] = inf.f_d_mm;
    infil_mm += inf.rate_mm_h * dt_h;
    et_mm += et_app * dt_h;
  }

  ledger.rain += rain_mm_h * dt_h * vol_per_mm * static_cast<double>(q);
  ledger.et += et_mm * vol_per_mm;
  ledger.infiltration += infil_mm * vol_per_mm;
  ledger.outflow += outlet_flux * dt_s;
  ledger.clipped += clipped_mm * vol_per_mm;

  double new_outlet = 0.0;
  for (Index o : grid.outlets)
    new_outlet += cell_outflow(state.h_ef[o], grid.h0[o], grid.conveyance[o]);
  state.q_out = new_outlet;
}

double watershed_storage_m3(const WatershedGrid& grid, const WatershedState& state) {
  return state.h_ef.sum() * grid.cell_area() / 1000.0;
}

double watershed_soil_storage_m3(const WatershedGrid& grid, const WatershedState& state) {
  return state.f_d.sum() * grid.cell_area() / 1000.0;
}

double watershed_dt_advisory(const WatershedGrid& grid, double ref_depth_mm) {
  // dq/dh in 1/h for the reference depth; stable explicit step with margin 2.
  double worst = 0.0;
  const double flux_to_rate = 3.6e6 / grid.cell_area();
  for (Index i = 0; i < grid.size(); ++i) {
    const double dqdh = grid.conveyance[i] * flux_to_rate * (5.0 / 3.0) *
                        std::pow(ref_depth_mm, 2.0 / 3.0);
    worst = std::max(worst, dqdh);
  }
  if (worst <= 0.0) return 1e9;
  return 0.5 * kSecondsPerHour / worst;
}

}  // namespace stormrtc
