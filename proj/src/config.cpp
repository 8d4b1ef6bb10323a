#include "stormrtc/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace stormrtc {

using nlohmann::json;

namespace {

IdfCurve parse_idf(const json& j) {
  IdfCurve idf;
  idf.a = j.at("a").get<double>();
  idf.b = j.at("b").get<double>();
  idf.c = j.at("c").get<double>();
  idf.return_period_yr = j.value("return_period_yr", 0.0);
  idf.min_duration_min = j.value("min_duration_min", 5.0);
  idf.max_duration_min = j.value("max_duration_min", 1440.0);
  return idf;
}

VTiltedParams parse_v_tilted(const json& j) {
  VTiltedParams p;
  p.rows = j.at("rows").get<int>();
  p.cols = j.at("cols").get<int>();
  p.cell_size_m = j.at("cell_size_m").get<double>();
  p.hillslope_slope = j.value("hillslope_slope", 0.05);
  p.channel_slope = j.value("channel_slope", 0.02);
  if (j.contains("hillslope")) {
    const json& h = j.at("hillslope");
    p.n_hillslope = h.value("manning_n", p.n_hillslope);
    p.suction_mm = h.value("suction_mm", p.suction_mm);
    p.moisture_deficit = h.value("moisture_deficit", p.moisture_deficit);
    p.ksat_mm_h = h.value("ksat_mm_h", p.ksat_mm_h);
    p.h0_hillslope_mm = h.value("initial_abstraction_mm", p.h0_hillslope_mm);
  }
  if (j.contains("channel")) {
    const json& c = j.at("channel");
    p.n_channel = c.value("manning_n", p.n_channel);
    p.h0_channel_mm = c.value("initial_abstraction_mm", p.h0_channel_mm);
  }
  return p;
}

}  // namespace

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  try {
    ScenarioConfig cfg;
    cfg.schema_version = j.at("schema_version").get<int>();
    if (cfg.schema_version != 1)
      throw ConfigError("unsupported schema_version " + std::to_string(cfg.schema_version));
    cfg.name = j.value("name", std::string("scenario"));
    cfg.seed = j.value("seed", 0ULL);
    cfg.dt_s = j.at("dt_s").get<double>();
    cfg.duration_s = j.at("duration_s").get<double>();
    cfg.control_interval_s = j.value("control_interval_s", 900.0);
    if (j.contains("output")) {
      cfg.output.directory = j["output"].value("directory", std::string("out"));
      cfg.output.decimate = j["output"].value("decimate", 1);
    }

    const json& w = j.at("watershed");
    if (w.contains("generator")) {
      const json& g = w.at("generator");
      const std::string type = g.value("type", std::string("v_tilted"));
      if (type != "v_tilted") throw ConfigError("unknown watershed generator: " + type);
      cfg.watershed.generator = parse_v_tilted(g);
    } else if (w.contains("files")) {
      const json& f = w.at("files");
      WatershedFiles wf;
      wf.dem = f.at("dem").get<std::string>();
      wf.manning = f.at("manning").get<std::string>();
      wf.h0 = f.at("h0").get<std::string>();
      wf.ksat = f.at("ksat").get<std::string>();
      wf.suction = f.at("suction").get<std::string>();
      wf.dtheta = f.at("dtheta").get<std::string>();
      wf.pervious = f.at("pervious").get<std::string>();
      wf.dx = f.at("dx_m").get<double>();
      wf.dy = f.at("dy_m").get<double>();
      for (const auto& o : f.at("outlets"))
        wf.outlets.emplace_back(o.at(0).get<int>(), o.at(1).get<int>());
      cfg.watershed.files = std::move(wf);
    } else {
      throw ConfigError("watershed needs either a generator or files");
    }
    cfg.watershed.f_d_min_mm = w.value("f_d_min_mm", 5.0);
    cfg.watershed.f_d0_pervious_mm = w.value("f_d0_pervious_mm", 5.0);
    cfg.watershed.f_d0_impervious_mm = w.value("f_d0_impervious_mm", 10.0);

    const json& r = j.at("reservoir");
    cfg.reservoir.k_o = r.at("k_o").get<double>();
    cfg.reservoir.k_s = r.at("k_s").get<double>();
    cfg.reservoir.crest_m = r.at("crest_m").get<double>();
    cfg.reservoir.orifice_invert_m = r.value("orifice_invert_m", 0.0);
    if (r.contains("min_engagement_m"))
      cfg.reservoir.min_engagement_m = r["min_engagement_m"].get<double>();
    if (r.contains("orifice_diameter_m"))
      cfg.reservoir.orifice_diameter_m = r["orifice_diameter_m"].get<double>();
    cfg.reservoir.porosity = r.value("porosity", 1.0);
    if (r.contains("area_m2")) cfg.reservoir.area_m2 = r["area_m2"].get<double>();
    if (r.contains("stage_area_csv"))
      cfg.reservoir.stage_area_csv = r["stage_area_csv"].get<std::string>();
    cfg.reservoir.initial_depth_m = r.value("initial_depth_m", 0.0);

    const json& c = j.at("channel");
    cfg.channel.reaches = c.at("reaches").get<int>();
    cfg.channel.width_m = c.at("width_m").get<double>();
    cfg.channel.reach_length_m = c.at("reach_length_m").get<double>();
    cfg.channel.manning_n = c.at("manning_n").get<double>();
    cfg.channel.bed_slope = c.at("bed_slope").get<double>();
    cfg.channel.outlet_slope = c.value("outlet_slope", cfg.channel.bed_slope);

    const json& forcing = j.at("forcing");
    const json& rain = forcing.at("rain");
    cfg.rain.type = rain.at("type").get<std::string>();
    if (cfg.rain.type == "design_storms") {
      cfg.rain.gap_s = rain.value("gap_s", 43200.0);
      cfg.rain.step_s = rain.value("step_s", 1800.0);
      cfg.rain.lead_s = rain.value("lead_s", 0.0);
      for (const auto& s : rain.at("storms")) {
        StormSpec spec;
        spec.idf = parse_idf(s.at("idf"));
        spec.duration_s = s.at("duration_s").get<double>();
        spec.method = hyetograph_method_from_string(
            s.value("method", std::string("alternating_block")));
        cfg.rain.storms.push_back(spec);
      }
    } else if (cfg.rain.type == "csv") {
      cfg.rain.path = rain.at("path").get<std::string>();
      cfg.rain.fill_gaps = rain.value("fill_gaps", false);
      if (rain.contains("resample_to_s"))
        cfg.rain.resample_to_s = rain["resample_to_s"].get<double>();
    } else {
      throw ConfigError("unknown rain type: " + cfg.rain.type);
    }
    const json& et = forcing.at("et");
    cfg.et.type = et.at("type").get<std::string>();
    if (cfg.et.type == "constant") {
      cfg.et.rate_mm_per_day = et.at("rate_mm_per_day").get<double>();
    } else if (cfg.et.type == "csv") {
      cfg.et.path = et.at("path").get<std::string>();
    } else {
      throw ConfigError("unknown et type: " + cfg.et.type);
    }

    const json& ctrl = j.at("controllers");
    for (const auto& name : ctrl.at("list"))
      cfg.controllers.push_back(name.get<std::string>());
    if (ctrl.contains("onoff")) cfg.onoff.h_cr_m = ctrl["onoff"].value("h_cr_m", 3.0);
    if (ctrl.contains("detention")) {
      cfg.detention.t_d_h = ctrl["detention"].value("t_d_h", 6.0);
      cfg.detention.rain_threshold_mm_h =
          ctrl["detention"].value("rain_threshold_mm_h", 0.1);
    }
    if (ctrl.contains("dlqr")) {
      cfg.dlqr.q = ctrl["dlqr"].value("q", 1.0);
      cfg.dlqr.r = ctrl["dlqr"].value("r", 1.0);
    }
    if (ctrl.contains("dlqi")) {
      cfg.dlqi.q_state = ctrl["dlqi"].value("q_state", 1.0);
      cfg.dlqi.q_integral = ctrl["dlqi"].value("q_integral", 1.5e3);
      cfg.dlqi.r = ctrl["dlqi"].value("r", 1.0e2);
      cfg.dlqi.reference_m = ctrl["dlqi"].value("reference_m", 1.0);
    }
    if (ctrl.contains("mpc")) {
      const json& m = ctrl["mpc"];
      cfg.mpc.prediction_intervals = m.value("prediction_intervals", 8);
      cfg.mpc.control_horizon = m.value("control_horizon_intervals", 2);
      cfg.mpc.control_interval_s = m.value("control_interval_s", 3600.0);
      cfg.mpc.rho_u = m.value("rho_u", 1.0);
      cfg.mpc.rho_x = m.value("rho_x", 1.0);
      cfg.mpc.rho_r = m.value("rho_r", 1.0e3);
      cfg.mpc.rho_c = m.value("rho_c", 1.0e4);
      cfg.mpc.h_ref_r_m = m.value("h_ref_r_m", -1.0);
      cfg.mpc.h_ref_c_m = m.value("h_ref_c_m", 1.8);
      cfg.mpc.du_min = m.value("du_min", -1.0);
      cfg.mpc.du_max = m.value("du_max", 1.0);
      cfg.mpc.max_evals = m.value("max_evals", 250);
      cfg.mpc.tol = m.value("tol", 1e-6);
      cfg.mpc.restarts = m.value("restarts", 2);
      cfg.mpc.warm_noise_var = m.value("warm_noise_var", 0.2);
      cfg.mpc.internal_dt_s = m.value("internal_dt_s", 10.0);
    }

    if (j.contains("metrics")) cfg.h_c_lim_m = j["metrics"].value("h_c_lim_m", 1.8);
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError("config error in " + path + ": " + e.what());
  }
}

Scenario build_scenario(const ScenarioConfig& cfg) {
  Scenario s;
  s.cfg = cfg;

  if (cfg.watershed.generator) {
    s.plant.watershed = make_v_tilted(*cfg.watershed.generator);
  } else if (cfg.watershed.files) {
    const WatershedFiles& f = *cfg.watershed.files;
    s.plant.watershed =
        grid_from_files(f.dem, f.manning, f.h0, f.ksat, f.suction, f.dtheta, f.pervious,
                        f.dx, f.dy, f.outlets);
  } else {
    throw ConfigError("watershed source missing");
  }
  s.plant.watershed.f_d_min_mm = cfg.watershed.f_d_min_mm;
  s.plant.f_d0_pervious_mm = cfg.watershed.f_d0_pervious_mm;
  s.plant.f_d0_impervious_mm = cfg.watershed.f_d0_impervious_mm;

  ReservoirSpec& res = s.plant.reservoir;
  res.k_o = cfg.reservoir.k_o;
  res.k_s = cfg.reservoir.k_s;
  res.crest = cfg.reservoir.crest_m;
  res.orifice_invert = cfg.reservoir.orifice_invert_m;
  if (cfg.reservoir.min_engagement_m) {
    res.min_engage = *cfg.reservoir.min_engagement_m;
  } else if (cfg.reservoir.orifice_diameter_m) {
    res.min_engage = ReservoirSpec::engagement_from_diameter(*cfg.reservoir.orifice_diameter_m);
  } else {
    throw ConfigError("reservoir needs min_engagement_m or orifice_diameter_m");
  }
  res.porosity = cfg.reservoir.porosity;
  if (cfg.reservoir.stage_area_csv) {
    res.area = StageArea::from_csv(*cfg.reservoir.stage_area_csv);
  } else if (cfg.reservoir.area_m2) {
    res.area = StageArea::constant(*cfg.reservoir.area_m2);
  } else {
    throw ConfigError("reservoir needs area_m2 or stage_area_csv");
  }
  res.validate();
  s.plant.reservoir_h0_m = cfg.reservoir.initial_depth_m;

  s.plant.channel = make_channel(cfg.channel.reaches, cfg.channel.width_m,
                                 cfg.channel.reach_length_m, cfg.channel.manning_n,
                                 cfg.channel.bed_slope, cfg.channel.outlet_slope);

  if (cfg.rain.type == "design_storms") {
    s.rain = storm_train(cfg.rain.storms, cfg.rain.gap_s, cfg.rain.step_s, cfg.rain.lead_s);
  } else {
    s.rain = load_rain_csv(cfg.rain.path, cfg.rain.fill_gaps);
    if (cfg.rain.resample_to_s) s.rain = resample_hold(s.rain, *cfg.rain.resample_to_s);
  }
  s.rain.validate();

  if (cfg.et.type == "constant") {
    s.et = EtSeries::constant(cfg.et.rate_mm_per_day);
  } else {
    s.et = load_et_csv(cfg.et.path);
  }
  s.et.validate();
  return s;
}

std::vector<Finding> validate_scenario(const ScenarioConfig& cfg) {
  std::vector<Finding> findings;
  auto error = [&](const std::string& m) {
    findings.push_back({Finding::Severity::kError, m});
  };
  auto warn = [&](const std::string& m) {
    findings.push_back({Finding::Severity::kWarning, m});
  };

  if (cfg.dt_s <= 0.0) error("dt_s must be positive");
  if (cfg.duration_s <= 0.0) error("duration_s must be positive");
  if (cfg.control_interval_s <= 0.0) error("control_interval_s must be positive");
  if (cfg.dt_s > 0.0 && cfg.control_interval_s > 0.0) {
    const double ratio = cfg.control_interval_s / cfg.dt_s;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
      error("control interval must be a multiple of dt");
  }
  if (cfg.output.decimate < 1) error("decimate must be >= 1");
  if (cfg.controllers.empty()) error("controller list is empty");

  Scenario scenario;
  try {
    scenario = build_scenario(cfg);
  } catch (const std::exception& e) {
    error(e.what());
    return findings;
  }

  const double dt_w = watershed_dt_advisory(scenario.plant.watershed, 100.0);
  const double dt_r = reservoir_dt_advisory(scenario.plant.reservoir);
  const double dt_c = channel_dt_advisory(scenario.plant.channel,
                                          std::max(1.0, 2.0 * cfg.h_c_lim_m));
  const double advisory = std::min({dt_w, dt_r, dt_c});
  if (cfg.dt_s > advisory)
    warn("dt_s = " + std::to_string(cfg.dt_s) + " s exceeds the stability advisory " +
         std::to_string(advisory) + " s (watershed " + std::to_string(dt_w) +
         ", reservoir " + std::to_string(dt_r) + ", channel " + std::to_string(dt_c) + ")");
  if (std::find(cfg.controllers.begin(), cfg.controllers.end(), "mpc") !=
          cfg.controllers.end() &&
      cfg.mpc.internal_dt_s > advisory)
    warn("mpc internal dt exceeds the stability advisory");

  for (const auto& name : cfg.controllers) {
    static const char* known[] = {"passive", "onoff", "detention", "dlqr", "dlqi", "mpc"};
    if (std::find(std::begin(known), std::end(known), name) == std::end(known))
      error("unknown controller: " + name);
  }
  try {
    cfg.mpc.validate();
  } catch (const std::exception& e) {
    error(e.what());
  }
  if (cfg.h_c_lim_m <= 0.0) error("h_c_lim_m must be positive");
  if (cfg.onoff.h_cr_m <= 0.0) error("onoff h_cr must be positive");
  if (cfg.detention.t_d_h < 0.0) error("detention hold must be non-negative");
  return findings;
}

}  // namespace stormrtc
