#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stormrtc/controllers.hpp"
#include "stormrtc/coupled.hpp"
#include "stormrtc/forcing.hpp"
#include "stormrtc/mpc.hpp"

namespace stormrtc {

struct WatershedFiles {
  std::string dem, manning, h0, ksat, suction, dtheta, pervious;
  double dx = 0.0, dy = 0.0;
  std::vector<std::pair<int, int>> outlets;
};

struct WatershedConfig {
  // exactly one of generator / files
  std::optional<VTiltedParams> generator;
  std::optional<WatershedFiles> files;
  double f_d_min_mm = 5.0;
  double f_d0_pervious_mm = 5.0;
  double f_d0_impervious_mm = 10.0;
};

struct ReservoirConfig {
  double k_o = 0.0;
  double k_s = 0.0;
  double crest_m = 0.0;
  double orifice_invert_m = 0.0;
  std::optional<double> min_engagement_m;
  std::optional<double> orifice_diameter_m;  // h_m = 0.2 * diameter
  double porosity = 1.0;
  std::optional<double> area_m2;
  std::optional<std::string> stage_area_csv;
  double initial_depth_m = 0.0;
};

struct ChannelConfig {
  int reaches = 0;
  double width_m = 0.0;
  double reach_length_m = 0.0;
  double manning_n = 0.0;
  double bed_slope = 0.0;
  double outlet_slope = 0.0;
};

struct RainConfig {
  std::string type;  // "design_storms" | "csv"
  // design_storms
  std::vector<StormSpec> storms;
  double gap_s = 43200.0;
  double step_s = 1800.0;
  double lead_s = 0.0;
  // csv
  std::string path;
  bool fill_gaps = false;
  std::optional<double> resample_to_s;
};

struct EtConfig {
  std::string type = "constant";  // "constant" | "csv"
  double rate_mm_per_day = 0.0;
  std::string path;
};

struct OutputConfig {
  std::string directory = "out";
  int decimate = 1;
};

struct ScenarioConfig {
  int schema_version = 1;
  std::string name;
  std::uint64_t seed = 0;
  double dt_s = 1.0;
  double duration_s = 0.0;
  double control_interval_s = 900.0;
  OutputConfig output;
  WatershedConfig watershed;
  ReservoirConfig reservoir;
  ChannelConfig channel;
  RainConfig rain;
  EtConfig et;
  std::vector<std::string> controllers;
  OnOffConfig onoff;
  DetentionConfig detention;
  LqrConfig dlqr;
  DlqiConfig dlqi;
  MpcConfig mpc;
  double h_c_lim_m = 1.8;
};

ScenarioConfig load_config(const std::string& path);

/// Everything needed to run: plant, forcing, settings.
struct Scenario {
  ScenarioConfig cfg;
  PlantSpec plant;
  RainSeries rain;
  EtSeries et;
};

Scenario build_scenario(const ScenarioConfig& cfg);

struct Finding {
  enum class Severity { kError, kWarning };
  Severity severity = Severity::kError;
  std::string message;
};

/// Checks type invariants and the time-step advisories without simulating.
/// Errors here are exactly the configs `run` refuses to start on.
std::vector<Finding> validate_scenario(const ScenarioConfig& cfg);

}  // namespace stormrtc
