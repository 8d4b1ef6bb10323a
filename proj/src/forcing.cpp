#include "stormrtc/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

namespace stormrtc {

double RainSeries::at(double t) const {
  if (step <= 0.0 || intensity.empty()) return 0.0;
  const double rel = t - t0;
  if (rel < 0.0) return 0.0;
  const auto idx = static_cast<std::ptrdiff_t>(std::floor(rel / step));
  if (idx < 0 || idx >= static_cast<std::ptrdiff_t>(intensity.size())) return 0.0;
  return intensity[static_cast<std::size_t>(idx)];
}

double RainSeries::cumulative_depth_mm() const {
  double sum = 0.0;
  for (double i : intensity) sum += i;
  return sum * step / kSecondsPerHour;
}

void RainSeries::validate() const {
  if (step <= 0.0) throw ConfigError("rain series step must be positive");
  for (std::size_t k = 0; k < intensity.size(); ++k) {
    if (!(intensity[k] >= 0.0))
      throw ConfigError("negative intensity at row " + std::to_string(k + 1));
  }
}

EtSeries EtSeries::constant(double rate_mm_per_day) {
  EtSeries s;
  s.constant_rate = rate_mm_per_day;
  return s;
}

double EtSeries::at(double t) const {
  if (rate.empty()) return constant_rate;
  const double rel = t - t0;
  if (rel < 0.0) return rate.front();
  const auto idx = static_cast<std::ptrdiff_t>(std::floor(rel / step));
  if (idx >= static_cast<std::ptrdiff_t>(rate.size())) return rate.back();
  return rate[static_cast<std::size_t>(idx)];
}

void EtSeries::validate() const {
  if (constant_rate < 0.0) throw ConfigError("ET rate must be non-negative");
  for (double r : rate)
    if (!(r >= 0.0)) throw ConfigError("ET rate must be non-negative");
}

double IdfCurve::intensity_mm_h(double duration_min) const {
  if (duration_min < min_duration_min || duration_min > max_duration_min) {
    throw ConfigError("duration " + std::to_string(duration_min) +
                      " min outside IDF validity range [" +
                      std::to_string(min_duration_min) + ", " +
                      std::to_string(max_duration_min) + "]");
  }
  return a / std::pow(duration_min + b, c);
}

HyetographMethod hyetograph_method_from_string(const std::string& s) {
  if (s == "constant") return HyetographMethod::kConstant;
  if (s == "alternating_block" || s == "alternating-block")
    return HyetographMethod::kAlternatingBlock;
  throw ConfigError("unknown hyetograph method: " + s);
}

RainSeries design_storm(const IdfCurve& idf, double duration_s, double step_s,
                        HyetographMethod method) {
  if (duration_s <= 0.0 || step_s <= 0.0)
    throw ConfigError("design storm duration and step must be positive");
  const double ratio = duration_s / step_s;
  const auto n = static_cast<std::size_t>(std::llround(ratio));
  if (n == 0 || std::abs(ratio - static_cast<double>(n)) > 1e-9)
    throw ConfigError("design storm duration must be a multiple of the step");

  RainSeries out;
  out.step = step_s;
  out.intensity.assign(n, 0.0);

  if (method == HyetographMethod::kConstant) {
    const double i0 = idf.intensity_mm_h(duration_s / 60.0);
    std::fill(out.intensity.begin(), out.intensity.end(), i0);
    return out;
  }

  // Alternating block: incremental depths from the cumulative IDF depth
  // D(d) = i(d) * d, largest block at the center, alternating outward.
  const double step_h = step_s / kSecondsPerHour;
  std::vector<double> depth_mm(n);
  double prev_cum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d_min = (static_cast<double>(k + 1) * step_s) / 60.0;
    const double cum = idf.intensity_mm_h(d_min) * (d_min / 60.0);
    depth_mm[k] = cum - prev_cum;
    prev_cum = cum;
  }
  std::sort(depth_mm.begin(), depth_mm.end(), std::greater<>());

  // Placement order: center, center+1, center-1, center+2, ...
  const auto sn = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t center = sn / 2;
  std::vector<std::size_t> order;
  order.reserve(n);
  order.push_back(static_cast<std::size_t>(center));
  for (std::ptrdiff_t d = 1; order.size() < n; ++d) {
    if (center + d < sn) order.push_back(static_cast<std::size_t>(center + d));
    if (order.size() < n && center - d >= 0)
      order.push_back(static_cast<std::size_t>(center - d));
  }
  for (std::size_t k = 0; k < n; ++k) out.intensity[order[k]] = depth_mm[k] / step_h;
  return out;
}

RainSeries storm_train(const std::vector<StormSpec>& storms, double gap_s,
                       double step_s, double lead_s, double tail_s) {
  RainSeries out;
  out.step = step_s;
  auto pad = [&](double seconds) {
    const auto m = static_cast<std::size_t>(std::llround(seconds / step_s));
    out.intensity.insert(out.intensity.end(), m, 0.0);
  };
  pad(lead_s);
  for (std::size_t s = 0; s < storms.size(); ++s) {
    if (s > 0) pad(gap_s);
    const RainSeries one =
        design_storm(storms[s].idf, storms[s].duration_s, step_s, storms[s].method);
    out.intensity.insert(out.intensity.end(), one.intensity.begin(),
                         one.intensity.end());
  }
  pad(tail_s);
  return out;
}

namespace {

// Parses "YYYY-MM-DDTHH:MM:SS" (optional trailing 'Z', optional " " separator)
// into seconds since the Unix epoch.
double parse_iso8601(const std::string& s, std::size_t row) {
  std::tm tm = {};
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%d%*1[T ]%d:%d:%d", &y, &mo, &d, &h, &mi, &se) != 6)
    throw ConfigError("bad timestamp at row " + std::to_string(row) + ": " + s);
  tm.tm_year = y - 1900;
  tm.tm_mon = mo - 1;
  tm.tm_mday = d;
  tm.tm_hour = h;
  tm.tm_min = mi;
  tm.tm_sec = se;
  return static_cast<double>(timegm(&tm));
}

struct TimedColumn {
  std::vector<double> t;      // s since epoch
  std::vector<double> value;
};

TimedColumn read_timed_csv(const std::string& path, const std::string& value_header) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty file " + path);
  if (line.find("timestamp") == std::string::npos ||
      line.find(value_header) == std::string::npos)
    throw ConfigError(path + ": expected header 'timestamp," + value_header + "'");

  TimedColumn col;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw ConfigError(path + ": missing value column at row " + std::to_string(row));
    col.t.push_back(parse_iso8601(line.substr(0, comma), row));
    col.value.push_back(std::stod(line.substr(comma + 1)));
  }
  if (col.t.size() < 2)
    throw ConfigError(path + ": need at least two rows to infer the step");
  return col;
}

}  // namespace

RainSeries load_rain_csv(const std::string& path, bool fill_gaps) {
  const TimedColumn col = read_timed_csv(path, "intensity_mm_per_hr");
  const double step = col.t[1] - col.t[0];
  if (step <= 0.0) throw ConfigError(path + ": non-monotonic timestamps at row 3");

  RainSeries out;
  out.t0 = 0.0;
  out.step = step;
  out.intensity.push_back(col.value[0]);
  for (std::size_t k = 1; k < col.t.size(); ++k) {
    const double dt = col.t[k] - col.t[k - 1];
    if (dt <= 0.0)
      throw ConfigError(path + ": non-monotonic timestamps at row " + std::to_string(k + 2));
    const double ratio = dt / step;
    const auto m = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(m)) > 1e-6)
      throw ConfigError(path + ": irregular spacing at row " + std::to_string(k + 2) +
                        " (resample or fix the series)");
    if (m > 1) {
      if (!fill_gaps)
        throw ConfigError(path + ": gap before row " + std::to_string(k + 2) +
                          " (pass fill_gaps to zero-fill)");
      out.intensity.insert(out.intensity.end(), m - 1, 0.0);
    }
    out.intensity.push_back(col.value[k]);
  }
  for (std::size_t k = 0; k < out.intensity.size(); ++k)
    if (!(out.intensity[k] >= 0.0))
      throw ConfigError(path + ": negative intensity at row " + std::to_string(k + 2));
  return out;
}

EtSeries load_et_csv(const std::string& path) {
  const TimedColumn col = read_timed_csv(path, "rate_mm_per_day");
  EtSeries out;
  out.t0 = 0.0;
  out.step = col.t[1] - col.t[0];
  if (out.step <= 0.0) throw ConfigError(path + ": non-monotonic timestamps");
  out.rate = col.value;
  out.validate();
  return out;
}

RainSeries resample_hold(const RainSeries& src, double new_step_s) {
  if (new_step_s <= 0.0) throw ConfigError("resample step must be positive");
  const double ratio = src.step / new_step_s;
  const auto m = static_cast<std::size_t>(std::llround(ratio));
  if (m == 0 || std::abs(ratio - static_cast<double>(m)) > 1e-9)
    throw ConfigError("resample step must divide the source step");
  RainSeries out;
  out.t0 = src.t0;
  out.step = new_step_s;
  out.intensity.reserve(src.intensity.size() * m);
  for (double v : src.intensity) out.intensity.insert(out.intensity.end(), m, v);
  return out;
}

}  // namespace stormrtc
