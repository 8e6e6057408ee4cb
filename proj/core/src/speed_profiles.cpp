#include "streetfuel/speed_profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "streetfuel/csv.hpp"
#include "streetfuel/time_utils.hpp"

namespace streetfuel {

std::vector<TimeWindow> default_windows() {
  return {
      {"morning_peak", 8, 9, true},
      {"midday_offpeak", 12, 13, true},
      {"evening_peak", 17, 18, true},
  };
}

ProfileFeatures features(std::span<const std::pair<double, double>> samples,
                         double idle_threshold_ms) {
  if (samples.size() < 2) {
    throw std::invalid_argument("profile needs at least two samples");
  }
  ProfileFeatures f;
  double idle = 0.0;
  double accel = 0.0;
  double length_m = 0.0;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    const auto [t0, v0] = samples[i];
    const auto [t1, v1] = samples[i + 1];
    const double dt = t1 - t0;
    if (dt <= 0.0) {
      throw std::invalid_argument("profile timestamps must strictly increase");
    }
    if (v0 < 0.0 || v1 < 0.0) {
      throw std::invalid_argument("profile speeds must be non-negative");
    }
    const double vbar = 0.5 * (v0 + v1);
    if (vbar < idle_threshold_ms) idle += dt;
    accel += std::abs(v1 - v0) * vbar;  // ∫|a|dx = ∫|a| v dt, exact per linear piece
    length_m += vbar * dt;
  }
  const double duration = samples.back().first - samples.front().first;
  f.t_idle_s = idle;
  f.t_move_s = duration - idle;
  f.accel_integral = accel;
  f.length_km = length_m / 1000.0;
  return f;
}

namespace {

bool in_window(const TimeWindow& w, const WeekPolicy& week, double abs_time_s) {
  const auto t = static_cast<std::int64_t>(std::floor(abs_time_s));
  const int hour = hour_utc(t);
  if (hour < w.start_hour || hour >= w.end_hour) return false;
  if (w.weekdays_only && week.is_weekend(weekday_utc(t))) return false;
  return true;
}

/// Piecewise-linear speed lookup over the trip's per-point speeds.
double speed_at(const CleanTrip& trip, const std::vector<double>& pt_speeds,
                double t_rel) {
  const double pos = t_rel / trip.interval_s;
  const auto k = static_cast<std::size_t>(
      std::clamp(std::floor(pos), 0.0,
                 static_cast<double>(trip.points.size() - 2)));
  const double frac = std::clamp(pos - static_cast<double>(k), 0.0, 1.0);
  return pt_speeds[k] + (pt_speeds[k + 1] - pt_speeds[k]) * frac;
}

}  // namespace

ProfileMap extract_profiles(const std::vector<MatchedRoute>& routes,
                            const std::vector<CleanTrip>& trips,
                            const RoadNetwork& net,
                            const std::vector<TimeWindow>& windows,
                            const WeekPolicy& week) {
  std::unordered_map<std::string, const CleanTrip*> by_id;
  by_id.reserve(trips.size());
  for (const auto& t : trips) by_id[t.trip_id] = &t;

  ProfileMap map;
  for (const auto& route : routes) {
    const auto it = by_id.find(route.trip_id);
    if (it == by_id.end()) {
      throw std::invalid_argument("matched route for unknown trip '" +
                                  route.trip_id + "'");
    }
    const CleanTrip& trip = *it->second;
    const auto pt_speeds = point_speeds(trip);
    for (const auto& seg : route.segments) {
      const double abs_entry = trip.t0_s + seg.entry_s;
      for (const auto& window : windows) {
        if (!in_window(window, week, abs_entry)) continue;
        SpeedProfile profile;
        profile.edge = seg.edge;
        profile.window = window.label;
        const double duration = trip.duration_s();
        const double entry = std::clamp(seg.entry_s, 0.0, duration);
        const double exit = std::clamp(seg.exit_s, 0.0, duration);
        if (exit <= entry) continue;
        profile.samples.emplace_back(entry, speed_at(trip, pt_speeds, entry));
        const auto first_k = static_cast<std::size_t>(
            std::floor(entry / trip.interval_s)) + 1;
        for (std::size_t k = first_k; k < trip.points.size(); ++k) {
          const double t = trip.interval_s * static_cast<double>(k);
          if (t >= exit) break;
          if (t > entry) profile.samples.emplace_back(t, pt_speeds[k]);
        }
        profile.samples.emplace_back(exit, speed_at(trip, pt_speeds, exit));
        if (profile.samples.size() >= 2) {
          map[{seg.edge, window.label}].push_back(std::move(profile));
        }
      }
    }
  }
  return map;
}

FeatureMap mean_features(const ProfileMap& profiles, double idle_threshold_ms) {
  FeatureMap out;
  for (const auto& [key, list] : profiles) {
    if (list.empty()) continue;
    MeanFeatures mf;
    for (const auto& profile : list) {
      const auto f = features(profile, idle_threshold_ms);
      mf.mean.t_idle_s += f.t_idle_s;
      mf.mean.t_move_s += f.t_move_s;
      mf.mean.accel_integral += f.accel_integral;
      mf.mean.length_km += f.length_km;
    }
    const double n = static_cast<double>(list.size());
    mf.mean.t_idle_s /= n;
    mf.mean.t_move_s /= n;
    mf.mean.accel_integral /= n;
    mf.mean.length_km /= n;
    mf.n_traversals = list.size();
    out[key] = mf;
  }
  return out;
}

void write_features(const FeatureMap& features, const RoadNetwork& net,
                    const std::string& path) {
  // Rows sorted by (edge id, window) for reproducible output.
  std::vector<std::pair<std::pair<std::string, std::string>, const MeanFeatures*>> rows;
  rows.reserve(features.size());
  for (const auto& [key, mf] : features) {
    rows.push_back({{net.edge(key.first).id, key.second}, &mf});
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  csv::Writer w(out);
  w.row({"edge_id", "window", "n_traversals", "t_idle_s", "t_move_s",
         "accel_int", "length_km"});
  for (const auto& [names, mf] : rows) {
    w.row({names.first, names.second, std::to_string(mf->n_traversals),
           csv::format_double(mf->mean.t_idle_s),
           csv::format_double(mf->mean.t_move_s),
           csv::format_double(mf->mean.accel_integral),
           csv::format_double(mf->mean.length_km)});
  }
}

FeatureMap load_features(const RoadNetwork& net, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open features file '" + path + "'");
  csv::Reader reader(in, path,
                     {"edge_id", "window", "n_traversals", "t_idle_s",
                      "t_move_s", "accel_int", "length_km"});
  FeatureMap map;
  while (auto row = reader.next()) {
    const auto edge = net.edge_index(row->fields[0]);
    if (!edge) {
      throw csv::CsvError(path, row->line_no,
                          "unknown edge id '" + row->fields[0] + "'");
    }
    MeanFeatures mf;
    mf.n_traversals = static_cast<std::size_t>(
        csv::parse_int(row->fields[2], path, row->line_no));
    mf.mean.t_idle_s = csv::parse_double(row->fields[3], path, row->line_no);
    mf.mean.t_move_s = csv::parse_double(row->fields[4], path, row->line_no);
    mf.mean.accel_integral = csv::parse_double(row->fields[5], path, row->line_no);
    mf.mean.length_km = csv::parse_double(row->fields[6], path, row->line_no);
    map[{*edge, row->fields[1]}] = mf;
  }
  return map;
}

}  // namespace streetfuel
