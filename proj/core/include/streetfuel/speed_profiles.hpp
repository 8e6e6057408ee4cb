#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "streetfuel/map_matching.hpp"
#include "streetfuel/road_network.hpp"
#include "streetfuel/trajectory.hpp"

namespace streetfuel {

/// Hour-of-day band with an optional weekday restriction.
struct TimeWindow {
  std::string label;
  int start_hour{0};
  int end_hour{0};  // exclusive
  bool weekdays_only{true};
};

/// Days counted as weekend, as a bitmask over weekday_utc() values
/// (bit 0 = Sunday ... bit 6 = Saturday).
struct WeekPolicy {
  std::uint8_t weekend_mask{(1u << 5) | (1u << 6)};  // Friday, Saturday

  bool is_weekend(int weekday) const {
    return (weekend_mask >> weekday) & 1u;
  }
};

std::vector<TimeWindow> default_windows();

/// Time-speed samples of one traversal of one edge. Times are seconds from
/// the parent trip's start; speed between samples is linear.
struct SpeedProfile {
  EdgeIndex edge{kInvalidEdge};
  std::string window;
  std::vector<std::pair<double, double>> samples;  // (t_s, v_ms)
};

/// The four model inputs of a profile.
struct ProfileFeatures {
  double t_idle_s{0.0};
  double t_move_s{0.0};
  double accel_integral{0.0};  // ∫|a| v dt, (m/s)^2
  double length_km{0.0};

  double duration_s() const { return t_idle_s + t_move_s; }
};

/// Features from (t, v) samples. Idle time accumulates over sample pairs
/// whose mean speed is below `idle_threshold_ms`. Throws on fewer than two
/// samples.
ProfileFeatures features(std::span<const std::pair<double, double>> samples,
                         double idle_threshold_ms = 0.3);

inline ProfileFeatures features(const SpeedProfile& profile,
                                double idle_threshold_ms = 0.3) {
  return features(std::span<const std::pair<double, double>>(profile.samples),
                  idle_threshold_ms);
}

using EdgeWindowKey = std::pair<EdgeIndex, std::string>;
using ProfileMap = std::map<EdgeWindowKey, std::vector<SpeedProfile>>;

/// Per-(edge, window) traversal profiles. A traversal's window membership is
/// decided by the absolute time at which the trip entered the edge. Routes
/// must reference `net` edges; trips are looked up by id.
ProfileMap extract_profiles(const std::vector<MatchedRoute>& routes,
                            const std::vector<CleanTrip>& trips,
                            const RoadNetwork& net,
                            const std::vector<TimeWindow>& windows,
                            const WeekPolicy& week = {});

struct MeanFeatures {
  ProfileFeatures mean;
  std::size_t n_traversals{0};
};

using FeatureMap = std::map<EdgeWindowKey, MeanFeatures>;

/// Arithmetic mean of each feature over an (edge, window)'s profiles.
FeatureMap mean_features(const ProfileMap& profiles,
                         double idle_threshold_ms = 0.3);

void write_features(const FeatureMap& features, const RoadNetwork& net,
                    const std::string& path);
FeatureMap load_features(const RoadNetwork& net, const std::string& path);

}  // namespace streetfuel
