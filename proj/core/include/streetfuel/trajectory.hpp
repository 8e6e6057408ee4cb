#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "streetfuel/geo.hpp"

namespace streetfuel {

/// One taxi trip as delivered: ordered coordinates without timestamps.
struct RawTrip {
  std::string trip_id;
  std::int64_t pickup_s{0};
  std::int64_t dropoff_s{0};
  double reported_length_km{0.0};
  std::vector<LatLon> points;
};

/// A trip with reconstructed, evenly spaced timestamps. Point k is at
/// t0_s + k * interval_s.
struct CleanTrip {
  std::string trip_id;
  std::string parent_trip;  // set when produced by stay splitting
  double t0_s{0.0};
  double interval_s{0.0};
  std::vector<LatLon> points;

  double time_at(std::size_t k) const { return t0_s + static_cast<double>(k) * interval_s; }
  double duration_s() const {
    return points.empty() ? 0.0 : static_cast<double>(points.size() - 1) * interval_s;
  }
};

/// Recording interval: trip duration divided by the number of gaps between
/// points. Throws std::invalid_argument for non-positive durations or fewer
/// than two points.
double infer_interval(const RawTrip& trip);

/// CleanTrip with timestamps assigned from the inferred interval.
CleanTrip reconstruct_timestamps(const RawTrip& trip);

/// Haversine speed of each consecutive point pair, m/s; size = points - 1.
std::vector<double> segment_speeds(const CleanTrip& trip);

/// Per-point instantaneous speeds: segment speed at the ends, adjacent-pair
/// mean in the interior; size = points.
std::vector<double> point_speeds(const CleanTrip& trip);

struct RepairOutcome {
  CleanTrip trip;
  int points_inserted{0};
  int points_removed{0};
  int passes{0};
  bool compliant{false};  // all segment speeds at or below threshold
};

/// Remove speed spikes above `threshold_kmh`. A single spiking segment is a
/// recording gap: the missing points are restored by interpolation, their
/// count estimated from the mean of the neighboring speeds. Two consecutive
/// spiking segments are a displaced point, which is dropped. Timestamps are
/// re-spread uniformly after each pass; passes repeat until clean or
/// `max_passes` is reached.
RepairOutcome repair_spikes(const CleanTrip& trip, double threshold_kmh = 160.0,
                            int max_passes = 10);

struct Stay {
  std::size_t first_point{0};
  std::size_t last_point{0};
  double start_s{0.0};  // end of the preceding kept piece (or trip start)
  double end_s{0.0};    // start of the following kept piece (or trip end)
};

struct SplitResult {
  std::vector<CleanTrip> pieces;
  std::vector<Stay> stays;
};

/// Excise maximal runs of at least `min_duration_s` whose points all stay
/// within `max_radius_m` of the run's first point. Pieces with >= 2 points
/// become child trips named "<id>#<n>" that reference the parent. A trip with
/// no stays is returned unchanged.
SplitResult split_stays(const CleanTrip& trip, double min_duration_s = 2200.0,
                        double max_radius_m = 10.0);

/// True when every point lies inside the rectangle.
bool all_points_inside(const RawTrip& trip, const BBox& bbox);

// ---------------------------------------------------------------------------
// Corpus-level cleaning

struct CleaningParams {
  BBox region;
  double spike_threshold_kmh{160.0};
  int max_repair_passes{10};
  double stay_min_duration_s{2200.0};
  double stay_max_radius_m{10.0};
};

struct CleaningReport {
  std::size_t input_trips{0};
  std::size_t rejected_invalid{0};      // <2 points or non-positive duration
  std::size_t outside_region{0};
  std::size_t unrepairable{0};
  std::size_t trips_repaired{0};
  std::size_t points_inserted{0};
  std::size_t points_removed{0};
  std::size_t split_parents{0};         // trips replaced by their pieces
  std::size_t stays_excised{0};
  std::size_t children_added{0};
  std::size_t retained{0};              // trips in the output

  /// retained == input - rejected - outside - unrepairable - split_parents
  ///             + children_added
  bool reconciles() const;
  std::vector<std::pair<std::string, std::size_t>> rows() const;
};

struct CleaningResult {
  std::vector<CleanTrip> trips;
  CleaningReport report;
};

/// Full per-trip pipeline: validate, region-filter, repair, split stays.
CleaningResult clean_trips(const std::vector<RawTrip>& raw,
                           const CleaningParams& params);

// ---------------------------------------------------------------------------
// Hourly production rates (QA reporting)

struct CalendarTag {
  std::string tag;
  // Inclusive civil-day ranges as [first_day_epoch_s, last_day_epoch_s].
  std::vector<std::pair<std::int64_t, std::int64_t>> day_ranges;

  std::int64_t total_days() const;
  bool contains(std::int64_t epoch_s) const;
};

/// Mean trips per hour-of-day for each tag plus a "combined" row over the
/// union of all tag ranges. Trips outside every range are ignored.
std::map<std::string, std::array<double, 24>> hourly_trip_rates(
    const std::vector<RawTrip>& trips, const std::vector<CalendarTag>& tags);

// ---------------------------------------------------------------------------
// CSV I/O

std::vector<RawTrip> load_raw_trips(const std::string& path);
void write_clean_trips(const std::vector<CleanTrip>& trips, const std::string& path);
std::vector<CleanTrip> load_clean_trips(const std::string& path);

}  // namespace streetfuel
