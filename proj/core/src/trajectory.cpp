#include "streetfuel/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "streetfuel/csv.hpp"
#include "streetfuel/time_utils.hpp"

namespace streetfuel {

double infer_interval(const RawTrip& trip) {
  if (trip.points.size() < 2) {
    throw std::invalid_argument("trip '" + trip.trip_id + "' has fewer than 2 points");
  }
  const double duration = static_cast<double>(trip.dropoff_s - trip.pickup_s);
  if (duration <= 0.0) {
    throw std::invalid_argument("trip '" + trip.trip_id + "' has non-positive duration");
  }
  return duration / static_cast<double>(trip.points.size() - 1);
}

CleanTrip reconstruct_timestamps(const RawTrip& trip) {
  CleanTrip clean;
  clean.trip_id = trip.trip_id;
  clean.t0_s = static_cast<double>(trip.pickup_s);
  clean.interval_s = infer_interval(trip);
  clean.points = trip.points;
  return clean;
}

std::vector<double> segment_speeds(const CleanTrip& trip) {
  if (trip.interval_s <= 0.0) {
    throw std::invalid_argument("trip '" + trip.trip_id + "' has no sampling interval");
  }
  std::vector<double> speeds;
  if (trip.points.size() < 2) return speeds;
  speeds.reserve(trip.points.size() - 1);
  for (std::size_t i = 0; i + 1 < trip.points.size(); ++i) {
    speeds.push_back(haversine_m(trip.points[i], trip.points[i + 1]) / trip.interval_s);
  }
  return speeds;
}

std::vector<double> point_speeds(const CleanTrip& trip) {
  const auto seg = segment_speeds(trip);
  std::vector<double> out(trip.points.size(), 0.0);
  if (seg.empty()) return out;
  out.front() = seg.front();
  out.back() = seg.back();
  for (std::size_t i = 1; i + 1 < out.size(); ++i) {
    out[i] = 0.5 * (seg[i - 1] + seg[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Spike repair

namespace {

constexpr double kKmhToMs = 1000.0 / 3600.0;

struct MutableTrack {
  std::vector<LatLon> pts;
  std::vector<double> dist;  // consecutive haversine distances

  void remove_point(std::size_t j) {
    pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(j));
    if (j == 0) {
      dist.erase(dist.begin());
    } else if (j == pts.size()) {  // former last point
      dist.pop_back();
    } else {
      dist[j - 1] = haversine_m(pts[j - 1], pts[j]);
      dist.erase(dist.begin() + static_cast<std::ptrdiff_t>(j));
    }
  }

  void insert_points(std::size_t seg, int count) {
    const LatLon a = pts[seg];
    const LatLon b = pts[seg + 1];
    std::vector<LatLon> mids;
    mids.reserve(static_cast<std::size_t>(count));
    for (int k = 1; k <= count; ++k) {
      mids.push_back(lerp(a, b, static_cast<double>(k) / (count + 1)));
    }
    pts.insert(pts.begin() + static_cast<std::ptrdiff_t>(seg) + 1, mids.begin(),
               mids.end());
    std::vector<double> nd;
    nd.reserve(static_cast<std::size_t>(count) + 1);
    for (int k = 0; k <= count; ++k) {
      nd.push_back(haversine_m(pts[seg + static_cast<std::size_t>(k)],
                               pts[seg + static_cast<std::size_t>(k) + 1]));
    }
    dist.erase(dist.begin() + static_cast<std::ptrdiff_t>(seg));
    dist.insert(dist.begin() + static_cast<std::ptrdiff_t>(seg), nd.begin(), nd.end());
  }
};

}  // namespace

RepairOutcome repair_spikes(const CleanTrip& trip, double threshold_kmh,
                            int max_passes) {
  if (threshold_kmh <= 0.0) {
    throw std::invalid_argument("spike threshold must be positive");
  }
  const double thr_ms = threshold_kmh * kKmhToMs;
  const double duration = trip.duration_s();

  RepairOutcome out;
  out.trip = trip;

  MutableTrack track;
  track.pts = trip.points;
  track.dist.reserve(track.pts.size());
  for (std::size_t i = 0; i + 1 < track.pts.size(); ++i) {
    track.dist.push_back(haversine_m(track.pts[i], track.pts[i + 1]));
  }

  for (int pass = 0; pass < max_passes; ++pass) {
    if (track.pts.size() < 2) break;
    const double interval =
        duration / static_cast<double>(track.pts.size() - 1);
    const double spike_dist = thr_ms * interval;
    int repairs = 0;

    std::size_t i = 0;
    while (i < track.dist.size()) {
      if (track.dist[i] <= spike_dist) {
        ++i;
        continue;
      }
      ++repairs;
      const bool next_spikes =
          i + 1 < track.dist.size() && track.dist[i + 1] > spike_dist;
      if (next_spikes) {
        // Displaced point: out-and-back jump. Drop the middle point.
        track.remove_point(i + 1);
        ++out.points_removed;
        continue;  // re-examine the merged segment at i
      }
      if (i == 0) {
        // No speed before the spike: drop the leading point.
        track.remove_point(0);
        ++out.points_removed;
        continue;
      }
      if (i + 1 >= track.dist.size()) {
        // No speed after the spike: drop the trailing point.
        track.remove_point(track.pts.size() - 1);
        ++out.points_removed;
        break;
      }
      // Recording gap: estimate how many samples were skipped from the mean
      // of the neighboring speeds and refill the segment.
      const double v_avg =
          0.5 * (track.dist[i - 1] + track.dist[i + 1]) / interval;
      if (v_avg <= 1e-9) {
        track.remove_point(i + 1);
        ++out.points_removed;
        continue;
      }
      const int n_missing = std::max(
          1, static_cast<int>(std::lround(track.dist[i] / (v_avg * interval))) - 1);
      track.insert_points(i, n_missing);
      out.points_inserted += n_missing;
      i += static_cast<std::size_t>(n_missing) + 1;
    }

    out.passes = pass + 1;
    if (repairs == 0) {
      out.compliant = true;
      break;
    }
  }

  if (track.pts.size() < 2) {
    out.compliant = false;
    out.trip.points = track.pts;
    return out;
  }

  out.trip.points = std::move(track.pts);
  out.trip.interval_s = duration / static_cast<double>(out.trip.points.size() - 1);
  if (!out.compliant) {
    // Pass budget exhausted: re-check against the final interval.
    const auto speeds = segment_speeds(out.trip);
    out.compliant =
        std::all_of(speeds.begin(), speeds.end(),
                    [thr_ms](double v) { return v <= thr_ms; });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stay splitting

SplitResult split_stays(const CleanTrip& trip, double min_duration_s,
                        double max_radius_m) {
  SplitResult result;
  const std::size_t n = trip.points.size();

  std::vector<std::pair<std::size_t, std::size_t>> stays;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n &&
           haversine_m(trip.points[i], trip.points[j + 1]) <= max_radius_m) {
      ++j;
    }
    const double stay_duration = static_cast<double>(j - i) * trip.interval_s;
    if (j > i && stay_duration >= min_duration_s) {
      stays.emplace_back(i, j);
      i = j + 1;
    } else {
      ++i;
    }
  }

  if (stays.empty()) {
    result.pieces.push_back(trip);
    return result;
  }

  for (const auto& [a, b] : stays) {
    Stay s;
    s.first_point = a;
    s.last_point = b;
    s.start_s = a > 0 ? trip.time_at(a - 1) : trip.time_at(0);
    s.end_s = b + 1 < n ? trip.time_at(b + 1) : trip.time_at(n - 1);
    result.stays.push_back(s);
  }

  std::size_t piece_index = 0;
  std::size_t start = 0;
  const auto emit = [&](std::size_t lo, std::size_t hi) {  // [lo, hi)
    if (hi - lo < 2) return;
    CleanTrip child;
    child.trip_id = trip.trip_id + "#" + std::to_string(piece_index++);
    child.parent_trip = trip.trip_id;
    child.t0_s = trip.time_at(lo);
    child.interval_s = trip.interval_s;
    child.points.assign(trip.points.begin() + static_cast<std::ptrdiff_t>(lo),
                        trip.points.begin() + static_cast<std::ptrdiff_t>(hi));
    result.pieces.push_back(std::move(child));
  };
  for (const auto& [a, b] : stays) {
    emit(start, a);
    start = b + 1;
  }
  emit(start, n);
  return result;
}

bool all_points_inside(const RawTrip& trip, const BBox& bbox) {
  return std::all_of(trip.points.begin(), trip.points.end(),
                     [&bbox](const LatLon& p) { return bbox.contains(p); });
}

// ---------------------------------------------------------------------------
// Corpus cleaning

bool CleaningReport::reconciles() const {
  return retained == input_trips - rejected_invalid - outside_region -
                         unrepairable - split_parents + children_added;
}

std::vector<std::pair<std::string, std::size_t>> CleaningReport::rows() const {
  return {
      {"input_trips", input_trips},
      {"rejected_invalid", rejected_invalid},
      {"outside_region", outside_region},
      {"unrepairable", unrepairable},
      {"trips_repaired", trips_repaired},
      {"points_inserted", points_inserted},
      {"points_removed", points_removed},
      {"split_parents", split_parents},
      {"stays_excised", stays_excised},
      {"children_added", children_added},
      {"retained", retained},
  };
}

CleaningResult clean_trips(const std::vector<RawTrip>& raw,
                           const CleaningParams& params) {
  CleaningResult result;
  result.report.input_trips = raw.size();
  for (const auto& trip : raw) {
    if (trip.points.size() < 2 || trip.dropoff_s <= trip.pickup_s) {
      ++result.report.rejected_invalid;
      continue;
    }
    if (!all_points_inside(trip, params.region)) {
      ++result.report.outside_region;
      continue;
    }
    auto repaired = repair_spikes(reconstruct_timestamps(trip),
                                  params.spike_threshold_kmh,
                                  params.max_repair_passes);
    if (!repaired.compliant || repaired.trip.points.size() < 2) {
      ++result.report.unrepairable;
      continue;
    }
    if (repaired.points_inserted > 0 || repaired.points_removed > 0) {
      ++result.report.trips_repaired;
      result.report.points_inserted += static_cast<std::size_t>(repaired.points_inserted);
      result.report.points_removed += static_cast<std::size_t>(repaired.points_removed);
    }
    auto split = split_stays(repaired.trip, params.stay_min_duration_s,
                             params.stay_max_radius_m);
    if (split.stays.empty()) {
      result.trips.push_back(std::move(split.pieces.front()));
      ++result.report.retained;
    } else {
      ++result.report.split_parents;
      result.report.stays_excised += split.stays.size();
      for (auto& piece : split.pieces) {
        result.trips.push_back(std::move(piece));
        ++result.report.children_added;
        ++result.report.retained;
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Hourly rates

std::int64_t CalendarTag::total_days() const {
  std::int64_t days = 0;
  for (const auto& [lo, hi] : day_ranges) {
    days += (hi - lo) / kSecondsPerDay + 1;
  }
  return days;
}

bool CalendarTag::contains(std::int64_t epoch_s) const {
  for (const auto& [lo, hi] : day_ranges) {
    if (epoch_s >= lo && epoch_s < hi + kSecondsPerDay) return true;
  }
  return false;
}

std::map<std::string, std::array<double, 24>> hourly_trip_rates(
    const std::vector<RawTrip>& trips, const std::vector<CalendarTag>& tags) {
  // Combined = union of all tag day ranges.
  std::vector<std::pair<std::int64_t, std::int64_t>> all;
  for (const auto& tag : tags) {
    all.insert(all.end(), tag.day_ranges.begin(), tag.day_ranges.end());
  }
  std::sort(all.begin(), all.end());
  CalendarTag combined;
  combined.tag = "combined";
  for (const auto& r : all) {
    if (!combined.day_ranges.empty() &&
        r.first <= combined.day_ranges.back().second + kSecondsPerDay) {
      combined.day_ranges.back().second =
          std::max(combined.day_ranges.back().second, r.second);
    } else {
      combined.day_ranges.push_back(r);
    }
  }

  std::map<std::string, std::array<double, 24>> table;
  const auto tally = [&trips](const CalendarTag& tag) {
    std::array<double, 24> counts{};
    for (const auto& t : trips) {
      if (tag.contains(t.pickup_s)) {
        counts[static_cast<std::size_t>(hour_utc(t.pickup_s))] += 1.0;
      }
    }
    const double days = static_cast<double>(std::max<std::int64_t>(1, tag.total_days()));
    for (auto& c : counts) c /= days;
    return counts;
  };
  for (const auto& tag : tags) table[tag.tag] = tally(tag);
  table[combined.tag] = tally(combined);
  return table;
}

// ---------------------------------------------------------------------------
// CSV I/O

namespace {

std::vector<LatLon> parse_polyline(std::string_view text, const std::string& file,
                                   std::size_t line) {
  std::vector<LatLon> points;
  for (const auto& pair : csv::split(text, ';')) {
    const auto parts = csv::split(pair, ' ');
    if (parts.size() != 2) {
      throw csv::CsvError(file, line, "malformed polyline entry '" + pair + "'");
    }
    LatLon p{csv::parse_double(parts[0], file, line),
             csv::parse_double(parts[1], file, line)};
    if (!valid_position(p)) {
      throw csv::CsvError(file, line, "polyline position out of range");
    }
    points.push_back(p);
  }
  return points;
}

std::string format_polyline(const std::vector<LatLon>& points) {
  std::string out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0) out.push_back(';');
    out += csv::format_double(points[i].lat);
    out.push_back(' ');
    out += csv::format_double(points[i].lon);
  }
  return out;
}

}  // namespace

std::vector<RawTrip> load_raw_trips(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trips file '" + path + "'");
  csv::Reader reader(in, path,
                     {"trip_id", "pickup_iso8601", "dropoff_iso8601", "length_km",
                      "polyline"});
  std::vector<RawTrip> trips;
  while (auto row = reader.next()) {
    RawTrip t;
    t.trip_id = row->fields[0];
    try {
      t.pickup_s = parse_iso8601(row->fields[1]);
      t.dropoff_s = parse_iso8601(row->fields[2]);
    } catch (const std::invalid_argument& e) {
      throw csv::CsvError(path, row->line_no, e.what());
    }
    t.reported_length_km = csv::parse_double(row->fields[3], path, row->line_no);
    t.points = parse_polyline(row->fields[4], path, row->line_no);
    trips.push_back(std::move(t));
  }
  return trips;
}

void write_clean_trips(const std::vector<CleanTrip>& trips,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  csv::Writer w(out);
  w.row({"trip_id", "parent_trip", "t0_epoch_s", "interval_s", "polyline"});
  for (const auto& t : trips) {
    w.row({t.trip_id, t.parent_trip, csv::format_double(t.t0_s),
           csv::format_double(t.interval_s), format_polyline(t.points)});
  }
}

std::vector<CleanTrip> load_clean_trips(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open clean trips file '" + path + "'");
  csv::Reader reader(in, path,
                     {"trip_id", "parent_trip", "t0_epoch_s", "interval_s",
                      "polyline"});
  std::vector<CleanTrip> trips;
  while (auto row = reader.next()) {
    CleanTrip t;
    t.trip_id = row->fields[0];
    t.parent_trip = row->fields[1];
    t.t0_s = csv::parse_double(row->fields[2], path, row->line_no);
    t.interval_s = csv::parse_double(row->fields[3], path, row->line_no);
    t.points = parse_polyline(row->fields[4], path, row->line_no);
    if (t.interval_s <= 0.0 || t.points.size() < 2) {
      throw csv::CsvError(path, row->line_no, "invalid clean trip row");
    }
    trips.push_back(std::move(t));
  }
  return trips;
}

}  // namespace streetfuel
