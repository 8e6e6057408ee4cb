#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "streetfuel/assignment.hpp"
#include "streetfuel/fuel_model.hpp"
#include "streetfuel/map_matching.hpp"
#include "streetfuel/road_network.hpp"
#include "streetfuel/speed_profiles.hpp"
#include "streetfuel/trajectory.hpp"

namespace streetfuel {

/// One simulated OD trip.
struct TripRecord {
  std::string id;
  NodeIndex origin{kInvalidNode};
  NodeIndex dest{kInvalidNode};
  std::vector<EdgeIndex> path;
  int bin_id{0};
  double distance_m{0.0};
  double fuel_profile_l{0.0};
  double fuel_constant_l{0.0};
  double time_profile_s{0.0};
  double time_sim_s{0.0};
  bool flagged{false};  // priced over at least one unprofiled edge

  double fuel_per_meter() const {
    return distance_m > 0.0 ? fuel_profile_l / distance_m : 0.0;
  }
};

struct EnumerateResult {
  std::vector<TripRecord> trips;
  std::size_t skipped_pairs{0};  // unreachable
};

/// floor(demand) discrete trips per OD pair with demand >= 1, routed on the
/// congested-time fastest path. Unreachable pairs are skipped and counted.
EnumerateResult enumerate_trips(const ODMatrix& od, const RoadNetwork& net,
                                std::span<const double> congested_time_s,
                                unsigned threads = 1);

/// Independent categorical draw of a fuel-economy bin per trip, proportional
/// to fleet probabilities. Identical seeds give identical assignments.
void assign_bins(std::vector<TripRecord>& trips,
                 std::span<const FuelEconomyBin> bins, std::uint64_t seed);

/// Price each trip under both estimators. Profile-based fuel sums the bin's
/// consumption over per-edge mean features; edges without a profile
/// contribute free-flow constant-speed features and flag the trip. The
/// constant baseline prices the whole trip at its simulated average speed.
void price_trips(std::vector<TripRecord>& trips, const RoadNetwork& net,
                 const FeatureMap& features, const std::string& window,
                 std::span<const FuelEconomyBin> bins, const DoeCurve& doe,
                 unsigned threads = 1);

enum class ReductionStrategy { kRandom, kTargetedProfile, kTargetedConstant };

std::string to_string(ReductionStrategy s);

struct SavingsPoint {
  double fraction_removed{0.0};
  double fuel_saved_fraction{0.0};
  double stddev{0.0};  // across seeds; zero for targeted strategies
};

struct SavingsCurve {
  ReductionStrategy strategy{ReductionStrategy::kRandom};
  std::vector<SavingsPoint> points;
};

/// Fuel saved (always measured under the profile model) when removing a
/// fraction of trips: uniformly at random averaged over `n_seeds` draws, or
/// in descending order of per-meter fuel under either estimator.
SavingsCurve savings_curve(std::span<const TripRecord> trips,
                           ReductionStrategy strategy, std::uint64_t seed,
                           std::span<const double> fractions, int n_seeds = 20);

struct TravelTimeComparison {
  std::vector<std::pair<double, double>> pairs;  // (simulated, profile)
  double correlation{0.0};
};

TravelTimeComparison compare_travel_times(std::span<const TripRecord> trips);

/// Histogram table: shared bin edges, one count column per series.
struct Histogram {
  std::vector<double> edges;  // size bins+1
  std::vector<std::string> series;
  std::vector<std::vector<std::size_t>> counts;  // per series, size bins
};

Histogram histogram(const std::vector<std::vector<double>>& data,
                    const std::vector<std::string>& names, int bins);

struct VerificationInputs {
  const std::vector<CleanTrip>* clean_trips{nullptr};
  const std::vector<RawTrip>* raw_trips{nullptr};
  const std::vector<MatchedRoute>* routes{nullptr};  // original-network edges
  const RoadNetwork* net{nullptr};
  std::span<const FuelEconomyBin> bins;
  double idle_threshold_ms{0.3};
  int histogram_bins{30};
};

/// Writes the three verification histogram files into `out_dir`:
/// reported vs computed trip distances, free-flow vs observed travel times,
/// and the four fuel-economy estimator variants.
void verification_reports(const VerificationInputs& in,
                          const std::string& out_dir);

void write_trips(const std::vector<TripRecord>& trips, const RoadNetwork& net,
                 const std::string& path);
void write_savings_curves(std::span<const SavingsCurve> curves,
                          const std::string& path);
void write_travel_time_pairs(const TravelTimeComparison& cmp,
                             const std::string& path);
void write_histogram(const Histogram& h, const std::string& path);

}  // namespace streetfuel
