#pragma once

#include <span>
#include <string>
#include <vector>

#include "streetfuel/assignment.hpp"
#include "streetfuel/fuel_model.hpp"
#include "streetfuel/road_network.hpp"
#include "streetfuel/speed_profiles.hpp"

namespace streetfuel {

/// Hourly fuel consumption of one edge in one time window, normalized by
/// edge length.
struct EdgeFuelRate {
  EdgeIndex edge{kInvalidEdge};
  std::string window;
  double fcr_l_per_car{0.0};
  double flow_vph{0.0};
  double rate_l_per_m_hr{0.0};
  int quantile_class{0};
};

/// Rate for a single edge: flow x fleet-weighted fuel per car / length.
EdgeFuelRate edge_fuel_rate(const RoadNetwork& net, EdgeIndex edge,
                            const std::string& window,
                            const ProfileFeatures& mean_features,
                            double flow_vph,
                            std::span<const FuelEconomyBin> bins);

/// Rates for every flow-carrying edge with at least one profile in the
/// window, sorted by edge id.
std::vector<EdgeFuelRate> build_rates(const RoadNetwork& net,
                                      const std::string& window,
                                      const FeatureMap& features,
                                      std::span<const EdgeFlow> flows,
                                      std::span<const FuelEconomyBin> bins);

struct Coverage {
  std::size_t flow_edges{0};
  std::size_t covered_edges{0};

  double fraction() const {
    return flow_edges == 0 ? 0.0
                           : static_cast<double>(covered_edges) /
                                 static_cast<double>(flow_edges);
  }
};

Coverage coverage(const RoadNetwork& net, const std::string& window,
                  const FeatureMap& features, std::span<const EdgeFlow> flows);

struct QuantileResult {
  std::vector<double> breaks;  // upper bound per class, ascending
  bool degenerate{false};      // fewer distinct breaks than classes
};

/// Rank-based classification over the pooled rates of all windows; classes
/// are 1..Q and equal values always land in the same class.
QuantileResult quantile_classify(std::vector<EdgeFuelRate>& rates, int classes);

/// GeoJSON FeatureCollection with one LineString per rate entry, coordinates
/// in (lon, lat) order, sorted by (window, edge id).
void export_geojson(const std::vector<EdgeFuelRate>& rates,
                    const RoadNetwork& net, const std::string& path);

struct CitySummaryRow {
  std::string window;
  double total_liters_per_hour{0.0};
  std::size_t covered_edges{0};
  double coverage_fraction{0.0};
};

CitySummaryRow summarize(const RoadNetwork& net, const std::string& window,
                         const std::vector<EdgeFuelRate>& rates,
                         const Coverage& cov);

void write_city_summary(const std::vector<CitySummaryRow>& rows,
                        const std::string& path);
void write_rates(const std::vector<EdgeFuelRate>& rates, const RoadNetwork& net,
                 const std::string& path);

}  // namespace streetfuel
