#pragma once

#include <string>
#include <utility>
#include <vector>

#include "streetfuel/road_network.hpp"
#include "streetfuel/trajectory.hpp"

namespace streetfuel {

/// Network nodes near one GPS point, sorted by (distance, node index).
struct CandidateSet {
  int gps_index{0};
  struct Candidate {
    NodeIndex node{kInvalidNode};
    double dist_m{0.0};
  };
  std::vector<Candidate> candidates;
};

struct MatchedSegment {
  EdgeIndex edge{kInvalidEdge};
  double entry_s{0.0};  // seconds from trip start
  double exit_s{0.0};
};

struct MatchedRoute {
  std::string trip_id;
  std::vector<MatchedSegment> segments;
  /// Inclusive GPS index ranges that could not be matched.
  std::vector<std::pair<int, int>> gaps;
};

struct MatchParams {
  double candidate_radius_m{25.0};
  double penalty_s_per_m{1.0};
  /// Inter-layer searches abort beyond budget_factor * sampling interval of
  /// travel time.
  double budget_factor{10.0};
};

std::vector<CandidateSet> build_candidates(const CleanTrip& trip,
                                           const RoadNetwork& net,
                                           double radius_m);

/// Assign a trajectory to network edges: candidate layers per point, arcs
/// weighted by inter-candidate travel time plus a distance penalty relative
/// to the layer's closest candidate, minimal-weight chain per contiguous run.
/// Traversal times distribute each sampling interval over the hop's edges in
/// proportion to their free-flow times.
MatchedRoute match(const CleanTrip& trip, const RoadNetwork& net,
                   const MatchParams& params = {});

/// Rewrite a route matched on a densified network in terms of the original
/// network's edges, merging consecutive sub-edge segments of the same parent.
MatchedRoute merge_to_parents(const MatchedRoute& route,
                              const RoadNetwork& matched_net,
                              const RoadNetwork& original_net);

/// Total weight of the minimal layered chain per contiguous run (sum over
/// runs). Exposed for diagnostics and the penalty monotonicity property.
double layered_path_cost(const CleanTrip& trip, const RoadNetwork& net,
                         const MatchParams& params = {});

// CSV I/O for the matched-route and gap artifacts.
void write_matched_routes(const std::vector<MatchedRoute>& routes,
                          const RoadNetwork& net, const std::string& path);
std::vector<MatchedRoute> load_matched_routes(const RoadNetwork& net,
                                              const std::string& path);
void write_gap_report(const std::vector<MatchedRoute>& routes,
                      const std::string& path);

}  // namespace streetfuel
