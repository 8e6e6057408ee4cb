#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "streetfuel/geo.hpp"

namespace streetfuel {

using NodeIndex = std::uint32_t;
using EdgeIndex = std::uint32_t;

inline constexpr NodeIndex kInvalidNode = std::numeric_limits<NodeIndex>::max();
inline constexpr EdgeIndex kInvalidEdge = std::numeric_limits<EdgeIndex>::max();

struct Node {
  std::string id;
  LatLon pos;
};

struct Edge {
  std::string id;
  NodeIndex from{kInvalidNode};
  NodeIndex to{kInvalidNode};
  double length_m{0.0};
  double free_flow_speed_ms{0.0};
  double capacity_vph{0.0};
  double free_flow_time_s{0.0};
  /// Id of the pre-densification edge this one was split from; empty when the
  /// edge is original.
  std::string parent_id;
};

/// Uniform lat/lon grid over node positions. Candidate cells are padded so a
/// haversine post-filter returns exactly the nodes within the query radius.
class SpatialGrid {
 public:
  SpatialGrid() = default;
  SpatialGrid(const std::vector<Node>& nodes, double cell_m);

  std::vector<NodeIndex> query(const LatLon& p, double radius_m,
                               const std::vector<Node>& nodes) const;

 private:
  std::int64_t cell_key(double lat, double lon) const;

  double cell_deg_lat_{0.0};
  double cell_deg_lon_{0.0};
  std::unordered_map<std::int64_t, std::vector<NodeIndex>> cells_;
};

/// Immutable directed road graph with a spatial index over nodes.
class RoadNetwork {
 public:
  RoadNetwork() = default;

  /// Build from in-memory parts; validates all invariants.
  RoadNetwork(std::vector<Node> nodes, std::vector<Edge> edges,
              double index_cell_m = 25.0);

  /// Load from the documented node/edge CSV pair. Malformed rows and dangling
  /// edge references throw csv::CsvError with file/line context. A weakly
  /// disconnected graph is reported through `warnings` (when non-null), not an
  /// error.
  static RoadNetwork load(const std::string& nodes_csv,
                          const std::string& edges_csv,
                          std::vector<std::string>* warnings = nullptr);

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Node& node(NodeIndex i) const { return nodes_[i]; }
  const Edge& edge(EdgeIndex e) const { return edges_[e]; }

  std::optional<NodeIndex> node_index(const std::string& id) const;
  std::optional<EdgeIndex> edge_index(const std::string& id) const;

  /// Out-edges of a node, sorted by edge id.
  std::span<const EdgeIndex> out_edges(NodeIndex n) const;
  std::span<const EdgeIndex> in_edges(NodeIndex n) const;

  /// Node ids within `radius_m` (haversine, inclusive) of a point; ascending
  /// node index order.
  std::vector<NodeIndex> nodes_within(const LatLon& p, double radius_m) const;

  /// Split every edge longer than `max_spacing_m` into equal sub-edges that
  /// inherit speed and capacity and record their parent edge id. Total length
  /// is preserved.
  RoadNetwork densify(double max_spacing_m) const;

  /// Resolves an edge to its pre-densification parent id (own id when the
  /// edge was never split).
  const std::string& parent_edge_id(EdgeIndex e) const;

  std::vector<double> free_flow_times() const;
  double total_length_m() const;
  bool weakly_connected() const;

 private:
  void build_adjacency();

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, NodeIndex> node_by_id_;
  std::unordered_map<std::string, EdgeIndex> edge_by_id_;
  // CSR adjacency, out-edges sorted by edge id per node.
  std::vector<std::uint32_t> out_offsets_;
  std::vector<EdgeIndex> out_list_;
  std::vector<std::uint32_t> in_offsets_;
  std::vector<EdgeIndex> in_list_;
  SpatialGrid grid_;
};

struct PathResult {
  bool reachable{false};
  std::vector<EdgeIndex> edges;
  double total_s{0.0};
};

/// Time-minimal path under the per-edge times. Equal-time alternatives are
/// broken toward the lexicographically smallest edge-id sequence. Negative
/// edge times throw std::invalid_argument.
PathResult fastest_path(const RoadNetwork& net, NodeIndex src, NodeIndex dst,
                        std::span<const double> edge_time_s);

struct ShortestTree {
  std::vector<double> dist_s;         // inf when unreached
  std::vector<EdgeIndex> parent_edge; // kInvalidEdge at roots/unreached
};

/// One-to-all Dijkstra. When `targets` is given the search stops as soon as
/// every target is settled; `budget_s` bounds the explored travel time.
ShortestTree shortest_tree(
    const RoadNetwork& net, NodeIndex src, std::span<const double> edge_time_s,
    double budget_s = std::numeric_limits<double>::infinity(),
    const std::vector<NodeIndex>* targets = nullptr);

/// Walk parent pointers back from `dst`; empty when unreached or src==dst.
std::vector<EdgeIndex> tree_path(const RoadNetwork& net,
                                 const ShortestTree& tree, NodeIndex src,
                                 NodeIndex dst);

inline constexpr double kInfTime = std::numeric_limits<double>::infinity();

}  // namespace streetfuel
