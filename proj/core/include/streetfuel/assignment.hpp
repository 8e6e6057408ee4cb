#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "streetfuel/road_network.hpp"

namespace streetfuel {

struct ODEntry {
  NodeIndex origin{kInvalidNode};
  NodeIndex dest{kInvalidNode};
  double demand_vph{0.0};
};

struct ODMatrix {
  std::string window;
  std::vector<ODEntry> entries;

  double total_demand() const;
};

/// Multiply every demand by `factor` (peak-hour adjustment).
ODMatrix peak_scale(const ODMatrix& od, double factor);

struct EdgeFlow {
  double flow_vph{0.0};
  double congested_time_s{0.0};
};

/// BPR volume-delay parameters: t = t0 * (1 + alpha * (flow/capacity)^beta).
struct VdfParams {
  double alpha{0.15};
  double beta{4.0};
};

struct ItaResult {
  std::vector<EdgeFlow> edges;  // indexed by EdgeIndex
  double dropped_demand_vph{0.0};
  std::vector<std::pair<NodeIndex, NodeIndex>> unreachable_pairs;
};

/// Called once per OD pair and increment with the demand share routed on
/// `path` (ordered edge indices). Used by ledger-style verification.
using PathObserver =
    std::function<void(NodeIndex origin, NodeIndex dest, double assigned_vph,
                       std::span<const EdgeIndex> path)>;

/// Incremental traffic assignment: route each increment's share of every OD
/// pair on the fastest route under current congested times, then update the
/// times with the volume-delay function. Unreachable pairs are dropped and
/// reported.
ItaResult ita_assign(const RoadNetwork& net, const ODMatrix& od,
                     std::span<const double> increments, const VdfParams& vdf = {},
                     unsigned threads = 1, const PathObserver& observer = {});

inline constexpr std::array<double, 4> kDefaultIncrements{0.4, 0.3, 0.2, 0.1};

ODMatrix load_od(const std::string& path, const RoadNetwork& net,
                 const std::string& window);
void write_flows(const ItaResult& result, const RoadNetwork& net,
                 const std::string& path);
std::vector<EdgeFlow> load_flows(const RoadNetwork& net, const std::string& path);

}  // namespace streetfuel
