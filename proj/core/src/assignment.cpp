#include "streetfuel/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "streetfuel/csv.hpp"
#include "streetfuel/parallel.hpp"

namespace streetfuel {

double ODMatrix::total_demand() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.demand_vph;
  return sum;
}

ODMatrix peak_scale(const ODMatrix& od, double factor) {
  if (factor <= 0.0) throw std::invalid_argument("peak factor must be positive");
  ODMatrix out = od;
  for (auto& e : out.entries) e.demand_vph *= factor;
  return out;
}

namespace {

struct OriginGroup {
  NodeIndex origin{kInvalidNode};
  std::vector<std::size_t> entry_indices;  // into od.entries, input order
  std::vector<NodeIndex> dests;
};

std::vector<OriginGroup> group_by_origin(const ODMatrix& od) {
  std::vector<OriginGroup> groups;
  std::unordered_map<NodeIndex, std::size_t> index;
  for (std::size_t i = 0; i < od.entries.size(); ++i) {
    const auto& e = od.entries[i];
    auto it = index.find(e.origin);
    if (it == index.end()) {
      it = index.emplace(e.origin, groups.size()).first;
      groups.push_back({e.origin, {}, {}});
    }
    groups[it->second].entry_indices.push_back(i);
    groups[it->second].dests.push_back(e.dest);
  }
  std::sort(groups.begin(), groups.end(),
            [](const OriginGroup& a, const OriginGroup& b) {
              return a.origin < b.origin;
            });
  return groups;
}

}  // namespace

ItaResult ita_assign(const RoadNetwork& net, const ODMatrix& od,
                     std::span<const double> increments, const VdfParams& vdf,
                     unsigned threads, const PathObserver& observer) {
  if (increments.empty()) throw std::invalid_argument("no increments");
  double inc_sum = 0.0;
  for (const double f : increments) {
    if (f <= 0.0) throw std::invalid_argument("increments must be positive");
    inc_sum += f;
  }
  if (std::abs(inc_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("increments must sum to 1");
  }

  ItaResult result;
  result.edges.assign(net.edges().size(), EdgeFlow{});
  for (EdgeIndex e = 0; e < net.edges().size(); ++e) {
    result.edges[e].congested_time_s = net.edge(e).free_flow_time_s;
  }

  const auto groups = group_by_origin(od);
  std::vector<char> unreachable(od.entries.size(), 0);
  std::vector<double> times(net.edges().size());
  for (EdgeIndex e = 0; e < net.edges().size(); ++e) {
    times[e] = result.edges[e].congested_time_s;
  }

  constexpr std::size_t kChunk = 256;
  for (std::size_t inc = 0; inc < increments.size(); ++inc) {
    const double frac = increments[inc];
    for (std::size_t chunk_start = 0; chunk_start < groups.size();
         chunk_start += kChunk) {
      const std::size_t chunk_end =
          std::min(groups.size(), chunk_start + kChunk);
      std::vector<std::vector<std::vector<EdgeIndex>>> paths(chunk_end - chunk_start);
      parallel_for(chunk_end - chunk_start, threads, [&](std::size_t slot) {
        const auto& group = groups[chunk_start + slot];
        const auto tree =
            shortest_tree(net, group.origin, times, kInfTime, &group.dests);
        auto& out = paths[slot];
        out.resize(group.dests.size());
        for (std::size_t d = 0; d < group.dests.size(); ++d) {
          if (tree.dist_s[group.dests[d]] != kInfTime) {
            out[d] = tree_path(net, tree, group.origin, group.dests[d]);
          } else if (group.dests[d] != group.origin) {
            out[d] = {kInvalidEdge};  // unreachable marker
          }
        }
      });
      // Deterministic accumulation in origin order.
      for (std::size_t slot = 0; slot < paths.size(); ++slot) {
        const auto& group = groups[chunk_start + slot];
        for (std::size_t d = 0; d < group.dests.size(); ++d) {
          const std::size_t entry_idx = group.entry_indices[d];
          const auto& entry = od.entries[entry_idx];
          const auto& path = paths[slot][d];
          if (path.size() == 1 && path[0] == kInvalidEdge) {
            if (inc == 0) {
              unreachable[entry_idx] = 1;
              result.dropped_demand_vph += entry.demand_vph;
              result.unreachable_pairs.emplace_back(entry.origin, entry.dest);
            }
            continue;
          }
          if (unreachable[entry_idx]) continue;
          const double share = frac * entry.demand_vph;
          for (const EdgeIndex e : path) result.edges[e].flow_vph += share;
          if (observer) observer(entry.origin, entry.dest, share, path);
        }
      }
    }
    // Congestion feedback for the next increment.
    for (EdgeIndex e = 0; e < net.edges().size(); ++e) {
      const auto& ed = net.edge(e);
      const double ratio = result.edges[e].flow_vph / ed.capacity_vph;
      result.edges[e].congested_time_s =
          ed.free_flow_time_s * (1.0 + vdf.alpha * std::pow(ratio, vdf.beta));
      times[e] = result.edges[e].congested_time_s;
    }
  }
  return result;
}

ODMatrix load_od(const std::string& path, const RoadNetwork& net,
                 const std::string& window) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open OD file '" + path + "'");
  csv::Reader reader(in, path, {"origin_node", "dest_node", "cars_per_hour"});
  ODMatrix od;
  od.window = window;
  while (auto row = reader.next()) {
    ODEntry e;
    const auto origin = net.node_index(row->fields[0]);
    if (!origin) {
      throw csv::CsvError(path, row->line_no,
                          "unknown origin node '" + row->fields[0] + "'");
    }
    const auto dest = net.node_index(row->fields[1]);
    if (!dest) {
      throw csv::CsvError(path, row->line_no,
                          "unknown destination node '" + row->fields[1] + "'");
    }
    e.origin = *origin;
    e.dest = *dest;
    e.demand_vph = csv::parse_double(row->fields[2], path, row->line_no);
    if (e.demand_vph < 0.0) {
      throw csv::CsvError(path, row->line_no, "negative demand");
    }
    od.entries.push_back(e);
  }
  return od;
}

void write_flows(const ItaResult& result, const RoadNetwork& net,
                 const std::string& path) {
  std::vector<EdgeIndex> order(net.edges().size());
  for (EdgeIndex e = 0; e < net.edges().size(); ++e) order[e] = e;
  std::sort(order.begin(), order.end(), [&net](EdgeIndex a, EdgeIndex b) {
    return net.edge(a).id < net.edge(b).id;
  });
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  csv::Writer w(out);
  w.row({"edge_id", "flow_vph", "congested_time_s"});
  for (const EdgeIndex e : order) {
    w.row({net.edge(e).id, csv::format_double(result.edges[e].flow_vph),
           csv::format_double(result.edges[e].congested_time_s)});
  }
}

std::vector<EdgeFlow> load_flows(const RoadNetwork& net, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open flows file '" + path + "'");
  csv::Reader reader(in, path, {"edge_id", "flow_vph", "congested_time_s"});
  std::vector<EdgeFlow> flows(net.edges().size());
  while (auto row = reader.next()) {
    const auto e = net.edge_index(row->fields[0]);
    if (!e) {
      throw csv::CsvError(path, row->line_no,
                          "unknown edge id '" + row->fields[0] + "'");
    }
    flows[*e].flow_vph = csv::parse_double(row->fields[1], path, row->line_no);
    flows[*e].congested_time_s = csv::parse_double(row->fields[2], path, row->line_no);
  }
  return flows;
}

}  // namespace streetfuel
