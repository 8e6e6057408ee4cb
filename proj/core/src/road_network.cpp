#include "streetfuel/road_network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <stdexcept>

#include "streetfuel/csv.hpp"

namespace streetfuel {

// ---------------------------------------------------------------------------
// SpatialGrid

SpatialGrid::SpatialGrid(const std::vector<Node>& nodes, double cell_m) {
  if (cell_m <= 0.0) throw std::invalid_argument("cell size must be positive");
  double mean_lat = 0.0;
  for (const auto& n : nodes) mean_lat += n.pos.lat;
  if (!nodes.empty()) mean_lat /= static_cast<double>(nodes.size());
  cell_deg_lat_ = cell_m / meters_per_degree_lat();
  const double mlon = std::max(meters_per_degree_lon(mean_lat), 1.0);
  cell_deg_lon_ = cell_m / mlon;
  for (NodeIndex i = 0; i < nodes.size(); ++i) {
    cells_[cell_key(nodes[i].pos.lat, nodes[i].pos.lon)].push_back(i);
  }
}

std::int64_t SpatialGrid::cell_key(double lat, double lon) const {
  const auto cy = static_cast<std::int64_t>(std::floor(lat / cell_deg_lat_));
  const auto cx = static_cast<std::int64_t>(std::floor(lon / cell_deg_lon_));
  return cy * 4'000'000'000LL + cx;
}

std::vector<NodeIndex> SpatialGrid::query(const LatLon& p, double radius_m,
                                          const std::vector<Node>& nodes) const {
  std::vector<NodeIndex> out;
  if (cells_.empty()) return out;
  const double dlat = radius_m / meters_per_degree_lat();
  const double coslat = std::max(std::cos(deg2rad(p.lat)), 0.01);
  // 1.5x pad keeps the cell sweep a superset of the circle; the haversine
  // post-filter makes the result exact.
  const double dlon = 1.5 * radius_m / (meters_per_degree_lat() * coslat);
  const auto cy_lo = static_cast<std::int64_t>(std::floor((p.lat - dlat) / cell_deg_lat_));
  const auto cy_hi = static_cast<std::int64_t>(std::floor((p.lat + dlat) / cell_deg_lat_));
  const auto cx_lo = static_cast<std::int64_t>(std::floor((p.lon - dlon) / cell_deg_lon_));
  const auto cx_hi = static_cast<std::int64_t>(std::floor((p.lon + dlon) / cell_deg_lon_));
  for (std::int64_t cy = cy_lo; cy <= cy_hi; ++cy) {
    for (std::int64_t cx = cx_lo; cx <= cx_hi; ++cx) {
      const auto it = cells_.find(cy * 4'000'000'000LL + cx);
      if (it == cells_.end()) continue;
      for (const NodeIndex i : it->second) {
        if (haversine_m(p, nodes[i].pos) <= radius_m) out.push_back(i);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// RoadNetwork

RoadNetwork::RoadNetwork(std::vector<Node> nodes, std::vector<Edge> edges,
                         double index_cell_m)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  node_by_id_.reserve(nodes_.size());
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (!valid_position(n.pos)) {
      throw std::invalid_argument("node '" + n.id + "' has out-of-range position");
    }
    if (!node_by_id_.emplace(n.id, i).second) {
      throw std::invalid_argument("duplicate node id '" + n.id + "'");
    }
  }
  edge_by_id_.reserve(edges_.size());
  for (EdgeIndex e = 0; e < edges_.size(); ++e) {
    const auto& ed = edges_[e];
    if (ed.from >= nodes_.size() || ed.to >= nodes_.size()) {
      throw std::invalid_argument("edge '" + ed.id + "' references missing node");
    }
    if (ed.from == ed.to) {
      throw std::invalid_argument("edge '" + ed.id + "' is a self loop");
    }
    if (ed.length_m <= 0.0 || ed.free_flow_speed_ms <= 0.0 || ed.capacity_vph <= 0.0) {
      throw std::invalid_argument("edge '" + ed.id + "' has non-positive length/speed/capacity");
    }
    if (!edge_by_id_.emplace(ed.id, e).second) {
      throw std::invalid_argument("duplicate edge id '" + ed.id + "'");
    }
  }
  build_adjacency();
  grid_ = SpatialGrid(nodes_, index_cell_m);
}

void RoadNetwork::build_adjacency() {
  const auto n = nodes_.size();
  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const auto& e : edges_) {
    ++out_offsets_[e.from + 1];
    ++in_offsets_[e.to + 1];
  }
  for (std::size_t i = 1; i <= n; ++i) {
    out_offsets_[i] += out_offsets_[i - 1];
    in_offsets_[i] += in_offsets_[i - 1];
  }
  out_list_.resize(edges_.size());
  in_list_.resize(edges_.size());
  std::vector<std::uint32_t> ocur(out_offsets_.begin(), out_offsets_.end() - 1);
  std::vector<std::uint32_t> icur(in_offsets_.begin(), in_offsets_.end() - 1);
  for (EdgeIndex e = 0; e < edges_.size(); ++e) {
    out_list_[ocur[edges_[e].from]++] = e;
    in_list_[icur[edges_[e].to]++] = e;
  }
  const auto by_id = [this](EdgeIndex a, EdgeIndex b) {
    return edges_[a].id < edges_[b].id;
  };
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(out_list_.begin() + out_offsets_[i],
              out_list_.begin() + out_offsets_[i + 1], by_id);
    std::sort(in_list_.begin() + in_offsets_[i],
              in_list_.begin() + in_offsets_[i + 1], by_id);
  }
}

RoadNetwork RoadNetwork::load(const std::string& nodes_csv,
                              const std::string& edges_csv,
                              std::vector<std::string>* warnings) {
  std::ifstream nin(nodes_csv);
  if (!nin) throw std::runtime_error("cannot open nodes file '" + nodes_csv + "'");
  csv::Reader nreader(nin, nodes_csv, {"node_id", "lat", "lon"});
  std::vector<Node> nodes;
  std::unordered_map<std::string, NodeIndex> index;
  while (auto row = nreader.next()) {
    Node n;
    n.id = row->fields[0];
    n.pos.lat = csv::parse_double(row->fields[1], nodes_csv, row->line_no);
    n.pos.lon = csv::parse_double(row->fields[2], nodes_csv, row->line_no);
    if (!valid_position(n.pos)) {
      throw csv::CsvError(nodes_csv, row->line_no,
                          "position out of range for node '" + n.id + "'");
    }
    if (!index.emplace(n.id, static_cast<NodeIndex>(nodes.size())).second) {
      throw csv::CsvError(nodes_csv, row->line_no, "duplicate node id '" + n.id + "'");
    }
    nodes.push_back(std::move(n));
  }

  std::ifstream ein(edges_csv);
  if (!ein) throw std::runtime_error("cannot open edges file '" + edges_csv + "'");
  csv::Reader ereader(ein, edges_csv,
                      {"edge_id", "from_node", "to_node", "length_m",
                       "free_flow_speed_ms", "capacity_vph"});
  std::vector<Edge> edges;
  while (auto row = ereader.next()) {
    Edge e;
    e.id = row->fields[0];
    const auto from = index.find(row->fields[1]);
    if (from == index.end()) {
      throw csv::CsvError(edges_csv, row->line_no,
                          "edge '" + e.id + "' references unknown node '" +
                              row->fields[1] + "'");
    }
    const auto to = index.find(row->fields[2]);
    if (to == index.end()) {
      throw csv::CsvError(edges_csv, row->line_no,
                          "edge '" + e.id + "' references unknown node '" +
                              row->fields[2] + "'");
    }
    e.from = from->second;
    e.to = to->second;
    e.length_m = csv::parse_double(row->fields[3], edges_csv, row->line_no);
    e.free_flow_speed_ms = csv::parse_double(row->fields[4], edges_csv, row->line_no);
    e.capacity_vph = csv::parse_double(row->fields[5], edges_csv, row->line_no);
    if (e.length_m <= 0.0 || e.free_flow_speed_ms <= 0.0 || e.capacity_vph <= 0.0) {
      throw csv::CsvError(edges_csv, row->line_no,
                          "edge '" + e.id + "' has non-positive length/speed/capacity");
    }
    if (e.from == e.to) {
      throw csv::CsvError(edges_csv, row->line_no, "edge '" + e.id + "' is a self loop");
    }
    e.free_flow_time_s = e.length_m / e.free_flow_speed_ms;
    edges.push_back(std::move(e));
  }

  RoadNetwork net(std::move(nodes), std::move(edges));
  if (warnings && !net.weakly_connected()) {
    warnings->push_back("road network is not weakly connected");
  }
  return net;
}

std::optional<NodeIndex> RoadNetwork::node_index(const std::string& id) const {
  const auto it = node_by_id_.find(id);
  if (it == node_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeIndex> RoadNetwork::edge_index(const std::string& id) const {
  const auto it = edge_by_id_.find(id);
  if (it == edge_by_id_.end()) return std::nullopt;
  return it->second;
}

std::span<const EdgeIndex> RoadNetwork::out_edges(NodeIndex n) const {
  return {out_list_.data() + out_offsets_[n],
          out_list_.data() + out_offsets_[n + 1]};
}

std::span<const EdgeIndex> RoadNetwork::in_edges(NodeIndex n) const {
  return {in_list_.data() + in_offsets_[n], in_list_.data() + in_offsets_[n + 1]};
}

std::vector<NodeIndex> RoadNetwork::nodes_within(const LatLon& p,
                                                 double radius_m) const {
  if (radius_m <= 0.0) throw std::invalid_argument("radius must be positive");
  return grid_.query(p, radius_m, nodes_);
}

RoadNetwork RoadNetwork::densify(double max_spacing_m) const {
  if (max_spacing_m <= 0.0) {
    throw std::invalid_argument("max_spacing must be positive");
  }
  std::vector<Node> nodes = nodes_;
  std::vector<Edge> edges;
  edges.reserve(edges_.size());
  for (const auto& e : edges_) {
    const auto pieces = static_cast<std::uint32_t>(
        std::max<double>(1.0, std::ceil(e.length_m / max_spacing_m)));
    if (pieces == 1) {
      edges.push_back(e);
      continue;
    }
    const double piece_len = e.length_m / pieces;
    const LatLon a = nodes_[e.from].pos;
    const LatLon b = nodes_[e.to].pos;
    NodeIndex prev = e.from;
    for (std::uint32_t i = 0; i < pieces; ++i) {
      NodeIndex next;
      if (i + 1 == pieces) {
        next = e.to;
      } else {
        Node mid;
        mid.id = e.id + "@" + std::to_string(i + 1);
        mid.pos = lerp(a, b, static_cast<double>(i + 1) / pieces);
        next = static_cast<NodeIndex>(nodes.size());
        nodes.push_back(std::move(mid));
      }
      Edge sub;
      sub.id = e.id + "#" + std::to_string(i);
      sub.from = prev;
      sub.to = next;
      sub.length_m = piece_len;
      sub.free_flow_speed_ms = e.free_flow_speed_ms;
      sub.capacity_vph = e.capacity_vph;
      sub.free_flow_time_s = piece_len / e.free_flow_speed_ms;
      sub.parent_id = e.parent_id.empty() ? e.id : e.parent_id;
      edges.push_back(std::move(sub));
      prev = next;
    }
  }
  return RoadNetwork(std::move(nodes), std::move(edges));
}

const std::string& RoadNetwork::parent_edge_id(EdgeIndex e) const {
  const auto& ed = edges_[e];
  return ed.parent_id.empty() ? ed.id : ed.parent_id;
}

std::vector<double> RoadNetwork::free_flow_times() const {
  std::vector<double> t(edges_.size());
  for (EdgeIndex e = 0; e < edges_.size(); ++e) t[e] = edges_[e].free_flow_time_s;
  return t;
}

double RoadNetwork::total_length_m() const {
  double sum = 0.0;
  for (const auto& e : edges_) sum += e.length_m;
  return sum;
}

bool RoadNetwork::weakly_connected() const {
  if (nodes_.empty()) return true;
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<NodeIndex> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const NodeIndex u = stack.back();
    stack.pop_back();
    const auto visit = [&](NodeIndex v) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    };
    for (const EdgeIndex e : out_edges(u)) visit(edges_[e].to);
    for (const EdgeIndex e : in_edges(u)) visit(edges_[e].from);
  }
  return count == nodes_.size();
}

// ---------------------------------------------------------------------------
// Shortest paths

namespace {

void check_times(const RoadNetwork& net, std::span<const double> t) {
  if (t.size() != net.edges().size()) {
    throw std::invalid_argument("edge time vector size mismatch");
  }
  for (const double v : t) {
    if (!(v >= 0.0)) throw std::invalid_argument("negative edge time");
  }
}

}  // namespace

ShortestTree shortest_tree(const RoadNetwork& net, NodeIndex src,
                           std::span<const double> edge_time_s, double budget_s,
                           const std::vector<NodeIndex>* targets) {
  check_times(net, edge_time_s);
  ShortestTree tree;
  tree.dist_s.assign(net.nodes().size(), kInfTime);
  tree.parent_edge.assign(net.nodes().size(), kInvalidEdge);
  tree.dist_s[src] = 0.0;

  std::size_t remaining = 0;
  std::vector<char> is_target;
  if (targets) {
    is_target.assign(net.nodes().size(), 0);
    for (const NodeIndex t : *targets) {
      if (!is_target[t]) {
        is_target[t] = 1;
        ++remaining;
      }
    }
    if (is_target[src] && remaining > 0) --remaining;
    if (remaining == 0) return tree;
  }

  using Item = std::pair<double, NodeIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  heap.emplace(0.0, src);
  std::vector<char> settled(net.nodes().size(), 0);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (settled[u]) continue;
    settled[u] = 1;
    if (d > budget_s) break;
    if (targets && is_target[u] && u != src) {
      if (--remaining == 0) break;
    }
    for (const EdgeIndex e : net.out_edges(u)) {
      const NodeIndex v = net.edge(e).to;
      if (settled[v]) continue;
      const double nd = d + edge_time_s[e];
      if (nd < tree.dist_s[v]) {
        tree.dist_s[v] = nd;
        tree.parent_edge[v] = e;
        heap.emplace(nd, v);
      }
    }
  }
  return tree;
}

std::vector<EdgeIndex> tree_path(const RoadNetwork& net,
                                 const ShortestTree& tree, NodeIndex src,
                                 NodeIndex dst) {
  std::vector<EdgeIndex> path;
  NodeIndex cur = dst;
  while (cur != src) {
    const EdgeIndex e = tree.parent_edge[cur];
    if (e == kInvalidEdge) return {};
    path.push_back(e);
    cur = net.edge(e).from;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

PathResult fastest_path(const RoadNetwork& net, NodeIndex src, NodeIndex dst,
                        std::span<const double> edge_time_s) {
  check_times(net, edge_time_s);
  PathResult result;
  if (src == dst) {
    result.reachable = true;
    return result;
  }

  const ShortestTree tree = shortest_tree(net, src, edge_time_s);
  if (tree.dist_s[dst] == kInfTime) return result;

  // Tight edges are those on some time-minimal path. Walking forward and
  // always taking the smallest-id tight edge that can still reach dst yields
  // the lexicographically smallest minimal edge-id sequence.
  std::vector<char> reaches_dst(net.nodes().size(), 0);
  reaches_dst[dst] = 1;
  std::vector<NodeIndex> stack{dst};
  while (!stack.empty()) {
    const NodeIndex v = stack.back();
    stack.pop_back();
    for (const EdgeIndex e : net.in_edges(v)) {
      const NodeIndex u = net.edge(e).from;
      if (reaches_dst[u]) continue;
      if (tree.dist_s[u] != kInfTime &&
          tree.dist_s[u] + edge_time_s[e] == tree.dist_s[v]) {
        reaches_dst[u] = 1;
        stack.push_back(u);
      }
    }
  }

  std::vector<char> visited(net.nodes().size(), 0);
  NodeIndex cur = src;
  visited[src] = 1;
  double total = 0.0;
  while (cur != dst) {
    EdgeIndex chosen = kInvalidEdge;
    for (const EdgeIndex e : net.out_edges(cur)) {  // id-sorted
      const NodeIndex v = net.edge(e).to;
      if (visited[v] || !reaches_dst[v]) continue;
      if (tree.dist_s[cur] + edge_time_s[e] == tree.dist_s[v]) {
        chosen = e;
        break;
      }
    }
    if (chosen == kInvalidEdge) {
      // Zero-time cycles can strand the greedy walk; fall back to the plain
      // Dijkstra parents which are always consistent.
      result.edges = tree_path(net, tree, src, dst);
      result.total_s = tree.dist_s[dst];
      result.reachable = true;
      return result;
    }
    result.edges.push_back(chosen);
    total += edge_time_s[chosen];
    cur = net.edge(chosen).to;
    visited[cur] = 1;
  }
  result.total_s = total;
  result.reachable = true;
  return result;
}

}  // namespace streetfuel
