#include "streetfuel/map_matching.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <stdexcept>

#include "streetfuel/csv.hpp"

namespace streetfuel {

std::vector<CandidateSet> build_candidates(const CleanTrip& trip,
                                           const RoadNetwork& net,
                                           double radius_m) {
  std::vector<CandidateSet> layers;
  layers.reserve(trip.points.size());
  for (std::size_t i = 0; i < trip.points.size(); ++i) {
    CandidateSet set;
    set.gps_index = static_cast<int>(i);
    for (const NodeIndex n : net.nodes_within(trip.points[i], radius_m)) {
      set.candidates.push_back({n, haversine_m(trip.points[i], net.node(n).pos)});
    }
    std::sort(set.candidates.begin(), set.candidates.end(),
              [](const auto& a, const auto& b) {
                return a.dist_m != b.dist_m ? a.dist_m < b.dist_m
                                            : a.node < b.node;
              });
    layers.push_back(std::move(set));
  }
  return layers;
}

namespace {

/// Bounded Dijkstra with version-stamped state so repeated runs avoid O(N)
/// re-initialization.
class DijkstraWorkspace {
 public:
  explicit DijkstraWorkspace(std::size_t n_nodes)
      : dist_(n_nodes, 0.0),
        parent_(n_nodes, kInvalidEdge),
        stamp_(n_nodes, 0),
        target_stamp_(n_nodes, 0) {}

  /// Settles nodes until all targets are reached, the heap drains, or travel
  /// time exceeds `budget_s`.
  void run(const RoadNetwork& net, std::span<const double> times, NodeIndex src,
           const std::vector<NodeIndex>& targets, double budget_s) {
    ++version_;
    std::size_t remaining = 0;
    for (const NodeIndex t : targets) {
      if (target_stamp_[t] != version_) {
        target_stamp_[t] = version_;
        ++remaining;
      }
    }
    heap_ = {};
    set(src, 0.0, kInvalidEdge);
    heap_.emplace(0.0, src);
    while (!heap_.empty() && remaining > 0) {
      const auto [d, u] = heap_.top();
      heap_.pop();
      if (d > dist_of(u)) continue;  // stale entry
      if (d > budget_s) break;
      if (target_stamp_[u] == version_) {
        target_stamp_[u] = version_ - 1;
        --remaining;
      }
      for (const EdgeIndex e : net.out_edges(u)) {
        const NodeIndex v = net.edge(e).to;
        const double nd = d + times[e];
        if (nd < dist_of(v)) {
          set(v, nd, e);
          heap_.emplace(nd, v);
        }
      }
    }
  }

  double dist_of(NodeIndex v) const {
    return stamp_[v] == version_ ? dist_[v] : kInfTime;
  }

  std::vector<EdgeIndex> path_to(const RoadNetwork& net, NodeIndex src,
                                 NodeIndex dst) const {
    std::vector<EdgeIndex> path;
    if (dist_of(dst) == kInfTime) return path;
    NodeIndex cur = dst;
    while (cur != src) {
      const EdgeIndex e = parent_[cur];
      path.push_back(e);
      cur = net.edge(e).from;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

 private:
  void set(NodeIndex v, double d, EdgeIndex parent) {
    dist_[v] = d;
    parent_[v] = parent;
    stamp_[v] = version_;
  }

  std::vector<double> dist_;
  std::vector<EdgeIndex> parent_;
  std::vector<std::uint32_t> stamp_;
  std::vector<std::uint32_t> target_stamp_;
  std::uint32_t version_{0};
  using Item = std::pair<double, NodeIndex>;
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap_;
};

struct LayerState {
  std::vector<double> cost;  // per candidate, kInfTime when unreachable
  std::vector<int> back;     // candidate index in the previous layer
};

struct Run {
  int first_layer{0};
  int last_layer{0};
  std::vector<int> chosen;  // candidate index per layer in [first, last]
  double total_cost{0.0};
};

/// Forward min-cost chaining over candidate layers. Runs break on empty
/// layers and on transitions with no reachable arc.
std::vector<Run> build_runs(const std::vector<CandidateSet>& layers,
                            const RoadNetwork& net,
                            std::span<const double> times,
                            const MatchParams& params, double interval_s,
                            DijkstraWorkspace& ws) {
  const double budget = params.budget_factor * interval_s;
  std::vector<Run> runs;
  const int n = static_cast<int>(layers.size());

  int run_start = -1;
  std::vector<LayerState> states;  // parallel to layers[run_start..]

  const auto finalize = [&](int last_layer) {
    if (run_start < 0) return;
    const int len = last_layer - run_start + 1;
    if (len >= 2) {
      Run run;
      run.first_layer = run_start;
      run.last_layer = last_layer;
      const auto& final_state = states[static_cast<std::size_t>(len - 1)];
      int best = -1;
      for (std::size_t c = 0; c < final_state.cost.size(); ++c) {
        if (final_state.cost[c] < kInfTime &&
            (best < 0 || final_state.cost[c] < final_state.cost[static_cast<std::size_t>(best)])) {
          best = static_cast<int>(c);
        }
      }
      run.total_cost = final_state.cost[static_cast<std::size_t>(best)];
      run.chosen.resize(static_cast<std::size_t>(len));
      int cur = best;
      for (int i = len - 1; i >= 0; --i) {
        run.chosen[static_cast<std::size_t>(i)] = cur;
        cur = states[static_cast<std::size_t>(i)].back[static_cast<std::size_t>(cur)];
      }
      runs.push_back(std::move(run));
    }
    run_start = -1;
    states.clear();
  };

  for (int i = 0; i < n; ++i) {
    const auto& layer = layers[static_cast<std::size_t>(i)];
    if (layer.candidates.empty()) {
      finalize(i - 1);
      continue;
    }
    if (run_start < 0) {
      run_start = i;
      LayerState s;
      s.cost.assign(layer.candidates.size(), 0.0);
      s.back.assign(layer.candidates.size(), -1);
      states.push_back(std::move(s));
      continue;
    }

    const auto& prev_layer = layers[static_cast<std::size_t>(i - 1)];
    const auto& prev_state = states.back();
    const double min_dist = layer.candidates.front().dist_m;

    std::vector<NodeIndex> targets;
    targets.reserve(layer.candidates.size());
    for (const auto& c : layer.candidates) targets.push_back(c.node);

    LayerState next;
    next.cost.assign(layer.candidates.size(), kInfTime);
    next.back.assign(layer.candidates.size(), -1);
    bool any = false;
    for (std::size_t s = 0; s < prev_layer.candidates.size(); ++s) {
      if (prev_state.cost[s] == kInfTime) continue;
      ws.run(net, times, prev_layer.candidates[s].node, targets, budget);
      for (std::size_t c = 0; c < layer.candidates.size(); ++c) {
        const double travel = ws.dist_of(layer.candidates[c].node);
        if (travel == kInfTime) continue;
        const double w = travel + params.penalty_s_per_m *
                                      (layer.candidates[c].dist_m - min_dist);
        const double total = prev_state.cost[s] + w;
        if (total < next.cost[c]) {
          next.cost[c] = total;
          next.back[c] = static_cast<int>(s);
          any = true;
        }
      }
    }
    if (!any) {
      finalize(i - 1);
      // Current layer starts a fresh run.
      run_start = i;
      LayerState s;
      s.cost.assign(layer.candidates.size(), 0.0);
      s.back.assign(layer.candidates.size(), -1);
      states.push_back(std::move(s));
      continue;
    }
    states.push_back(std::move(next));
  }
  finalize(n - 1);
  return runs;
}

std::vector<std::pair<int, int>> gap_ranges(const std::vector<Run>& runs,
                                            int n_layers) {
  std::vector<std::pair<int, int>> gaps;
  int cursor = 0;
  for (const auto& run : runs) {
    if (run.first_layer > cursor) gaps.emplace_back(cursor, run.first_layer - 1);
    cursor = run.last_layer + 1;
  }
  if (cursor < n_layers) gaps.emplace_back(cursor, n_layers - 1);
  return gaps;
}

}  // namespace

MatchedRoute match(const CleanTrip& trip, const RoadNetwork& net,
                   const MatchParams& params) {
  MatchedRoute route;
  route.trip_id = trip.trip_id;
  const auto layers = build_candidates(trip, net, params.candidate_radius_m);
  const auto times = net.free_flow_times();
  DijkstraWorkspace ws(net.nodes().size());
  const auto runs =
      build_runs(layers, net, times, params, trip.interval_s, ws);
  route.gaps = gap_ranges(runs, static_cast<int>(layers.size()));

  const double budget = params.budget_factor * trip.interval_s;
  for (const auto& run : runs) {
    for (int i = run.first_layer; i < run.last_layer; ++i) {
      const auto& from_layer = layers[static_cast<std::size_t>(i)];
      const auto& to_layer = layers[static_cast<std::size_t>(i + 1)];
      const NodeIndex u =
          from_layer.candidates[static_cast<std::size_t>(
              run.chosen[static_cast<std::size_t>(i - run.first_layer)])].node;
      const NodeIndex w =
          to_layer.candidates[static_cast<std::size_t>(
              run.chosen[static_cast<std::size_t>(i + 1 - run.first_layer)])].node;
      if (u == w) continue;
      ws.run(net, times, u, {w}, budget);
      const auto path = ws.path_to(net, u, w);
      if (path.empty()) continue;  // pruned by budget during reconstruction
      double total_fft = 0.0;
      for (const EdgeIndex e : path) total_fft += net.edge(e).free_flow_time_s;
      const double hop_start = static_cast<double>(i) * trip.interval_s;
      double cum = 0.0;
      for (const EdgeIndex e : path) {
        MatchedSegment seg;
        seg.edge = e;
        seg.entry_s = hop_start + trip.interval_s * (cum / total_fft);
        cum += net.edge(e).free_flow_time_s;
        seg.exit_s = hop_start + trip.interval_s * (cum / total_fft);
        route.segments.push_back(seg);
      }
    }
  }
  return route;
}

double layered_path_cost(const CleanTrip& trip, const RoadNetwork& net,
                         const MatchParams& params) {
  const auto layers = build_candidates(trip, net, params.candidate_radius_m);
  const auto times = net.free_flow_times();
  DijkstraWorkspace ws(net.nodes().size());
  const auto runs =
      build_runs(layers, net, times, params, trip.interval_s, ws);
  double total = 0.0;
  for (const auto& run : runs) total += run.total_cost;
  return total;
}

MatchedRoute merge_to_parents(const MatchedRoute& route,
                              const RoadNetwork& matched_net,
                              const RoadNetwork& original_net) {
  MatchedRoute out;
  out.trip_id = route.trip_id;
  out.gaps = route.gaps;
  for (const auto& seg : route.segments) {
    const std::string& pid = matched_net.parent_edge_id(seg.edge);
    const auto parent = original_net.edge_index(pid);
    if (!parent) {
      throw std::invalid_argument("edge '" + pid + "' not present in original network");
    }
    if (!out.segments.empty() && out.segments.back().edge == *parent &&
        seg.entry_s - out.segments.back().exit_s <= 1e-6) {
      out.segments.back().exit_s = seg.exit_s;
    } else {
      out.segments.push_back({*parent, seg.entry_s, seg.exit_s});
    }
  }
  return out;
}

void write_matched_routes(const std::vector<MatchedRoute>& routes,
                          const RoadNetwork& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  csv::Writer w(out);
  w.row({"trip_id", "seq", "edge_id", "entry_s", "exit_s"});
  for (const auto& route : routes) {
    int seq = 0;
    for (const auto& seg : route.segments) {
      w.row({route.trip_id, std::to_string(seq++), net.edge(seg.edge).id,
             csv::format_double(seg.entry_s), csv::format_double(seg.exit_s)});
    }
  }
}

std::vector<MatchedRoute> load_matched_routes(const RoadNetwork& net,
                                              const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matched routes file '" + path + "'");
  csv::Reader reader(in, path, {"trip_id", "seq", "edge_id", "entry_s", "exit_s"});
  std::vector<MatchedRoute> routes;
  while (auto row = reader.next()) {
    const std::string& trip_id = row->fields[0];
    if (routes.empty() || routes.back().trip_id != trip_id) {
      MatchedRoute r;
      r.trip_id = trip_id;
      routes.push_back(std::move(r));
    }
    const auto edge = net.edge_index(row->fields[2]);
    if (!edge) {
      throw csv::CsvError(path, row->line_no,
                          "unknown edge id '" + row->fields[2] + "'");
    }
    MatchedSegment seg;
    seg.edge = *edge;
    seg.entry_s = csv::parse_double(row->fields[3], path, row->line_no);
    seg.exit_s = csv::parse_double(row->fields[4], path, row->line_no);
    routes.back().segments.push_back(seg);
  }
  return routes;
}

void write_gap_report(const std::vector<MatchedRoute>& routes,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  csv::Writer w(out);
  w.row({"trip_id", "gap_start_index", "gap_end_index"});
  for (const auto& route : routes) {
    for (const auto& [a, b] : route.gaps) {
      w.row({route.trip_id, std::to_string(a), std::to_string(b)});
    }
  }
}

}  // namespace streetfuel
