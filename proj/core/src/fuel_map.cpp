#include "streetfuel/fuel_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "streetfuel/csv.hpp"

namespace streetfuel {

EdgeFuelRate edge_fuel_rate(const RoadNetwork& net, EdgeIndex edge,
                            const std::string& window,
                            const ProfileFeatures& mean_features,
                            double flow_vph,
                            std::span<const FuelEconomyBin> bins) {
  EdgeFuelRate r;
  r.edge = edge;
  r.window = window;
  r.flow_vph = flow_vph;
  r.fcr_l_per_car = fleet_weighted_fcr_l(mean_features, bins);
  r.rate_l_per_m_hr = flow_vph * r.fcr_l_per_car / net.edge(edge).length_m;
  return r;
}

std::vector<EdgeFuelRate> build_rates(const RoadNetwork& net,
                                      const std::string& window,
                                      const FeatureMap& features,
                                      std::span<const EdgeFlow> flows,
                                      std::span<const FuelEconomyBin> bins) {
  std::vector<EdgeFuelRate> rates;
  for (const auto& [key, mf] : features) {
    if (key.second != window) continue;
    const EdgeIndex e = key.first;
    if (flows[e].flow_vph <= 0.0) continue;
    rates.push_back(
        edge_fuel_rate(net, e, window, mf.mean, flows[e].flow_vph, bins));
  }
  std::sort(rates.begin(), rates.end(),
            [&net](const EdgeFuelRate& a, const EdgeFuelRate& b) {
              return net.edge(a.edge).id < net.edge(b.edge).id;
            });
  return rates;
}

Coverage coverage(const RoadNetwork& net, const std::string& window,
                  const FeatureMap& features, std::span<const EdgeFlow> flows) {
  Coverage cov;
  for (EdgeIndex e = 0; e < net.edges().size(); ++e) {
    if (flows[e].flow_vph <= 0.0) continue;
    ++cov.flow_edges;
    if (features.count({e, window}) > 0) ++cov.covered_edges;
  }
  return cov;
}

QuantileResult quantile_classify(std::vector<EdgeFuelRate>& rates, int classes) {
  if (classes < 2) throw std::invalid_argument("need at least 2 classes");
  QuantileResult result;
  if (rates.empty()) return result;

  std::vector<double> values;
  values.reserve(rates.size());
  for (const auto& r : rates) values.push_back(r.rate_l_per_m_hr);
  std::sort(values.begin(), values.end());

  const std::size_t n = values.size();
  result.breaks.reserve(static_cast<std::size_t>(classes));
  for (int q = 1; q <= classes; ++q) {
    const auto rank = static_cast<std::size_t>(
        std::ceil(static_cast<double>(n) * q / classes));
    result.breaks.push_back(values[std::min(n, rank) - 1]);
  }
  std::size_t distinct = 1;
  for (std::size_t i = 1; i < result.breaks.size(); ++i) {
    if (result.breaks[i] > result.breaks[i - 1]) ++distinct;
  }
  result.degenerate = distinct < static_cast<std::size_t>(classes);

  for (auto& r : rates) {
    int cls = classes;
    for (int q = 1; q <= classes; ++q) {
      if (r.rate_l_per_m_hr <= result.breaks[static_cast<std::size_t>(q - 1)]) {
        cls = q;
        break;
      }
    }
    r.quantile_class = cls;
  }
  return result;
}

void export_geojson(const std::vector<EdgeFuelRate>& rates,
                    const RoadNetwork& net, const std::string& path) {
  std::vector<const EdgeFuelRate*> order;
  order.reserve(rates.size());
  for (const auto& r : rates) order.push_back(&r);
  std::sort(order.begin(), order.end(),
            [&net](const EdgeFuelRate* a, const EdgeFuelRate* b) {
              if (a->window != b->window) return a->window < b->window;
              return net.edge(a->edge).id < net.edge(b->edge).id;
            });

  nlohmann::ordered_json root;
  root["type"] = "FeatureCollection";
  auto& features = root["features"] = nlohmann::ordered_json::array();
  for (const EdgeFuelRate* r : order) {
    const Edge& e = net.edge(r->edge);
    const Node& from = net.node(e.from);
    const Node& to = net.node(e.to);
    nlohmann::ordered_json f;
    f["type"] = "Feature";
    f["geometry"]["type"] = "LineString";
    f["geometry"]["coordinates"] = {{from.pos.lon, from.pos.lat},
                                    {to.pos.lon, to.pos.lat}};
    f["properties"]["edge_id"] = e.id;
    f["properties"]["window"] = r->window;
    f["properties"]["rate"] = r->rate_l_per_m_hr;
    f["properties"]["class"] = r->quantile_class;
    f["properties"]["flow_vph"] = r->flow_vph;
    f["properties"]["fcr_lpc"] = r->fcr_l_per_car;
    features.push_back(std::move(f));
  }

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << root.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

CitySummaryRow summarize(const RoadNetwork& net, const std::string& window,
                         const std::vector<EdgeFuelRate>& rates,
                         const Coverage& cov) {
  CitySummaryRow row;
  row.window = window;
  for (const auto& r : rates) {
    if (r.window != window) continue;
    row.total_liters_per_hour += r.rate_l_per_m_hr * net.edge(r.edge).length_m;
  }
  row.covered_edges = cov.covered_edges;
  row.coverage_fraction = cov.fraction();
  return row;
}

void write_city_summary(const std::vector<CitySummaryRow>& rows,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  csv::Writer w(out);
  w.row({"window", "total_liters_per_hour", "covered_edges", "coverage_fraction"});
  for (const auto& row : rows) {
    w.row({row.window, csv::format_double(row.total_liters_per_hour),
           std::to_string(row.covered_edges),
           csv::format_double(row.coverage_fraction)});
  }
}

void write_rates(const std::vector<EdgeFuelRate>& rates, const RoadNetwork& net,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  csv::Writer w(out);
  w.row({"edge_id", "window", "fcr_l_per_car", "flow_vph", "rate_l_per_m_hr",
         "class"});
  for (const auto& r : rates) {
    w.row({net.edge(r.edge).id, r.window, csv::format_double(r.fcr_l_per_car),
           csv::format_double(r.flow_vph), csv::format_double(r.rate_l_per_m_hr),
           std::to_string(r.quantile_class)});
  }
}

}  // namespace streetfuel
