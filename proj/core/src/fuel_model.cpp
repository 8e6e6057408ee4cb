#include "streetfuel/fuel_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "streetfuel/csv.hpp"

namespace streetfuel {

// ---------------------------------------------------------------------------
// DOE curve

namespace {

/// Solve a small dense system by Gaussian elimination with partial pivoting.
std::array<double, 4> solve4(std::array<std::array<double, 5>, 4> m) {
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    std::swap(m[col], m[pivot]);
    if (std::abs(m[col][col]) < 1e-12) {
      throw std::runtime_error("singular system in curve fit");
    }
    for (int r = col + 1; r < 4; ++r) {
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 5; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::array<double, 4> x{};
  for (int r = 3; r >= 0; --r) {
    double acc = m[r][4];
    for (int c = r + 1; c < 4; ++c) acc -= m[r][c] * x[c];
    x[r] = acc / m[r][r];
  }
  return x;
}

double poly3(const std::array<double, 4>& c, double x) {
  return ((c[3] * x + c[2]) * x + c[1]) * x + c[0];
}

}  // namespace

DoeCurve DoeCurve::fit(std::vector<std::pair<double, double>> anchors) {
  if (anchors.size() < 4) {
    throw std::invalid_argument("curve fit needs at least 4 anchor points");
  }
  DoeCurve curve;
  curve.anchors_ = std::move(anchors);

  // Normal equations for a cubic least-squares fit.
  std::array<std::array<double, 5>, 4> m{};
  for (const auto& [x, y] : curve.anchors_) {
    std::array<double, 4> phi{1.0, x, x * x, x * x * x};
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) m[r][c] += phi[r] * phi[c];
      m[r][4] += phi[r] * y;
    }
  }
  curve.coef_ = solve4(m);

  for (const auto& [x, y] : curve.anchors_) {
    curve.max_residual_rel_ = std::max(
        curve.max_residual_rel_, std::abs(poly3(curve.coef_, x) - y) / y);
  }
  for (double mph = kMinMph; mph <= kMaxMph; mph += 0.25) {
    if (poly3(curve.coef_, mph) <= 0.0) {
      throw std::runtime_error("fitted fuel-economy curve not positive at " +
                               csv::format_double(mph) + " mph");
    }
  }
  return curve;
}

double DoeCurve::mpg_at(double mph) const {
  return poly3(coef_, std::clamp(mph, kMinMph, kMaxMph));
}

// ---------------------------------------------------------------------------
// Model evaluation and calibration

double streetsmart_fc_l(const ProfileFeatures& f, const FuelEconomyBin& bin) {
  if (!bin.calibrated) {
    throw std::invalid_argument("bin " + std::to_string(bin.id) + " is not calibrated");
  }
  return bin.k[0] * f.t_idle_s + bin.k[1] * f.t_move_s +
         bin.k[2] * f.accel_integral + bin.k[3] * f.length_km;
}

std::vector<FuelEconomyBin> calibrate(const std::vector<BinPrior>& priors,
                                      const DriveCycle& cycle,
                                      double idle_threshold_ms) {
  const ProfileFeatures f = features(
      std::span<const std::pair<double, double>>(cycle.samples), idle_threshold_ms);
  const double cycle_miles = f.length_km / kKmPerMile;
  if (cycle_miles <= 0.0) {
    throw std::invalid_argument("drive cycle has no distance");
  }

  std::vector<FuelEconomyBin> bins;
  bins.reserve(priors.size());
  for (const auto& prior : priors) {
    const double target_fe = prior.target_fe_mpg();
    if (target_fe <= 0.0) {
      throw std::invalid_argument("bin " + std::to_string(prior.id) +
                                  " has non-positive target fuel economy");
    }
    const auto mu = prior.midpoint();
    const double response = mu[0] * f.t_idle_s + mu[1] * f.t_move_s +
                            mu[2] * f.accel_integral + mu[3] * f.length_km;
    if (response <= 0.0) {
      throw std::runtime_error("bin " + std::to_string(prior.id) +
                               " has non-positive cycle response");
    }
    const double target_liters = cycle_miles / target_fe * kLitersPerUsGallon;
    const double scale = target_liters / response;

    FuelEconomyBin bin;
    bin.id = prior.id;
    bin.fe_lo_mpg = prior.fe_lo_mpg;
    bin.fe_hi_mpg = prior.fe_hi_mpg;
    for (int i = 0; i < 4; ++i) bin.k[i] = scale * mu[i];
    bin.calibrated = true;
    const double fc = streetsmart_fc_l(f, bin);
    bin.recreated_fe_mpg = cycle_miles / (fc / kLitersPerUsGallon);
    bins.push_back(bin);
  }
  return bins;
}

double doe_baseline_fc_l(double avg_speed_ms, double distance_km,
                         const DoeCurve& curve) {
  if (distance_km < 0.0) {
    throw std::invalid_argument("distance must be non-negative");
  }
  if (distance_km == 0.0) return 0.0;
  if (avg_speed_ms <= 0.0) {
    throw std::invalid_argument("average speed must be positive");
  }
  const double mpg = curve.mpg_at(ms_to_mph(avg_speed_ms));
  return distance_km / kKmPerMile / mpg * kLitersPerUsGallon;
}

double fleet_weighted_fcr_l(const ProfileFeatures& f,
                            std::span<const FuelEconomyBin> bins) {
  double fc = 0.0;
  for (const auto& bin : bins) {
    if (bin.fleet_probability > 0.0) {
      fc += bin.fleet_probability * streetsmart_fc_l(f, bin);
    }
  }
  return fc;
}

const FuelEconomyBin& most_common_bin(std::span<const FuelEconomyBin> bins) {
  if (bins.empty()) throw std::invalid_argument("no bins");
  const FuelEconomyBin* best = &bins[0];
  for (const auto& bin : bins) {
    if (bin.fleet_probability > best->fleet_probability ||
        (bin.fleet_probability == best->fleet_probability && bin.id < best->id)) {
      best = &bin;
    }
  }
  return *best;
}

// ---------------------------------------------------------------------------
// Asset and artifact I/O

std::vector<BinPrior> load_bin_priors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open bins file '" + path + "'");
  csv::Reader reader(in, path,
                     {"bin_id", "fe_lo_mpg", "fe_hi_mpg", "k1_lo", "k1_hi",
                      "k2_lo", "k2_hi", "k3_lo", "k3_hi", "k4_lo", "k4_hi"});
  std::vector<BinPrior> priors;
  while (auto row = reader.next()) {
    BinPrior p;
    p.id = static_cast<int>(csv::parse_int(row->fields[0], path, row->line_no));
    p.fe_lo_mpg = csv::parse_double(row->fields[1], path, row->line_no);
    p.fe_hi_mpg = csv::parse_double(row->fields[2], path, row->line_no);
    for (int i = 0; i < 4; ++i) {
      p.k_lo[i] = csv::parse_double(row->fields[3 + 2 * i], path, row->line_no);
      p.k_hi[i] = csv::parse_double(row->fields[4 + 2 * i], path, row->line_no);
      if (p.k_lo[i] <= 0.0 || p.k_hi[i] < p.k_lo[i]) {
        throw csv::CsvError(path, row->line_no, "invalid k range");
      }
    }
    if (p.fe_lo_mpg <= 0.0 || p.fe_hi_mpg < p.fe_lo_mpg) {
      throw csv::CsvError(path, row->line_no, "invalid fuel-economy range");
    }
    priors.push_back(p);
  }
  return priors;
}

DriveCycle load_drive_cycle(const std::string& path, const std::string& name) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open drive cycle '" + path + "'");
  csv::Reader reader(in, path, {"t_s", "v_ms"});
  DriveCycle cycle;
  cycle.name = name;
  while (auto row = reader.next()) {
    cycle.samples.emplace_back(csv::parse_double(row->fields[0], path, row->line_no),
                               csv::parse_double(row->fields[1], path, row->line_no));
  }
  if (cycle.samples.size() < 2) {
    throw std::runtime_error("drive cycle '" + path + "' too short");
  }
  return cycle;
}

std::vector<std::pair<double, double>> load_doe_anchors(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open DOE anchors '" + path + "'");
  csv::Reader reader(in, path, {"speed_mph", "fe_mpg"});
  std::vector<std::pair<double, double>> anchors;
  while (auto row = reader.next()) {
    anchors.emplace_back(csv::parse_double(row->fields[0], path, row->line_no),
                         csv::parse_double(row->fields[1], path, row->line_no));
  }
  return anchors;
}

void apply_fleet_distribution(std::vector<FuelEconomyBin>& bins,
                              const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fleet file '" + path + "'");
  csv::Reader reader(in, path, {"bin_id", "probability"});
  for (auto& bin : bins) bin.fleet_probability = 0.0;
  double sum = 0.0;
  while (auto row = reader.next()) {
    const int id = static_cast<int>(csv::parse_int(row->fields[0], path, row->line_no));
    const double p = csv::parse_double(row->fields[1], path, row->line_no);
    if (p < 0.0) throw csv::CsvError(path, row->line_no, "negative probability");
    const auto it = std::find_if(bins.begin(), bins.end(),
                                 [id](const FuelEconomyBin& b) { return b.id == id; });
    if (it == bins.end()) {
      throw csv::CsvError(path, row->line_no,
                          "unknown bin id " + std::to_string(id));
    }
    it->fleet_probability = p;
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::runtime_error("fleet probabilities sum to " +
                             csv::format_double(sum) + ", expected 1");
  }
}

void write_calibrated_bins(const std::vector<FuelEconomyBin>& bins,
                           const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  csv::Writer w(out);
  w.row({"bin_id", "k1", "k2", "k3", "k4", "recreated_fe_mpg"});
  for (const auto& bin : bins) {
    w.row({std::to_string(bin.id), csv::format_double(bin.k[0]),
           csv::format_double(bin.k[1]), csv::format_double(bin.k[2]),
           csv::format_double(bin.k[3]), csv::format_double(bin.recreated_fe_mpg)});
  }
}

std::vector<FuelEconomyBin> load_calibrated_bins(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open calibrated bins '" + path + "'");
  csv::Reader reader(in, path, {"bin_id", "k1", "k2", "k3", "k4", "recreated_fe_mpg"});
  std::vector<FuelEconomyBin> bins;
  while (auto row = reader.next()) {
    FuelEconomyBin bin;
    bin.id = static_cast<int>(csv::parse_int(row->fields[0], path, row->line_no));
    for (int i = 0; i < 4; ++i) {
      bin.k[i] = csv::parse_double(row->fields[1 + i], path, row->line_no);
    }
    bin.recreated_fe_mpg = csv::parse_double(row->fields[5], path, row->line_no);
    bin.calibrated = true;
    bins.push_back(bin);
  }
  return bins;
}

}  // namespace streetfuel
