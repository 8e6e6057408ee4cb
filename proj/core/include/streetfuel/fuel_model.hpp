#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "streetfuel/speed_profiles.hpp"

namespace streetfuel {

inline constexpr double kLitersPerUsGallon = 3.78541;
inline constexpr double kKmPerMile = 1.609344;

inline double mph_to_ms(double mph) { return mph * kKmPerMile * 1000.0 / 3600.0; }
inline double ms_to_mph(double ms) { return ms * 3600.0 / (kKmPerMile * 1000.0); }

/// Published range priors for one fuel-economy bin.
struct BinPrior {
  int id{0};
  double fe_lo_mpg{0.0};
  double fe_hi_mpg{0.0};
  std::array<double, 4> k_lo{};
  std::array<double, 4> k_hi{};

  std::array<double, 4> midpoint() const {
    return {0.5 * (k_lo[0] + k_hi[0]), 0.5 * (k_lo[1] + k_hi[1]),
            0.5 * (k_lo[2] + k_hi[2]), 0.5 * (k_lo[3] + k_hi[3])};
  }
  double target_fe_mpg() const { return 0.5 * (fe_lo_mpg + fe_hi_mpg); }
};

/// A vehicle class with calibrated energy indices. Uncalibrated bins cannot
/// be evaluated.
struct FuelEconomyBin {
  int id{0};
  double fe_lo_mpg{0.0};
  double fe_hi_mpg{0.0};
  std::array<double, 4> k{};  // idle s, moving s, (m/s)^2, km indices
  double fleet_probability{0.0};
  bool calibrated{false};
  double recreated_fe_mpg{0.0};
};

struct DriveCycle {
  std::string name;
  std::vector<std::pair<double, double>> samples;  // (t_s, v_ms)
};

/// Cubic fuel-economy-vs-speed fit; evaluation clamps speed to [5, 80] mph.
class DoeCurve {
 public:
  static DoeCurve fit(std::vector<std::pair<double, double>> anchors_mph_mpg);

  double mpg_at(double mph) const;
  const std::vector<std::pair<double, double>>& anchors() const { return anchors_; }
  const std::array<double, 4>& coefficients() const { return coef_; }
  double max_anchor_residual_rel() const { return max_residual_rel_; }

  static constexpr double kMinMph = 5.0;
  static constexpr double kMaxMph = 80.0;

 private:
  std::vector<std::pair<double, double>> anchors_;
  std::array<double, 4> coef_{};
  double max_residual_rel_{0.0};
};

/// Fuel burned over a profile, in liters.
double streetsmart_fc_l(const ProfileFeatures& f, const FuelEconomyBin& bin);

/// Scale each bin's range-midpoint index vector so that the drive cycle
/// reproduces the bin's target fuel economy (the fe-range midpoint) exactly.
std::vector<FuelEconomyBin> calibrate(const std::vector<BinPrior>& priors,
                                      const DriveCycle& cycle,
                                      double idle_threshold_ms = 0.3);

/// Constant-speed baseline: liters over `distance_km` at the curve's fuel
/// economy for the average speed. Zero distance yields zero.
double doe_baseline_fc_l(double avg_speed_ms, double distance_km,
                         const DoeCurve& curve);

/// Fleet-probability-weighted fuel consumption per car, liters.
double fleet_weighted_fcr_l(const ProfileFeatures& f,
                            std::span<const FuelEconomyBin> bins);

/// Bin with the largest fleet probability (smallest id on ties).
const FuelEconomyBin& most_common_bin(std::span<const FuelEconomyBin> bins);

std::vector<BinPrior> load_bin_priors(const std::string& path);
DriveCycle load_drive_cycle(const std::string& path, const std::string& name);
std::vector<std::pair<double, double>> load_doe_anchors(const std::string& path);

/// Attach fleet probabilities from `bin_id,probability` rows; probabilities
/// must sum to 1 within 1e-9. Bins missing from the file get probability 0.
void apply_fleet_distribution(std::vector<FuelEconomyBin>& bins,
                              const std::string& path);

void write_calibrated_bins(const std::vector<FuelEconomyBin>& bins,
                           const std::string& path);
std::vector<FuelEconomyBin> load_calibrated_bins(const std::string& path);

}  // namespace streetfuel
