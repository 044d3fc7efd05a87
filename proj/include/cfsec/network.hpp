#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cfsec/core.hpp"

namespace cfsec {

/// Geometry and propagation parameters of one deployment.
/// Defaults reproduce the 1 km x 1 km, 1.9 GHz scenario.
struct DeploymentConfig {
  double area_side_m = 1000.0;
  int num_aps = 100;
  int num_users = 2;
  int num_eves = 1;
  double carrier_freq_hz = 1.9e9;
  double ap_height_m = 15.0;
  double user_height_m = 1.65;
  double ref_dist_d0_m = 10.0;
  double ref_dist_d1_m = 50.0;
  bool shadowing_enabled = false;
  double shadowing_sigma_db = 8.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(area_side_m > 0.0) || !std::isfinite(area_side_m))
      throw ConfigError("area_side_m must be positive");
    if (num_aps < 1) throw ConfigError("num_aps must be >= 1");
    if (num_users < 1) throw ConfigError("num_users must be >= 1");
    if (num_eves < 0) throw ConfigError("num_eves must be >= 0");
    if (!(carrier_freq_hz > 0.0)) throw ConfigError("carrier_freq_hz must be positive");
    if (!(ap_height_m > 0.0) || !(user_height_m > 0.0))
      throw ConfigError("antenna heights must be positive");
    const double diagonal = area_side_m * std::sqrt(2.0);
    if (!(ref_dist_d0_m > 0.0) || !(ref_dist_d0_m < ref_dist_d1_m) || !(ref_dist_d1_m < diagonal))
      throw ConfigError("reference distances must satisfy 0 < d0 < d1 < area diagonal");
    if (shadowing_enabled && !(shadowing_sigma_db >= 0.0))
      throw ConfigError("shadowing_sigma_db must be non-negative");
  }
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Point2& a, const Point2& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Positions and large-scale fading of one drop. beta is M x K, beta_eve is M x J.
struct NetworkRealization {
  std::vector<Point2> ap_positions;
  std::vector<Point2> user_positions;
  std::vector<Point2> eve_positions;
  Matrix beta;
  Matrix beta_eve;

  int num_aps() const { return static_cast<int>(beta.rows()); }
  int num_users() const { return static_cast<int>(beta.cols()); }
  int num_eves() const { return static_cast<int>(beta_eve.cols()); }
};

// COST-231 Hata constant L in dB, with f in MHz and heights in meters.
inline double cost_hata_constant_db(const DeploymentConfig& cfg) {
  const double log_f = std::log10(cfg.carrier_freq_hz / 1e6);
  return 46.3 + 33.9 * log_f - 13.82 * std::log10(cfg.ap_height_m) -
         (1.1 * log_f - 0.7) * cfg.user_height_m + (1.56 * log_f - 0.8);
}

/// Three-slope path loss in dB (a negative number: gain in dB) at planar distance d.
inline double path_loss_db(double distance_m, const DeploymentConfig& cfg) {
  if (!(distance_m >= 0.0)) throw DomainError("path_loss: distance must be non-negative");
  const double L = cost_hata_constant_db(cfg);
  const double d_km = distance_m / 1000.0;
  const double d0_km = cfg.ref_dist_d0_m / 1000.0;
  const double d1_km = cfg.ref_dist_d1_m / 1000.0;
  if (distance_m > cfg.ref_dist_d1_m) return -L - 35.0 * std::log10(d_km);
  if (distance_m > cfg.ref_dist_d0_m) return -L - 15.0 * std::log10(d1_km) - 20.0 * std::log10(d_km);
  return -L - 15.0 * std::log10(d1_km) - 20.0 * std::log10(d0_km);
}

/// Linear large-scale gain without shadowing.
inline double path_loss(double distance_m, const DeploymentConfig& cfg) {
  return std::pow(10.0, path_loss_db(distance_m, cfg) / 10.0);
}

/// Linear large-scale gain; log-normal shadowing is drawn from rng when
/// enabled and the link is beyond d1.
inline double path_loss(double distance_m, const DeploymentConfig& cfg, Rng& rng) {
  double gain_db = path_loss_db(distance_m, cfg);
  if (cfg.shadowing_enabled && distance_m > cfg.ref_dist_d1_m) {
    std::normal_distribution<double> z(0.0, 1.0);
    gain_db += cfg.shadowing_sigma_db * z(rng);
  }
  return std::pow(10.0, gain_db / 10.0);
}

/// Drops APs, users and Eves uniformly in the square and evaluates every link.
/// Order of draws: APs, users, Eves (x then y each), then shadowing per link.
inline NetworkRealization deploy(const DeploymentConfig& cfg, Rng& rng) {
  cfg.validate();
  std::uniform_real_distribution<double> coord(0.0, cfg.area_side_m);
  auto drop = [&](int n) {
    std::vector<Point2> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) {
      p.x = coord(rng);
      p.y = coord(rng);
    }
    return pts;
  };

  NetworkRealization net;
  net.ap_positions = drop(cfg.num_aps);
  net.user_positions = drop(cfg.num_users);
  net.eve_positions = drop(cfg.num_eves);

  auto gains = [&](const std::vector<Point2>& terminals) {
    Matrix b(cfg.num_aps, static_cast<Eigen::Index>(terminals.size()));
    for (int m = 0; m < cfg.num_aps; ++m)
      for (std::size_t k = 0; k < terminals.size(); ++k)
        b(m, static_cast<Eigen::Index>(k)) =
            path_loss(distance(net.ap_positions[static_cast<std::size_t>(m)], terminals[k]), cfg, rng);
    return b;
  };
  net.beta = gains(net.user_positions);
  net.beta_eve = gains(net.eve_positions);
  return net;
}

inline NetworkRealization deploy(const DeploymentConfig& cfg) {
  Rng rng(cfg.seed);
  return deploy(cfg, rng);
}

// Same deployment with the eavesdroppers removed (security-oblivious view).
inline NetworkRealization without_eves(const NetworkRealization& net) {
  NetworkRealization out = net;
  out.eve_positions.clear();
  out.beta_eve.resize(net.beta.rows(), 0);
  return out;
}

}  // namespace cfsec
