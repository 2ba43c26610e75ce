#pragma once

#include <vector>

#include "hyfi/channel.hpp"
#include "hyfi/power_model.hpp"
#include "hyfi/rate_model.hpp"

namespace hyfi {

/// Everything the precoder design treats as fixed: realized channels, noise,
/// bandwidths, amplifier efficiencies, budgets and the slice assignment.
struct SystemModel {
  Eigen::MatrixXcd wifi_channel;  // M x K
  Eigen::MatrixXd lifi_channel;   // L x K (L = 0 for WiFi-only)
  double wifi_noise = 1.0;
  double lifi_noise = 1.0;
  double wifi_bandwidth_hz = 10e6;
  double lifi_bandwidth_hz = 20e6;
  double wifi_efficiency = 0.5;
  double lifi_efficiency = 0.5;
  double max_power_w = 1.0;
  double led_bound = 1.0;
  SliceAssignment slices;

  int num_users() const { return static_cast<int>(wifi_channel.cols()); }
  int num_antennas() const { return static_cast<int>(wifi_channel.rows()); }
  int num_leds() const { return static_cast<int>(lifi_channel.rows()); }
  bool has_lifi() const { return num_leds() > 0; }
  double bandwidth(Tech t) const { return t == Tech::WiFi ? wifi_bandwidth_hz : lifi_bandwidth_hz; }
  double efficiency(Tech t) const { return t == Tech::WiFi ? wifi_efficiency : lifi_efficiency; }

  /// Throws on inconsistent dimensions or parameters.
  void validate() const;
};

SystemModel make_system(const Scenario& scenario, const ChannelSet& channels, SliceAssignment slices);

/// True (non-surrogate) performance of a precoder pair.
struct Evaluation {
  std::vector<double> wifi_sinr;
  std::vector<double> lifi_sinr;
  std::vector<UserRate> rates;
  PowerBreakdown power;
  double sum_rate = 0.0;
  double ee = 0.0;  // 0 when power is zero (see ee_defined)
  bool ee_defined = false;
  bool rates_ok = false;  // C1: every user's total rate >= R_min - tol
  bool power_ok = false;  // C2
  bool led_ok = false;    // C3
  double min_rate_slack = 0.0;  // min_k (R_k - R_min,k)
  double led_margin = 0.0;

  bool feasible() const { return rates_ok && power_ok && led_ok; }
};

Evaluation evaluate(const SystemModel& model, const Eigen::MatrixXcd& wifi, const Eigen::MatrixXd& lifi,
                    double tol = 1e-6);

}  // namespace hyfi
