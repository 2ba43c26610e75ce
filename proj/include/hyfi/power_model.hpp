#pragma once

#include <span>

#include "hyfi/rate_model.hpp"

namespace hyfi {

struct PowerBreakdown {
  double wifi_w = 0.0;
  double lifi_w = 0.0;
  double total_w() const { return wifi_w + lifi_w; }
};

/// AC power of the LED drivers: (1/eta) * sum_k ||f_k||^2.
double lifi_ac_power(const Eigen::MatrixXd& precoders, double efficiency);
/// WiFi transmit-signal power (circuit power excluded).
double wifi_power(const Eigen::MatrixXcd& precoders, double efficiency);

PowerBreakdown power_breakdown(const Eigen::MatrixXcd& wifi, double wifi_efficiency,
                               const Eigen::MatrixXd& lifi, double lifi_efficiency);

/// Sum-rate over total transmit power, nats/J.
double hybrid_ee(std::span<const UserRate> rates, const PowerBreakdown& power);

/// Largest per-LED AC swing that keeps the drive current within [0, I_max].
double led_drive_bound(double dc_bias, double max_current);

struct LedCheck {
  bool satisfied = true;
  double margin = 0.0;  // bound minus the largest row l1 norm
};

/// Per-LED check sum_k |f_{l,k}| <= bound (closed constraint, with absolute tolerance `tol`).
LedCheck check_led_constraint(const Eigen::MatrixXd& lifi_precoders, double bound, double tol = 0.0);

}  // namespace hyfi
