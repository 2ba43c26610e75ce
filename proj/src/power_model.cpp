#include "hyfi/power_model.hpp"

#include <algorithm>

namespace hyfi {
namespace {

void check_efficiency(double eta) {
  if (!(eta > 0 && eta <= 1)) throw Error("amplifier efficiency must lie in (0, 1]");
}

}  // namespace

double lifi_ac_power(const Eigen::MatrixXd& f, double eta) {
  check_efficiency(eta);
  return f.squaredNorm() / eta;
}

double wifi_power(const Eigen::MatrixXcd& f, double eta) {
  check_efficiency(eta);
  return f.squaredNorm() / eta;
}

PowerBreakdown power_breakdown(const Eigen::MatrixXcd& wifi, double wifi_eta, const Eigen::MatrixXd& lifi,
                               double lifi_eta) {
  PowerBreakdown p;
  p.wifi_w = wifi.size() ? wifi_power(wifi, wifi_eta) : 0.0;
  p.lifi_w = lifi.size() ? lifi_ac_power(lifi, lifi_eta) : 0.0;
  return p;
}

double hybrid_ee(std::span<const UserRate> rates, const PowerBreakdown& power) {
  if (!(power.total_w() > 0)) throw Error("hybrid_ee: total power must be > 0");
  double sum = 0.0;
  for (const auto& r : rates) sum += r.wifi;
  for (const auto& r : rates) sum += r.lifi;
  return sum / power.total_w();
}

double led_drive_bound(double dc_bias, double max_current) {
  if (!(dc_bias > 0 && dc_bias < max_current)) throw Error("led_drive_bound: 0 < x_DC < I_max violated");
  return std::min(dc_bias, max_current - dc_bias);
}

LedCheck check_led_constraint(const Eigen::MatrixXd& f, double bound, double tol) {
  LedCheck c;
  double worst = 0.0;
  for (int l = 0; l < f.rows(); ++l) worst = std::max(worst, f.row(l).cwiseAbs().sum());
  c.margin = bound - worst;
  c.satisfied = worst <= bound + tol;
  return c;
}

}  // namespace hyfi
