#include "hyfi/system.hpp"

#include <algorithm>
#include <limits>

namespace hyfi {

void SystemModel::validate() const {
  const int k = num_users();
  if (k < 1) throw Error("system: no users");
  if (has_lifi() && lifi_channel.cols() != k) throw Error("system: LiFi channel user count mismatch");
  if (static_cast<int>(slices.size()) != k) throw Error("system: slice assignment size mismatch");
  if (!(wifi_noise > 0 && lifi_noise > 0)) throw Error("system: noise variance must be > 0");
  if (!(max_power_w > 0)) throw Error("system: P_max must be > 0");
  if (!(led_bound > 0)) throw Error("system: LED bound must be > 0");
  for (const auto& s : slices) s.validate();
}

SystemModel make_system(const Scenario& scenario, const ChannelSet& channels, SliceAssignment slices) {
  const auto& cfg = scenario.config;
  SystemModel m;
  m.wifi_channel = channels.wifi;
  m.lifi_channel = channels.lifi;
  m.wifi_noise = cfg.wifi.noise_variance();
  m.lifi_noise = cfg.lifi.noise_variance();
  m.wifi_bandwidth_hz = cfg.wifi.bandwidth_hz;
  m.lifi_bandwidth_hz = cfg.lifi.bandwidth_hz;
  m.wifi_efficiency = cfg.wifi.amp_efficiency;
  m.lifi_efficiency = cfg.lifi.amp_efficiency;
  m.max_power_w = cfg.max_power_w;
  m.led_bound = led_drive_bound(cfg.lifi.dc_bias_a, cfg.lifi.max_current_a);
  m.slices = std::move(slices);
  m.validate();
  return m;
}

Evaluation evaluate(const SystemModel& model, const Eigen::MatrixXcd& wifi, const Eigen::MatrixXd& lifi,
                    double tol) {
  const int k_users = model.num_users();
  if (wifi.rows() != model.num_antennas() || wifi.cols() != k_users) {
    throw Error("evaluate: WiFi precoder dimensions mismatch");
  }
  if (lifi.rows() != model.num_leds() || (model.has_lifi() && lifi.cols() != k_users)) {
    throw Error("evaluate: LiFi precoder dimensions mismatch");
  }
  Evaluation e;
  e.wifi_sinr.assign(k_users, 0.0);
  e.lifi_sinr.assign(k_users, 0.0);
  e.rates.resize(k_users);
  e.min_rate_slack = std::numeric_limits<double>::infinity();
  for (int k = 0; k < k_users; ++k) {
    const auto& slice = model.slices[k];
    e.wifi_sinr[k] = sinr(Eigen::VectorXcd(model.wifi_channel.col(k)), wifi, k, model.wifi_noise).gamma;
    e.rates[k].wifi = link_rate(slice, e.wifi_sinr[k], model.wifi_bandwidth_hz, Tech::WiFi);
    if (model.has_lifi()) {
      e.lifi_sinr[k] = sinr(Eigen::VectorXd(model.lifi_channel.col(k)), lifi, k, model.lifi_noise).gamma;
      e.rates[k].lifi = link_rate(slice, e.lifi_sinr[k], model.lifi_bandwidth_hz, Tech::LiFi);
    }
    e.sum_rate += e.rates[k].total();
    e.min_rate_slack = std::min(e.min_rate_slack, e.rates[k].total() - slice.rate_min);
  }
  e.power = power_breakdown(wifi, model.wifi_efficiency, lifi, model.lifi_efficiency);
  e.ee_defined = e.power.total_w() > 0;
  if (e.ee_defined) e.ee = hybrid_ee(e.rates, e.power);
  e.rates_ok = e.min_rate_slack >= -tol;
  e.power_ok = e.power.total_w() <= model.max_power_w + tol;
  const auto led = check_led_constraint(lifi, model.led_bound, tol);
  e.led_ok = led.satisfied;
  e.led_margin = led.margin;
  return e;
}

}  // namespace hyfi
