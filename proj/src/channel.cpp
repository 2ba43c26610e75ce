#include "hyfi/channel.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include "hyfi/csv.hpp"

namespace hyfi {

double wifi_pathloss_db(double d, double fc, double d_bp, double shadow_in_db, double shadow_out_db) {
  if (!(d > 0)) throw Error("wifi_pathloss_db: distance must be > 0");
  if (!(fc > 0) || !(d_bp > 0)) throw Error("wifi_pathloss_db: fc and d_BP must be > 0");
  const double free_space = 20.0 * std::log10(d) + 20.0 * std::log10(fc) - 147.5;
  if (d <= d_bp) return free_space + shadow_in_db;
  return free_space + 35.0 * std::log10(d / d_bp) + shadow_out_db;
}

Eigen::VectorXcd wifi_channel(const Scenario& scenario, int user, std::uint64_t seed) {
  if (user < 0 || user >= scenario.num_users()) throw Error("wifi_channel: user index out of range");
  const auto& w = scenario.config.wifi;
  const int m = scenario.num_antennas();
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(user), 0x57u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double d = distance(scenario.wifi_position, scenario.user_positions[user]);
  const bool within_bp = d <= w.breakpoint_m;
  // Shadowing is drawn first so the fading draws do not depend on the flag.
  const double shadow_draw = normal(rng);
  double shadow_in = 0.0;
  double shadow_out = 0.0;
  if (w.shadowing) {
    if (within_bp) shadow_in = w.shadow_in_std_db * shadow_draw;
    else shadow_out = w.shadow_out_std_db * shadow_draw;
  }
  const double pl_db = wifi_pathloss_db(d, w.carrier_hz, w.breakpoint_m, shadow_in, shadow_out);
  const double amplitude = std::pow(10.0, -pl_db / 20.0);
  const double ricean = within_bp ? 1.0 : 0.0;
  const Complex los = std::sqrt(ricean / (1.0 + ricean)) * std::polar(1.0, kPi / 4.0);
  const double nlos = std::sqrt(1.0 / (1.0 + ricean));

  Eigen::VectorXcd h(m);
  const double s = std::sqrt(0.5);
  for (int i = 0; i < m; ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    h(i) = (los + nlos * Complex(s * re, s * im)) * amplitude;
  }
  return h;
}

double lifi_los_gain(const Point3& led, const Point3& user, const LifiParams& p) {
  const double d = distance(led, user);
  if (!(d > 0)) throw Error("lifi_los_gain: coincident LED and receiver");
  if (!(led.z > user.z)) return 0.0;
  const double cos_angle = (led.z - user.z) / d;
  const double angle = std::acos(std::min(1.0, cos_angle));
  const double fov = deg_to_rad(p.fov_deg);
  if (angle > fov) return 0.0;
  const double m = p.lambertian_order();
  const double sin_fov = std::sin(fov);
  const double concentrator = p.refractive_index * p.refractive_index / (sin_fov * sin_fov);
  return (m + 1.0) * p.detector_area_m2 * p.filter_gain * p.responsivity_a_per_w / (2.0 * kPi * d * d) *
         std::pow(cos_angle, m) * cos_angle * concentrator;
}

Eigen::VectorXd lifi_channel(const Scenario& scenario, int user) {
  if (user < 0 || user >= scenario.num_users()) throw Error("lifi_channel: user index out of range");
  Eigen::VectorXd h(scenario.num_leds());
  for (int l = 0; l < scenario.num_leds(); ++l) {
    h(l) = lifi_los_gain(scenario.led_positions[l], scenario.user_positions[user], scenario.config.lifi);
  }
  return h;
}

ChannelSet realize_channels(const Scenario& scenario, std::uint64_t seed) {
  ChannelSet c;
  const int k_users = scenario.num_users();
  c.wifi.resize(scenario.num_antennas(), k_users);
  c.lifi.resize(scenario.num_leds(), k_users);
  for (int k = 0; k < k_users; ++k) {
    c.wifi.col(k) = wifi_channel(scenario, k, seed);
    if (scenario.num_leds() > 0) c.lifi.col(k) = lifi_channel(scenario, k);
  }
  return c;
}

void write_channels_csv(std::ostream& out, const ChannelSet& channels) {
  CsvWriter csv(out, {"user", "tech", "index", "re", "im"});
  for (int k = 0; k < channels.num_users(); ++k) {
    for (int i = 0; i < channels.wifi.rows(); ++i) {
      csv.row(k, "wifi", i, channels.wifi(i, k).real(), channels.wifi(i, k).imag());
    }
    for (int i = 0; i < channels.lifi.rows(); ++i) {
      csv.row(k, "lifi", i, channels.lifi(i, k), 0.0);
    }
  }
}

}  // namespace hyfi
