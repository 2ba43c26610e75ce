#include "hyfi/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace hyfi {
namespace {

void require(bool ok, const std::string& field, const std::string& reason) {
  if (!ok) throw Error("invalid config: " + field + ": " + reason);
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void RoomGeometry::validate() const {
  require(length_m > 0 && width_m > 0 && height_m > 0, "room", "dimensions must be > 0");
  require(led_grid_count >= 1, "room.led_grid_count", "must be >= 1");
  require(transmitter_height_m > 0 && transmitter_height_m < height_m,
          "room.transmitter_height_m", "must lie in (0, height)");
  require(receiver_height_m >= 0 && receiver_height_m < transmitter_height_m,
          "room.receiver_height_m", "must lie below the transmitters");
}

double LifiParams::lambertian_order() const {
  return -1.0 / std::log2(std::cos(deg_to_rad(half_power_semiangle_deg)));
}

void ScenarioConfig::validate() const {
  room.validate();
  require(num_users >= 1, "num_users", "K >= 1 violated");
  require(num_wifi_antennas >= 1, "num_wifi_antennas", "M >= 1 violated");
  require(wifi.carrier_hz > 0, "wifi.carrier_hz", "must be > 0");
  require(wifi.breakpoint_m > 0, "wifi.breakpoint_m", "must be > 0");
  require(wifi.shadow_in_std_db >= 0 && wifi.shadow_out_std_db >= 0, "wifi.shadow", "std must be >= 0");
  require(wifi.bandwidth_hz > 0, "wifi.bandwidth_hz", "must be > 0");
  require(wifi.noise_psd_w_per_hz > 0, "wifi.noise_psd", "must be > 0");
  require(wifi.amp_efficiency > 0 && wifi.amp_efficiency <= 1, "wifi.amp_efficiency", "must lie in (0, 1]");
  require(lifi.half_power_semiangle_deg > 0 && lifi.half_power_semiangle_deg < 90,
          "lifi.half_power_semiangle_deg", "0 < psi_half < 90 violated");
  require(lifi.fov_deg > 0 && lifi.fov_deg <= 90, "lifi.fov_deg", "0 < FoV <= 90 violated");
  require(lifi.detector_area_m2 > 0, "lifi.detector_area_m2", "must be > 0");
  require(lifi.filter_gain > 0, "lifi.filter_gain", "must be > 0");
  require(lifi.responsivity_a_per_w > 0, "lifi.responsivity_a_per_w", "must be > 0");
  require(lifi.refractive_index > 0, "lifi.refractive_index", "must be > 0");
  require(lifi.bandwidth_hz > 0, "lifi.bandwidth_hz", "must be > 0");
  require(lifi.noise_psd_a2_per_hz > 0, "lifi.noise_psd", "must be > 0");
  require(lifi.amp_efficiency > 0 && lifi.amp_efficiency <= 1, "lifi.amp_efficiency", "must lie in (0, 1]");
  require(lifi.dc_bias_a > 0, "lifi.dc_bias_a", "x_DC > 0 violated");
  require(lifi.dc_bias_a < lifi.max_current_a, "lifi.dc_bias_a", "x_DC < I_max violated");
  require(max_power_w > 0, "max_power", "must be > 0");
}

ScenarioConfig parse_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(std::string("config parse error: ") + e.what());
  }
  ScenarioConfig c;
  try {
    if (j.contains("room")) {
      const auto& r = j.at("room");
      read(r, "length_m", c.room.length_m);
      read(r, "width_m", c.room.width_m);
      read(r, "height_m", c.room.height_m);
      read(r, "led_grid_count", c.room.led_grid_count);
      c.room.transmitter_height_m = c.room.height_m - 1.0;
      read(r, "transmitter_height_m", c.room.transmitter_height_m);
      read(r, "receiver_height_m", c.room.receiver_height_m);
    }
    read(j, "num_users", c.num_users);
    read(j, "num_wifi_antennas", c.num_wifi_antennas);
    read(j, "lifi_enabled", c.lifi_enabled);
    if (j.contains("max_power_dbm")) c.max_power_w = dbm_to_watts(j.at("max_power_dbm").get<double>());
    read(j, "max_power_w", c.max_power_w);
    read(j, "seed", c.seed);
    if (j.contains("wifi")) {
      const auto& w = j.at("wifi");
      read(w, "carrier_hz", c.wifi.carrier_hz);
      read(w, "breakpoint_m", c.wifi.breakpoint_m);
      read(w, "shadow_in_std_db", c.wifi.shadow_in_std_db);
      read(w, "shadow_out_std_db", c.wifi.shadow_out_std_db);
      read(w, "shadowing", c.wifi.shadowing);
      read(w, "bandwidth_hz", c.wifi.bandwidth_hz);
      if (w.contains("noise_psd_dbm_per_hz"))
        c.wifi.noise_psd_w_per_hz = dbm_to_watts(w.at("noise_psd_dbm_per_hz").get<double>());
      read(w, "noise_psd_w_per_hz", c.wifi.noise_psd_w_per_hz);
      read(w, "amp_efficiency", c.wifi.amp_efficiency);
    }
    if (j.contains("lifi")) {
      const auto& l = j.at("lifi");
      read(l, "half_power_semiangle_deg", c.lifi.half_power_semiangle_deg);
      read(l, "fov_deg", c.lifi.fov_deg);
      read(l, "detector_area_m2", c.lifi.detector_area_m2);
      read(l, "filter_gain", c.lifi.filter_gain);
      read(l, "responsivity_a_per_w", c.lifi.responsivity_a_per_w);
      read(l, "refractive_index", c.lifi.refractive_index);
      read(l, "bandwidth_hz", c.lifi.bandwidth_hz);
      read(l, "noise_psd_a2_per_hz", c.lifi.noise_psd_a2_per_hz);
      read(l, "amp_efficiency", c.lifi.amp_efficiency);
      read(l, "dc_bias_a", c.lifi.dc_bias_a);
      read(l, "max_current_a", c.lifi.max_current_a);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config parse error: ") + e.what());
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<Point3> place_leds(const RoomGeometry& room) {
  const int n = room.led_grid_count;
  std::vector<Point3> leds;
  leds.reserve(static_cast<std::size_t>(n) * n);
  const double dx = room.width_m / n;
  const double dy = room.length_m / n;
  // LED order: x-major within each y row.
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      leds.push_back({(ix + 0.5) * dx, (iy + 0.5) * dy, room.transmitter_height_m});
    }
  }
  return leds;
}

std::vector<Point3> place_users(const RoomGeometry& room, int num_users, std::uint64_t seed) {
  if (num_users < 1) throw Error("place_users: K >= 1 required");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(0.0, room.width_m);
  std::uniform_real_distribution<double> uy(0.0, room.length_m);
  std::vector<Point3> users;
  users.reserve(num_users);
  for (int k = 0; k < num_users; ++k) {
    const double x = ux(rng);
    const double y = uy(rng);
    users.push_back({x, y, room.receiver_height_m});
  }
  return users;
}

Scenario build_scenario(const ScenarioConfig& config, std::uint64_t seed) {
  config.validate();
  Scenario s;
  s.config = config;
  if (config.lifi_enabled) s.led_positions = place_leds(config.room);
  s.wifi_position = {config.room.width_m / 2.0, config.room.length_m / 2.0,
                     config.room.transmitter_height_m};
  s.user_positions = place_users(config.room, config.num_users, seed);
  return s;
}

}  // namespace hyfi
