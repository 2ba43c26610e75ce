#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hyfi/common.hpp"

namespace hyfi {

struct RoomGeometry {
  double length_m = 10.0;
  double width_m = 10.0;
  double height_m = 5.0;
  int led_grid_count = 3;  // LEDs per axis
  double transmitter_height_m = 4.0;
  double receiver_height_m = 1.0;

  void validate() const;
};

struct WifiParams {
  double carrier_hz = 2.4e9;
  double breakpoint_m = 5.0;
  double shadow_in_std_db = 3.0;
  double shadow_out_std_db = 5.0;
  bool shadowing = true;
  double bandwidth_hz = 10e6;
  double noise_psd_w_per_hz = dbm_to_watts(-174.0);
  double amp_efficiency = 0.5;

  double noise_variance() const { return noise_psd_w_per_hz * bandwidth_hz; }
};

struct LifiParams {
  double half_power_semiangle_deg = 70.0;
  double fov_deg = 60.0;
  double detector_area_m2 = 1e-4;
  double filter_gain = 1.0;
  double responsivity_a_per_w = 0.54;
  double refractive_index = 1.5;
  double bandwidth_hz = 20e6;
  double noise_psd_a2_per_hz = 1e-19;
  double amp_efficiency = 0.5;
  double dc_bias_a = 2.449489742783178;  // sqrt(6)
  double max_current_a = 5.0;

  double noise_variance() const { return noise_psd_a2_per_hz * bandwidth_hz; }
  /// Lambertian order m = -1 / log2(cos(semiangle)).
  double lambertian_order() const;
};

struct ScenarioConfig {
  RoomGeometry room;
  int num_users = 3;
  int num_wifi_antennas = 8;
  bool lifi_enabled = true;  // false models a WiFi-only deployment
  WifiParams wifi;
  LifiParams lifi;
  double max_power_w = dbm_to_watts(38.0);
  std::uint64_t seed = 1;

  void validate() const;
  int num_leds() const {
    return lifi_enabled ? room.led_grid_count * room.led_grid_count : 0;
  }
};

struct Scenario {
  ScenarioConfig config;
  std::vector<Point3> led_positions;
  Point3 wifi_position;
  std::vector<Point3> user_positions;

  int num_users() const { return static_cast<int>(user_positions.size()); }
  int num_leds() const { return static_cast<int>(led_positions.size()); }
  int num_antennas() const { return config.num_wifi_antennas; }
};

/// Parses a JSON scenario file. Omitted fields keep the defaults above.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config(const std::string& json_text);

std::vector<Point3> place_leds(const RoomGeometry& room);
/// Binomial point process: K i.i.d. uniform points on the floor at receiver height.
std::vector<Point3> place_users(const RoomGeometry& room, int num_users, std::uint64_t seed);
Scenario build_scenario(const ScenarioConfig& config, std::uint64_t seed);

}  // namespace hyfi
