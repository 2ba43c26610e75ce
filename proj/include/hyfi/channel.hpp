#pragma once

#include <cstdint>
#include <iosfwd>

#include "hyfi/scenario.hpp"

namespace hyfi {

/// Realized channels of one scenario. Column k holds user k's vector.
struct ChannelSet {
  Eigen::MatrixXcd wifi;  // M x K
  Eigen::MatrixXd lifi;   // L x K (L = 0 when LiFi is disabled)

  int num_users() const { return static_cast<int>(wifi.cols()); }
};

/// Indoor WiFi path loss in dB. `shadow_in_db` / `shadow_out_db` are realized
/// shadowing values (not standard deviations).
double wifi_pathloss_db(double distance_m, double carrier_hz, double breakpoint_m,
                        double shadow_in_db = 0.0, double shadow_out_db = 0.0);

/// Ricean/Rayleigh WiFi channel of one user including path loss. Deterministic per
/// (scenario, user, seed).
Eigen::VectorXcd wifi_channel(const Scenario& scenario, int user, std::uint64_t seed);

/// Lambertian line-of-sight DC gain between one LED and one receiver; 0 outside the FoV.
double lifi_los_gain(const Point3& led, const Point3& user, const LifiParams& params);

Eigen::VectorXd lifi_channel(const Scenario& scenario, int user);

ChannelSet realize_channels(const Scenario& scenario, std::uint64_t seed);

/// CSV with header `user,tech,index,re,im`.
void write_channels_csv(std::ostream& out, const ChannelSet& channels);

}  // namespace hyfi
