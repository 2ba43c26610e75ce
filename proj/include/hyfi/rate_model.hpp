#pragma once

#include <string>
#include <vector>

#include "hyfi/common.hpp"

namespace hyfi {

enum class Slice { eMBB, URLLC, mMTC };

const char* to_string(Slice s);
Slice slice_from_string(const std::string& name);

/// Per-user service requirements attached to a slice label.
struct SliceParams {
  Slice slice = Slice::eMBB;
  double tx_time_s = 0.05e-3;
  double error_prob = 1e-5;
  double rate_min = 1e6;        // nats/s
  double latency_max_s = 4e-3;

  bool finite_blocklength() const { return slice != Slice::eMBB; }
  /// L_k = round(BW * T^t).
  long blocklength(double bandwidth_hz) const;
  void validate() const;
};

/// Defaults: eMBB 4 ms / 1e6 nats/s, URLLC 1 ms / 1e5, mMTC 5 ms / 1e5; T^t = 0.05 ms, eps = 1e-5.
SliceParams default_slice_params(Slice s);

using SliceAssignment = std::vector<SliceParams>;

struct SinrTerms {
  double gamma = 0.0;
  double signal = 0.0;  // X
  double interference_plus_noise = 0.0;  // Y
};

/// SINR of user k: |h_k^H f_k|^2 / (sum_{j!=k} |h_k^H f_j|^2 + noise).
SinrTerms sinr(const Eigen::VectorXcd& h, const Eigen::MatrixXcd& precoders, int k, double noise_var);
/// Real LiFi pairing h_k^T f_j.
SinrTerms sinr(const Eigen::VectorXd& h, const Eigen::MatrixXd& precoders, int k, double noise_var);

/// Gaussian tail Q(x).
double q_function(double x);
/// x such that Q(x) = eps.
double inverse_q(double eps);

/// Effective SINR inside the log: gamma for WiFi, (e / 2 pi) gamma for LiFi.
inline double effective_sinr(double gamma, Tech tech) {
  return tech == Tech::WiFi ? gamma : kE / (2.0 * kPi) * gamma;
}
/// Prefactor on the bandwidth: 1 for WiFi, 1/2 for LiFi (Hermitian symmetry).
inline double bandwidth_factor(Tech tech) { return tech == Tech::WiFi ? 1.0 : 0.5; }
/// Factor inside the dispersion square root: 1 for WiFi, 0.5 for LiFi.
inline double dispersion_factor(Tech tech) { return tech == Tech::WiFi ? 1.0 : 0.5; }

double shannon_rate(double gamma, double bandwidth_hz, Tech tech);
double dispersion(double gamma, Tech tech);
double fbl_rate(double gamma, double bandwidth_hz, double error_prob, double blocklength, Tech tech);

struct UserRate {
  double wifi = 0.0;
  double lifi = 0.0;
  double total() const { return wifi + lifi; }
};

struct RateParams {
  double wifi_bandwidth_hz = 10e6;
  double lifi_bandwidth_hz = 20e6;
};

/// Slice-aware rate: Shannon for eMBB, finite blocklength for URLLC / mMTC.
UserRate user_rate(const SliceParams& slice, double gamma_wifi, double gamma_lifi, const RateParams& params);

/// Rate of a single link for the given slice.
double link_rate(const SliceParams& slice, double gamma, double bandwidth_hz, Tech tech);

}  // namespace hyfi
