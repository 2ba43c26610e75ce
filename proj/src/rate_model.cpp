#include "hyfi/rate_model.hpp"

#include <cmath>

namespace hyfi {

const char* to_string(Slice s) {
  switch (s) {
    case Slice::eMBB: return "eMBB";
    case Slice::URLLC: return "URLLC";
    case Slice::mMTC: return "mMTC";
  }
  return "?";
}

Slice slice_from_string(const std::string& name) {
  if (name == "eMBB" || name == "embb") return Slice::eMBB;
  if (name == "URLLC" || name == "urllc") return Slice::URLLC;
  if (name == "mMTC" || name == "mmtc") return Slice::mMTC;
  throw Error("unknown slice label: " + name);
}

long SliceParams::blocklength(double bandwidth_hz) const {
  return std::lround(bandwidth_hz * tx_time_s);
}

void SliceParams::validate() const {
  if (!(tx_time_s > 0)) throw Error("slice: T^t must be > 0");
  if (!(error_prob > 0 && error_prob < 0.5)) throw Error("slice: error probability must lie in (0, 0.5)");
  if (!(rate_min >= 0)) throw Error("slice: R_min must be >= 0");
  if (!(latency_max_s > 0)) throw Error("slice: T^max must be > 0");
}

SliceParams default_slice_params(Slice s) {
  SliceParams p;
  p.slice = s;
  switch (s) {
    case Slice::eMBB:
      p.rate_min = 1e6;
      p.latency_max_s = 4e-3;
      break;
    case Slice::URLLC:
      p.rate_min = 1e5;
      p.latency_max_s = 1e-3;
      break;
    case Slice::mMTC:
      p.rate_min = 1e5;
      p.latency_max_s = 5e-3;
      break;
  }
  return p;
}

namespace {

template <typename Vec, typename Mat>
SinrTerms sinr_impl(const Vec& h, const Mat& f, int k, double noise_var) {
  if (h.size() != f.rows()) throw Error("sinr: channel / precoder dimension mismatch");
  if (k < 0 || k >= f.cols()) throw Error("sinr: user index out of range");
  if (!(noise_var > 0)) throw Error("sinr: noise variance must be > 0");
  SinrTerms t;
  double interference = 0.0;
  for (int j = 0; j < f.cols(); ++j) {
    const double p = std::norm(h.dot(f.col(j)));  // Eigen's dot conjugates the first argument
    if (j == k) t.signal = p;
    else interference += p;
  }
  t.interference_plus_noise = interference + noise_var;
  t.gamma = t.signal / t.interference_plus_noise;
  return t;
}

}  // namespace

SinrTerms sinr(const Eigen::VectorXcd& h, const Eigen::MatrixXcd& f, int k, double noise_var) {
  return sinr_impl(h, f, k, noise_var);
}

SinrTerms sinr(const Eigen::VectorXd& h, const Eigen::MatrixXd& f, int k, double noise_var) {
  return sinr_impl(h, f, k, noise_var);
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double inverse_q(double eps) {
  if (!(eps > 0 && eps < 1)) throw Error("inverse_q: eps must lie in (0, 1)");
  if (eps == 0.5) return 0.0;
  // Bisection to a tight bracket, then Newton on Q(x) - eps.
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (q_function(mid) > eps) lo = mid;
    else hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 8; ++i) {
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
    if (pdf <= 0) break;
    const double step = (q_function(x) - eps) / pdf;  // dQ/dx = -pdf
    x += step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) break;
  }
  return x;
}

double shannon_rate(double gamma, double bw, Tech tech) {
  if (gamma < 0) throw Error("shannon_rate: negative SINR");
  return bandwidth_factor(tech) * bw * std::log1p(effective_sinr(gamma, tech));
}

double dispersion(double gamma, Tech tech) {
  if (gamma < 0) throw Error("dispersion: negative SINR");
  const double g = 1.0 + effective_sinr(gamma, tech);
  return 1.0 - 1.0 / (g * g);
}

double fbl_rate(double gamma, double bw, double eps, double blocklength, Tech tech) {
  if (gamma < 0) throw Error("fbl_rate: negative SINR");
  if (!(blocklength >= 1)) throw Error("fbl_rate: blocklength must be >= 1");
  const double qinv = inverse_q(eps);
  const double s = std::log1p(effective_sinr(gamma, tech));
  const double v = qinv * std::sqrt(dispersion_factor(tech) * dispersion(gamma, tech) / blocklength);
  return bandwidth_factor(tech) * bw * (s - v);
}

double link_rate(const SliceParams& slice, double gamma, double bw, Tech tech) {
  if (!slice.finite_blocklength()) return shannon_rate(gamma, bw, tech);
  return fbl_rate(gamma, bw, slice.error_prob, static_cast<double>(slice.blocklength(bw)), tech);
}

UserRate user_rate(const SliceParams& slice, double gamma_wifi, double gamma_lifi, const RateParams& p) {
  UserRate r;
  r.wifi = link_rate(slice, gamma_wifi, p.wifi_bandwidth_hz, Tech::WiFi);
  r.lifi = link_rate(slice, gamma_lifi, p.lifi_bandwidth_hz, Tech::LiFi);
  return r;
}

}  // namespace hyfi
