#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hyfi/sca.hpp"

namespace hyfi::testing {

inline SliceAssignment mixed_slices(int k_users) {
  static const Slice cycle[] = {Slice::eMBB, Slice::URLLC, Slice::mMTC};
  SliceAssignment s;
  for (int k = 0; k < k_users; ++k) s.push_back(default_slice_params(cycle[k % 3]));
  return s;
}

inline SliceAssignment uniform_slices(int k_users, Slice slice) {
  return SliceAssignment(k_users, default_slice_params(slice));
}

/// Shadowing-free scenario with `led_grid` x `led_grid` LEDs (0 for WiFi-only).
inline SystemModel make_model(int antennas, int led_grid, SliceAssignment slices, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.wifi.shadowing = false;
  cfg.num_users = static_cast<int>(slices.size());
  cfg.num_wifi_antennas = antennas;
  cfg.lifi_enabled = led_grid > 0;
  if (led_grid > 0) cfg.room.led_grid_count = led_grid;
  const Scenario sc = build_scenario(cfg, seed);
  return make_system(sc, realize_channels(sc, seed), std::move(slices));
}

/// Random iterate whose per-link SINRs are moderate (roughly 1e-1 .. 1e3), so the
/// dispersion is not saturated at 1 and finite differences stay meaningful.
inline PrecodingState random_state(const SystemModel& model, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(-1.0, 3.0);
  const int k_users = model.num_users();
  PrecodingState s;
  s.wifi.resize(model.num_antennas(), k_users);
  for (int k = 0; k < k_users; ++k) {
    for (int m = 0; m < model.num_antennas(); ++m) s.wifi(m, k) = {nd(rng), nd(rng)};
    const double gain = std::norm(model.wifi_channel.col(k).dot(s.wifi.col(k))) / model.wifi_noise;
    s.wifi.col(k) *= std::sqrt(std::pow(10.0, ud(rng)) / gain);
  }
  if (model.has_lifi()) {
    s.lifi.resize(model.num_leds(), k_users);
    for (int k = 0; k < k_users; ++k) {
      for (int l = 0; l < model.num_leds(); ++l) s.lifi(l, k) = nd(rng);
      const double a = model.lifi_channel.col(k).dot(s.lifi.col(k));
      const double gain = a * a / model.lifi_noise;
      if (gain > 0) s.lifi.col(k) *= std::sqrt(std::pow(10.0, ud(rng)) / gain);
    }
  }
  const Evaluation ev = evaluate(model, s.wifi, s.lifi);
  s.phi = ev.ee;
  s.psi = ev.power.total_w();
  return s;
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

/// Central finite differences of f over every entry of v.
template <typename F>
Eigen::MatrixXd numeric_gradient(F f, const Eigen::MatrixXd& v) {
  Eigen::MatrixXd g(v.rows(), v.cols());
  Eigen::MatrixXd w = v;
  const double scale = std::max(v.cwiseAbs().maxCoeff(), 1e-300);
  for (int c = 0; c < v.cols(); ++c) {
    for (int r = 0; r < v.rows(); ++r) {
      const double h = 1e-6 * scale;
      w(r, c) = v(r, c) + h;
      const double fp = f(w);
      w(r, c) = v(r, c) - h;
      const double fm = f(w);
      w(r, c) = v(r, c);
      g(r, c) = (fp - fm) / (2.0 * h);
    }
  }
  return g;
}

/// Exhaustive search for the single-user toy (one WiFi user with two antennas,
/// one LED). The WiFi precoder is (a cos t, a sin t e^{i p}); the common phase
/// does not matter. The LED weight is l >= 0 (its sign does not matter for
/// K = 1). A coarse grid over (log a, t, p, log l) is refined by repeated zooming
/// around the best feasible point.
inline double toy_grid_search(const SystemModel& model) {
  const double eta_w = model.wifi_efficiency;
  const double a_max = std::sqrt(eta_w * model.max_power_w);
  const double l_max = model.has_lifi() ? std::min(model.led_bound, std::sqrt(model.lifi_efficiency * model.max_power_w))
                                        : 0.0;
  auto ee_at = [&](double la, double t, double p, double ll) {
    Eigen::MatrixXcd fw(2, 1);
    const double a = std::pow(10.0, la);
    fw(0, 0) = a * std::cos(t);
    fw(1, 0) = a * std::sin(t) * std::polar(1.0, p);
    Eigen::MatrixXd fl = Eigen::MatrixXd::Zero(model.num_leds(), 1);
    if (model.has_lifi() && ll > -90) fl(0, 0) = std::pow(10.0, ll);
    const Evaluation ev = evaluate(model, fw, fl, 0.0);
    if (!ev.feasible() || !ev.ee_defined) return -1.0;
    return ev.ee;
  };
  // Coarse pass; ll = -100 encodes "LED off".
  struct Box {
    double lo, hi;
  };
  Box ba{std::log10(a_max) - 14.0, std::log10(a_max)};
  Box bt{0.0, kPi / 2};
  Box bp{-kPi, kPi};
  Box bl{model.has_lifi() ? std::log10(l_max) - 14.0 : -100.0, model.has_lifi() ? std::log10(l_max) : -100.0};
  const int coarse = 29;
  double best = -1.0;
  double xa = 0, xt = 0, xp = 0, xl = -100;
  auto at = [](const Box& b, int i, int n) { return n == 1 ? b.lo : b.lo + (b.hi - b.lo) * i / (n - 1); };
  const int nl = model.has_lifi() ? coarse : 1;
  for (int i = 0; i < coarse; ++i)
    for (int j = 0; j < coarse; ++j)
      for (int q = 0; q < coarse; ++q)
        for (int r = 0; r <= nl; ++r) {
          const double ll = r == nl ? -100.0 : at(bl, r, nl);
          const double v = ee_at(at(ba, i, coarse), at(bt, j, coarse), at(bp, q, coarse), ll);
          if (v > best) {
            best = v;
            xa = at(ba, i, coarse);
            xt = at(bt, j, coarse);
            xp = at(bp, q, coarse);
            xl = ll;
          }
        }
  // Zoom: shrink every box around the incumbent and resample.
  double wa = (ba.hi - ba.lo) / (coarse - 1), wt = (bt.hi - bt.lo) / (coarse - 1);
  double wp = (bp.hi - bp.lo) / (coarse - 1), wl = (bl.hi - bl.lo) / std::max(nl - 1, 1);
  const int fine = 7;
  for (int round = 0; round < 60; ++round) {
    const double ca = xa, ct = xt, cp = xp, cl = xl;
    for (int i = 0; i < fine; ++i)
      for (int j = 0; j < fine; ++j)
        for (int q = 0; q < fine; ++q)
          for (int r = 0; r < (cl > -90 ? fine : 1); ++r) {
            const double la = std::min(ca + wa * (i - fine / 2) / (fine / 2), ba.hi);
            const double t = std::clamp(ct + wt * (j - fine / 2) / (fine / 2), bt.lo, bt.hi);
            const double p = cp + wp * (q - fine / 2) / (fine / 2);
            const double ll = cl > -90 ? std::min(cl + wl * (r - fine / 2) / (fine / 2), bl.hi) : cl;
            const double v = ee_at(la, t, p, ll);
            if (v > best) {
              best = v;
              xa = la;
              xt = t;
              xp = p;
              xl = ll;
            }
          }
    wa *= 0.6;
    wt *= 0.6;
    wp *= 0.6;
    wl *= 0.6;
  }
  return best;
}

}  // namespace hyfi::testing
