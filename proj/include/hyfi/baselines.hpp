#pragma once

#include <limits>
#include <string>

#include "hyfi/system.hpp"

namespace hyfi {

enum class BaselineKind { ZF, MRT };

const char* to_string(BaselineKind k);
BaselineKind baseline_from_string(const std::string& name);

/// Unit-norm matched directions f_k = h_k / ||h_k|| (columns of H).
Eigen::MatrixXcd mrt_directions(const Eigen::MatrixXcd& h);
Eigen::MatrixXd mrt_directions(const Eigen::MatrixXd& h);
/// Unit-norm zero-forcing directions: columns of H (H^H H)^{-1}, normalized.
Eigen::MatrixXcd zf_directions(const Eigen::MatrixXcd& h);
Eigen::MatrixXd zf_directions(const Eigen::MatrixXd& h);

/// Largest common scale c with (c^2 / eta) sum_k ||d_k||^2 <= budget and, when
/// `led_bound` is finite, c * max_l sum_k |d_lk| <= led_bound.
double max_common_scale(double squared_norm, double efficiency, double budget_w, double led_l1 = 0.0,
                        double led_bound = std::numeric_limits<double>::infinity());

/// Single-technology baselines with equal per-user norms and the maximal common scale.
Eigen::MatrixXcd mrt_precoder(const Eigen::MatrixXcd& h, double budget_w, double efficiency);
Eigen::MatrixXd mrt_precoder(const Eigen::MatrixXd& h, double budget_w, double efficiency, double led_bound);
Eigen::MatrixXcd zf_precoder(const Eigen::MatrixXcd& h, double budget_w, double efficiency);
Eigen::MatrixXd zf_precoder(const Eigen::MatrixXd& h, double budget_w, double efficiency, double led_bound);

struct BaselinePrecoders {
  Eigen::MatrixXcd wifi;
  Eigen::MatrixXd lifi;
  double scale = 0.0;
};

/// Hybrid baseline: directions on every technology, users without any LiFi gain
/// left unserved by LiFi, and one common scale for all columns so that the total
/// power meets P_max or an LED row binds first.
BaselinePrecoders baseline_precoders(const SystemModel& model, BaselineKind kind);

/// True rates, powers, EE and C1-C3 flags of arbitrary precoders.
Evaluation evaluate_precoder(const SystemModel& model, const Eigen::MatrixXcd& wifi, const Eigen::MatrixXd& lifi);

/// Sum over users of the inter-user interference power sum_{j != k} |h_k^H f_j|^2.
double interference_power(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& f);
double interference_power(const Eigen::MatrixXd& h, const Eigen::MatrixXd& f);

}  // namespace hyfi
