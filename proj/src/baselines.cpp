#include "hyfi/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace hyfi {

const char* to_string(BaselineKind k) { return k == BaselineKind::ZF ? "zf" : "mrt"; }

BaselineKind baseline_from_string(const std::string& name) {
  if (name == "zf" || name == "ZF") return BaselineKind::ZF;
  if (name == "mrt" || name == "MRT") return BaselineKind::MRT;
  throw Error("unknown baseline '" + name + "'");
}

namespace {

template <typename Mat>
Mat normalized_columns(Mat m, const char* who) {
  for (int k = 0; k < m.cols(); ++k) {
    const double n = m.col(k).norm();
    if (!(n > 0) || !std::isfinite(n)) throw Error(std::string(who) + ": zero channel vector for user " + std::to_string(k));
    m.col(k) /= n;
  }
  return m;
}

template <typename Mat>
Mat zf_impl(const Mat& h) {
  if (h.cols() > h.rows()) throw Error("zf_precoder: more users than transmit elements");
  for (int k = 0; k < h.cols(); ++k) {
    if (h.col(k).isZero()) throw Error("zf_precoder: zero channel vector for user " + std::to_string(k));
  }
  const Mat gram = h.adjoint() * h;
  // Rank check on the singular values of H relative to the largest one.
  Eigen::JacobiSVD<Mat> svd(h);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-12 * sv(0)) throw Error("zf_precoder: channel matrix is rank deficient");
  const Mat f = h * gram.ldlt().solve(Mat::Identity(h.cols(), h.cols()));
  return normalized_columns(f, "zf_precoder");
}

double led_l1(const Eigen::MatrixXd& f) {
  double worst = 0.0;
  for (int l = 0; l < f.rows(); ++l) worst = std::max(worst, f.row(l).cwiseAbs().sum());
  return worst;
}

}  // namespace

Eigen::MatrixXcd mrt_directions(const Eigen::MatrixXcd& h) { return normalized_columns(h, "mrt_precoder"); }
Eigen::MatrixXd mrt_directions(const Eigen::MatrixXd& h) { return normalized_columns(h, "mrt_precoder"); }
Eigen::MatrixXcd zf_directions(const Eigen::MatrixXcd& h) { return zf_impl(h); }
Eigen::MatrixXd zf_directions(const Eigen::MatrixXd& h) { return zf_impl(h); }

double max_common_scale(double squared_norm, double efficiency, double budget_w, double l1, double led_bound) {
  if (!(squared_norm > 0)) throw Error("max_common_scale: empty precoder");
  if (!(efficiency > 0) || !(budget_w > 0)) throw Error("max_common_scale: efficiency and budget must be > 0");
  double c = std::sqrt(budget_w * efficiency / squared_norm);
  if (l1 > 0 && std::isfinite(led_bound)) c = std::min(c, led_bound / l1);
  return c;
}

Eigen::MatrixXcd mrt_precoder(const Eigen::MatrixXcd& h, double budget_w, double eta) {
  const Eigen::MatrixXcd d = mrt_directions(h);
  return max_common_scale(d.squaredNorm(), eta, budget_w) * d;
}

Eigen::MatrixXd mrt_precoder(const Eigen::MatrixXd& h, double budget_w, double eta, double led_bound) {
  const Eigen::MatrixXd d = mrt_directions(h);
  return max_common_scale(d.squaredNorm(), eta, budget_w, led_l1(d), led_bound) * d;
}

Eigen::MatrixXcd zf_precoder(const Eigen::MatrixXcd& h, double budget_w, double eta) {
  const Eigen::MatrixXcd d = zf_directions(h);
  return max_common_scale(d.squaredNorm(), eta, budget_w) * d;
}

Eigen::MatrixXd zf_precoder(const Eigen::MatrixXd& h, double budget_w, double eta, double led_bound) {
  const Eigen::MatrixXd d = zf_directions(h);
  return max_common_scale(d.squaredNorm(), eta, budget_w, led_l1(d), led_bound) * d;
}

BaselinePrecoders baseline_precoders(const SystemModel& model, BaselineKind kind) {
  model.validate();
  const int k_users = model.num_users();
  BaselinePrecoders out;
  out.wifi = kind == BaselineKind::ZF ? zf_directions(model.wifi_channel) : mrt_directions(model.wifi_channel);
  out.lifi = Eigen::MatrixXd::Zero(model.num_leds(), k_users);
  if (model.has_lifi()) {
    std::vector<int> served;
    for (int k = 0; k < k_users; ++k) {
      if (!model.lifi_channel.col(k).isZero()) served.push_back(k);
    }
    if (!served.empty()) {
      Eigen::MatrixXd h(model.num_leds(), static_cast<int>(served.size()));
      for (std::size_t i = 0; i < served.size(); ++i) h.col(static_cast<int>(i)) = model.lifi_channel.col(served[i]);
      const Eigen::MatrixXd d = kind == BaselineKind::ZF ? zf_directions(h) : mrt_directions(h);
      for (std::size_t i = 0; i < served.size(); ++i) out.lifi.col(served[i]) = d.col(static_cast<int>(i));
    }
  }
  // Total power at unit scale, then the common scale limited by C2 and C3.
  const double p_unit = out.wifi.squaredNorm() / model.wifi_efficiency + out.lifi.squaredNorm() / model.lifi_efficiency;
  double c = std::sqrt(model.max_power_w / p_unit);
  const double l1 = led_l1(out.lifi);
  if (l1 > 0) c = std::min(c, model.led_bound / l1);
  out.scale = c;
  out.wifi *= c;
  out.lifi *= c;
  return out;
}

Evaluation evaluate_precoder(const SystemModel& model, const Eigen::MatrixXcd& wifi, const Eigen::MatrixXd& lifi) {
  return evaluate(model, wifi, lifi);
}

double interference_power(const Eigen::MatrixXcd& h, const Eigen::MatrixXcd& f) {
  double s = 0.0;
  for (int k = 0; k < h.cols(); ++k)
    for (int j = 0; j < f.cols(); ++j)
      if (j != k) s += std::norm(h.col(k).dot(f.col(j)));
  return s;
}

double interference_power(const Eigen::MatrixXd& h, const Eigen::MatrixXd& f) {
  double s = 0.0;
  for (int k = 0; k < h.cols(); ++k)
    for (int j = 0; j < f.cols(); ++j)
      if (j != k) s += std::pow(h.col(k).dot(f.col(j)), 2);
  return s;
}

}  // namespace hyfi
