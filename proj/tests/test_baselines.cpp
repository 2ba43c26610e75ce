#include <gtest/gtest.h>

#include <random>

#include "hyfi/baselines.hpp"
#include "support.hpp"

using namespace hyfi;

namespace {

Eigen::MatrixXcd random_complex(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd m(rows, cols);
  for (int i = 0; i < m.size(); ++i) m(i) = {nd(rng), nd(rng)};
  return m;
}

}  // namespace

TEST(Mrt, SingleUserDirectionIsNormalizedChannel) {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXcd h = random_complex(4, 1, rng);
  const Eigen::MatrixXcd d = mrt_directions(h);
  EXPECT_LT((d - h / h.norm()).norm(), 1e-15);
  const Eigen::MatrixXcd f = mrt_precoder(h, 2.0, 0.5);
  EXPECT_NEAR(wifi_power(f, 0.5), 2.0, 1e-12);
}

TEST(Mrt, OrthogonalChannelsHaveNoInterference) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(4, 2);
  h(0, 0) = Complex(1, 1);
  h(2, 1) = Complex(0, -2);
  EXPECT_LT(interference_power(h, mrt_precoder(h, 1.0, 1.0)), 1e-30);
}

TEST(Mrt, LedScaleMatchesBisection) {
  Eigen::MatrixXd h(3, 2);
  h << 1.0, 0.2, 0.5, 0.9, 0.1, 0.4;
  const double eta = 0.5;
  for (double budget : {1e-3, 0.5, 50.0}) {
    const double bound = 0.8;
    const Eigen::MatrixXd f = mrt_precoder(h, budget, eta, bound);
    // Oracle: largest c with power and LED rows satisfied, by bisection.
    const Eigen::MatrixXd d = mrt_directions(h);
    double lo = 0.0, hi = 1e3;
    for (int i = 0; i < 200; ++i) {
      const double c = 0.5 * (lo + hi);
      const bool ok = lifi_ac_power(c * d, eta) <= budget && check_led_constraint(c * d, bound).satisfied;
      (ok ? lo : hi) = c;
    }
    EXPECT_NEAR(f.norm() / d.norm(), lo, 1e-12 * lo);
    const bool power_binds = std::abs(lifi_ac_power(f, eta) - budget) <= 1e-9 * budget;
    const bool led_binds = std::abs(check_led_constraint(f, bound).margin) <= 1e-12;
    EXPECT_TRUE(power_binds || led_binds);
  }
}

TEST(Mrt, ZeroChannelRejected) {
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(3, 2);
  h(0, 0) = 1.0;
  EXPECT_THROW(mrt_precoder(h, 1.0, 0.5), Error);
}

TEST(Zf, SingleUserEqualsMrt) {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXcd h = random_complex(5, 1, rng);
  EXPECT_LT((zf_directions(h) - mrt_directions(h)).norm(), 1e-12);
}

TEST(Zf, OrthogonalRowsGiveMatchedDirections) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 2);
  h(0, 0) = 2.0;
  h(1, 1) = -0.5;
  h(2, 1) = 0.5;
  EXPECT_LT((zf_directions(h) - mrt_directions(h)).norm(), 1e-12);
}

TEST(Zf, NullsInterference) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXcd h = random_complex(4, 2, rng);
    const Eigen::MatrixXcd f = zf_precoder(h, 1.0, 0.5);
    for (int k = 0; k < 2; ++k) {
      for (int j = 0; j < 2; ++j) {
        if (j == k) continue;
        EXPECT_LE(std::abs(h.col(k).dot(f.col(j))), 1e-9 * h.col(k).norm() * f.col(j).norm());
      }
    }
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(f.col(k).norm(), f.col(0).norm(), 1e-12);
  }
}

TEST(Zf, RejectsBadShapes) {
  std::mt19937_64 rng(4);
  EXPECT_THROW(zf_precoder(random_complex(2, 3, rng), 1.0, 0.5), Error);
  Eigen::MatrixXcd h = random_complex(4, 2, rng);
  h.col(1) = 2.0 * h.col(0);
  EXPECT_THROW(zf_precoder(h, 1.0, 0.5), Error);
}

TEST(Hybrid, MaximalCommonScale) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const SystemModel model = hyfi::testing::make_model(8, 4, hyfi::testing::mixed_slices(3), seed);
    for (BaselineKind kind : {BaselineKind::ZF, BaselineKind::MRT}) {
      const BaselinePrecoders b = baseline_precoders(model, kind);
      const Evaluation ev = evaluate_precoder(model, b.wifi, b.lifi);
      EXPECT_TRUE(ev.power_ok);
      EXPECT_TRUE(ev.led_ok);
      const bool power_binds = std::abs(ev.power.total_w() - model.max_power_w) <= 1e-9 * model.max_power_w;
      const bool led_binds = std::abs(ev.led_margin) <= 1e-9 * model.led_bound;
      EXPECT_TRUE(power_binds || led_binds);
      // Equal per-user norms within each technology.
      for (int k = 1; k < model.num_users(); ++k) EXPECT_NEAR(b.wifi.col(k).norm(), b.wifi.col(0).norm(), 1e-12);
    }
  }
}

TEST(Hybrid, ZfRemovesInterferenceMrtDoesNot) {
  const SystemModel model = hyfi::testing::make_model(8, 4, hyfi::testing::mixed_slices(3), 5);
  const BaselinePrecoders zf = baseline_precoders(model, BaselineKind::ZF);
  const BaselinePrecoders mrt = baseline_precoders(model, BaselineKind::MRT);
  const double signal = std::norm(model.wifi_channel.col(0).dot(zf.wifi.col(0)));
  EXPECT_LE(interference_power(model.wifi_channel, zf.wifi), 1e-18 * signal);
  EXPECT_GT(interference_power(model.wifi_channel, mrt.wifi), 1e-6 * signal);
}

TEST(Evaluate, ZeroPrecodersFlagUndefinedEe) {
  const SystemModel model = hyfi::testing::make_model(4, 2, hyfi::testing::mixed_slices(2), 1);
  const Evaluation ev = evaluate_precoder(model, Eigen::MatrixXcd::Zero(4, 2), Eigen::MatrixXd::Zero(4, 2));
  EXPECT_FALSE(ev.ee_defined);
  EXPECT_FALSE(ev.rates_ok);
}

TEST(Evaluate, ReproducesOptimizerEe) {
  const SystemModel model = hyfi::testing::make_model(8, 3, hyfi::testing::mixed_slices(3), 2);
  const ScaResult r = optimize_ee(model);
  const Evaluation ev = evaluate_precoder(model, r.state.wifi, r.state.lifi);
  EXPECT_LE(hyfi::testing::relative_error(ev.ee, r.state.phi), 1e-4);
  EXPECT_TRUE(ev.feasible());
}

TEST(BaselineKind, Names) {
  EXPECT_EQ(baseline_from_string("zf"), BaselineKind::ZF);
  EXPECT_STREQ(to_string(BaselineKind::MRT), "mrt");
  EXPECT_THROW(baseline_from_string("mmse"), Error);
}
