#include <gtest/gtest.h>

#include "hyfi/latency_model.hpp"

using namespace hyfi;

TEST(Latency, Mm1Wait) {
  EXPECT_DOUBLE_EQ(mm1_wait(2000, 0), 0.5e-3);
  EXPECT_DOUBLE_EQ(mm1_wait(2500, 500), 0.5e-3);
  EXPECT_THROW(mm1_wait(1000, 1000), Error);
  EXPECT_THROW(mm1_wait(1000, 1500), Error);
}

TEST(Latency, Mm1Monotone) {
  double prev = 0.0;
  for (double lambda = 0; lambda < 1900; lambda += 100) {
    const double w = mm1_wait(2000, lambda);
    EXPECT_GT(w, prev);
    prev = w;
  }
  prev = 1e9;
  for (double mu = 600; mu < 5000; mu += 200) {
    const double w = mm1_wait(mu, 500);
    EXPECT_LT(w, prev);
    prev = w;
  }
}

TEST(Latency, TotalComposition) {
  const auto b = reference_budget(0.5e-3, 0.05e-3);
  EXPECT_NEAR(total_latency(b), 0.95e-3, 1e-15);
  EXPECT_EQ(total_latency(LatencyBudget{}), 0.0);
  LatencyBudget p{b.processing, b.reception, b.backhaul, b.access, b.transmission, b.waiting};
  EXPECT_NEAR(total_latency(p), total_latency(b), 1e-18);
}

TEST(Latency, SliceChecks) {
  const auto urllc = default_slice_params(Slice::URLLC);
  EXPECT_TRUE(check_latency(urllc, reference_budget(0.5e-3, 0.05e-3)));
  EXPECT_FALSE(check_latency(urllc, reference_budget(0.7e-3, 0.05e-3)));
  const auto mmtc = default_slice_params(Slice::mMTC);
  EXPECT_TRUE(check_latency(mmtc, reference_budget(4.45e-3, 0.05e-3)));
  for (double w = 0.0; w <= 0.5e-3; w += 0.05e-3) {
    EXPECT_TRUE(check_latency(urllc, reference_budget(w, 0.05e-3)));
  }
}

TEST(Latency, ServiceRate) {
  EXPECT_NEAR(service_rate_from_rate(std::log(2.0) * 1e6, 1000), 1000.0, 1e-9);
  EXPECT_THROW(service_rate_from_rate(1e6, 0), Error);
}
