#pragma once

#include "hyfi/rate_model.hpp"

namespace hyfi {

/// End-to-end latency components, seconds.
struct LatencyBudget {
  double waiting = 0.0;
  double transmission = 0.0;
  double access = 0.0;
  double backhaul = 0.0;
  double reception = 0.0;
  double processing = 0.0;
};

/// M/M/1 sojourn-based waiting time 1 / (mu - lambda).
double mm1_wait(double service_rate, double arrival_rate);

double total_latency(const LatencyBudget& budget);

bool check_latency(const SliceParams& slice, const LatencyBudget& budget);

/// Service rate (packets/s) from a link rate in nats/s and a packet size in bits.
double service_rate_from_rate(double rate_nats_per_s, double packet_bits);

/// Budget with the fixed access/backhaul (0.1 ms) and reception/processing (0.3 ms)
/// components split evenly, for a given waiting and transmission time.
LatencyBudget reference_budget(double waiting_s, double transmission_s);

}  // namespace hyfi
