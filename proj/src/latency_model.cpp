#include "hyfi/latency_model.hpp"

#include <cmath>

namespace hyfi {

double mm1_wait(double mu, double lambda) {
  if (!(lambda >= 0)) throw Error("mm1_wait: arrival rate must be >= 0");
  if (!(mu > lambda)) throw Error("mm1_wait: unstable queue (mu <= lambda)");
  return 1.0 / (mu - lambda);
}

double total_latency(const LatencyBudget& b) {
  for (double v : {b.waiting, b.transmission, b.access, b.backhaul, b.reception, b.processing}) {
    if (v < 0) throw Error("total_latency: negative latency component");
  }
  return b.waiting + b.transmission + b.access + b.backhaul + b.reception + b.processing;
}

bool check_latency(const SliceParams& slice, const LatencyBudget& budget) {
  return total_latency(budget) <= slice.latency_max_s;
}

double service_rate_from_rate(double rate_nats_per_s, double packet_bits) {
  if (!(packet_bits > 0)) throw Error("service_rate_from_rate: packet size must be > 0");
  return rate_nats_per_s / std::log(2.0) / packet_bits;
}

LatencyBudget reference_budget(double waiting_s, double transmission_s) {
  LatencyBudget b;
  b.waiting = waiting_s;
  b.transmission = transmission_s;
  b.access = 0.05e-3;
  b.backhaul = 0.05e-3;
  b.reception = 0.15e-3;
  b.processing = 0.15e-3;
  return b;
}

}  // namespace hyfi
