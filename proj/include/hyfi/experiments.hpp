#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "hyfi/baselines.hpp"
#include "hyfi/sca.hpp"

namespace hyfi {

/// A CSV table: fixed header and rows of preformatted cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of a header column; throws when absent.
  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

void write_csv(std::ostream& out, const Table& table);
/// Writes `table` to `path` (parent directories created). Throws on I/O failure.
void emit_csv(const Table& table, const std::string& path);

/// Shared settings of every experiment.
struct ExperimentSettings {
  ScenarioConfig base;  // room, radio and power parameters; shadowing off by default
  ScaOptions sca;
  std::vector<std::uint64_t> seeds{1};
  double embb_rate_min = 1e6;  // nats/s
  double fbl_rate_min = 1e5;   // nats/s, URLLC and mMTC
  int threads = 0;             // 0: hardware concurrency

  ExperimentSettings();
};

/// Reads a JSON file with scenario fields at the top level and an optional
/// "experiment" object (embb_rate_min, fbl_rate_min, threads, sca: {rel_tol,
/// max_iters, wifi_power_share, init_seed, power_backoff}).
ExperimentSettings load_settings(const std::string& path);
ExperimentSettings parse_settings(const std::string& json_text);

/// Slice pattern eMBB, URLLC, mMTC repeated over the users, or URLLC / mMTC
/// alternating when `fbl_only`.
SliceAssignment experiment_slices(const ExperimentSettings& s, int users, bool fbl_only = false);

/// System model of one sweep point. `leds` must be a perfect square or 0 (WiFi only).
SystemModel experiment_model(const ExperimentSettings& s, int antennas, int leds, const SliceAssignment& slices,
                             std::uint64_t seed);

/// Runs `n` independent jobs on worker threads; results land at their index.
void parallel_for(int n, int threads, const std::function<void(int)>& job);

/// Per-iteration EE traces for K = 3, M = 8 and each LED count.
/// Columns: leds,seed,iter,phi,psi,sum_rate_nats,p_wifi_w,p_lifi_w,solver_status,plateau_iter,converged.
Table run_convergence(const ExperimentSettings& s, const std::vector<int>& leds = {9, 16, 25});

/// Proposed vs ZF vs MRT on shared channel realizations (K = 3, M = 8, mixed slices).
/// Columns: leds,seed,method,ee,sum_rate_nats,power_w,feasible.
Table run_benchmark(const ExperimentSettings& s, const std::vector<int>& leds = {9, 16, 25});

/// EE versus transmission time for URLLC / mMTC users (K = 3, M = 8). Each grid
/// point keeps the better of a cold start and a warm start from the previous
/// (shorter) transmission time, whose solution stays feasible because finite
/// blocklength rates grow with the blocklength.
/// Columns: leds,seed,tx_time_ms,ee,sum_rate_nats,power_w,feasible,start.
Table run_tx_time_sweep(const ExperimentSettings& s, const std::vector<double>& tx_time_ms = {},
                        const std::vector<int>& leds = {9, 16});

/// M/M/1 waiting time over service rates, per-user arrival rates and user counts,
/// with the URLLC total-latency check (fixed access, backhaul, reception and
/// processing components, T^t = 0.05 ms).
/// Columns: service_rate,arrival_per_user,users,arrival_rate,stable,waiting_ms,total_ms,urllc_ok.
Table run_latency(const std::vector<double>& service_rates = {4000, 6000, 8000, 10000},
                  const std::vector<double>& arrival_per_user = {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000},
                  const std::vector<int>& users = {2, 4, 6});

/// Hybrid (M = 4, L = 16) versus WiFi-only (M = 4) for K users, mixed slices.
/// Columns: users,seed,system,ee,sum_rate_nats,power_w,feasible,lifi_precoders.
Table run_user_scaling(const ExperimentSettings& s, const std::vector<int>& users = {2, 3, 4, 5, 6});

/// Mean of `value` grouped by the listed key columns, in first-seen key order.
/// Output columns: the keys, then mean_<value> and count.
Table seed_average(const Table& t, const std::vector<std::string>& keys, const std::string& value);

/// Named experiment as invoked from the command line.
struct ExperimentSpec {
  std::string name;  // convergence | benchmark | tx_time | latency | user_scaling
  std::string config_path;  // empty: defaults
  std::vector<double> sweep;  // optional override of the sweep values
  std::vector<std::uint64_t> seeds{1};
  std::string out_dir = ".";
};

/// Runs the experiment and writes <out_dir>/<name>.csv plus <name>_summary.csv
/// (seed averages) where meaningful. Returns the written paths.
std::vector<std::string> run_experiment(const ExperimentSpec& spec);

}  // namespace hyfi
