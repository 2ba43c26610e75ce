#include "hyfi/experiments.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "hyfi/csv.hpp"
#include "hyfi/latency_model.hpp"
#include "json.hpp"

namespace hyfi {

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

std::size_t Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error("table has no column '" + name + "'");
}

double Table::number(std::size_t row, const std::string& name) const {
  const std::string& cell = rows.at(row).at(column(name));
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw Error("table cell '" + cell + "' in column '" + name + "' is not a number");
  }
  return v;
}

void write_csv(std::ostream& out, const Table& table) {
  CsvWriter csv(out, table.header);
  for (const auto& r : table.rows) {
    if (r.size() != table.header.size()) throw Error("write_csv: row width does not match the header");
    csv.row_cells(r);
  }
}

void emit_csv(const Table& table, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw Error("cannot create directory '" + p.parent_path().string() + "': " + ec.message());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_csv(out, table);
  out.flush();
  if (!out) throw Error("failed writing '" + path + "'");
}

namespace {

template <typename... Ts>
std::vector<std::string> cells(const Ts&... v) {
  std::vector<std::string> out;
  auto one = [&](const auto& x) {
    using T = std::decay_t<decltype(x)>;
    if constexpr (std::is_same_v<T, bool>) out.push_back(x ? "1" : "0");
    else if constexpr (std::is_floating_point_v<T>) out.push_back(format_number(x));
    else if constexpr (std::is_integral_v<T>) out.push_back(std::to_string(x));
    else out.push_back(std::string(x));
  };
  (one(v), ...);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Settings
// ---------------------------------------------------------------------------

ExperimentSettings::ExperimentSettings() { base.wifi.shadowing = false; }

ExperimentSettings parse_settings(const std::string& json_text) {
  ExperimentSettings s;
  s.base = parse_config(json_text);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
    // Shadowing stays off unless the file asks for it explicitly.
    if (!(j.contains("wifi") && j.at("wifi").contains("shadowing"))) s.base.wifi.shadowing = false;
    if (j.contains("experiment")) {
      const auto& e = j.at("experiment");
      if (e.contains("embb_rate_min")) s.embb_rate_min = e.at("embb_rate_min").get<double>();
      if (e.contains("fbl_rate_min")) s.fbl_rate_min = e.at("fbl_rate_min").get<double>();
      if (e.contains("threads")) s.threads = e.at("threads").get<int>();
      if (e.contains("sca")) {
        const auto& o = e.at("sca");
        if (o.contains("rel_tol")) s.sca.rel_tol = o.at("rel_tol").get<double>();
        if (o.contains("max_iters")) s.sca.max_iters = o.at("max_iters").get<int>();
        if (o.contains("wifi_power_share")) s.sca.wifi_power_share = o.at("wifi_power_share").get<double>();
        if (o.contains("init_seed")) s.sca.init_seed = o.at("init_seed").get<std::uint64_t>();
        if (o.contains("power_backoff")) s.sca.power_backoff = o.at("power_backoff").get<bool>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("config parse error: ") + e.what());
  }
  if (!(s.embb_rate_min > 0) || !(s.fbl_rate_min > 0)) throw Error("config: rate floors must be > 0");
  if (!(s.sca.rel_tol > 0) || s.sca.max_iters < 1) throw Error("config: invalid SCA options");
  return s;
}

ExperimentSettings load_settings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_settings(ss.str());
}

SliceAssignment experiment_slices(const ExperimentSettings& s, int users, bool fbl_only) {
  static const Slice mixed[] = {Slice::eMBB, Slice::URLLC, Slice::mMTC};
  static const Slice fbl[] = {Slice::URLLC, Slice::mMTC};
  SliceAssignment out;
  for (int k = 0; k < users; ++k) {
    SliceParams p = default_slice_params(fbl_only ? fbl[k % 2] : mixed[k % 3]);
    p.rate_min = p.finite_blocklength() ? s.fbl_rate_min : s.embb_rate_min;
    out.push_back(p);
  }
  return out;
}

SystemModel experiment_model(const ExperimentSettings& s, int antennas, int leds, const SliceAssignment& slices,
                             std::uint64_t seed) {
  ScenarioConfig cfg = s.base;
  cfg.num_users = static_cast<int>(slices.size());
  cfg.num_wifi_antennas = antennas;
  cfg.lifi_enabled = leds > 0;
  if (leds > 0) {
    const int grid = static_cast<int>(std::lround(std::sqrt(static_cast<double>(leds))));
    if (grid * grid != leds) throw Error("LED count must be a perfect square, got " + std::to_string(leds));
    cfg.room.led_grid_count = grid;
  }
  cfg.seed = seed;
  cfg.validate();
  const Scenario sc = build_scenario(cfg, seed);
  return make_system(sc, realize_channels(sc, seed), slices);
}

void parallel_for(int n, int threads, const std::function<void(int)>& job) {
  if (n <= 0) return;
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

namespace {

struct Outcome {
  double ee = 0.0;
  double sum_rate = 0.0;
  double power = 0.0;
  bool feasible = false;
};

Outcome outcome_of(const SystemModel& model, const Eigen::MatrixXcd& wifi, const Eigen::MatrixXd& lifi) {
  const Evaluation ev = evaluate_precoder(model, wifi, lifi);
  return {ev.ee, ev.sum_rate, ev.power.total_w(), ev.feasible()};
}

std::vector<double> default_tx_grid() {
  std::vector<double> g;
  for (int i = 1; i <= 10; ++i) g.push_back(i / 100.0);
  return g;
}

}  // namespace

Table run_convergence(const ExperimentSettings& s, const std::vector<int>& leds) {
  struct Job {
    int leds;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int l : leds)
    for (auto seed : s.seeds) jobs.push_back({l, seed});
  std::vector<std::vector<std::vector<std::string>>> out(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), s.threads, [&](int i) {
    const Job& jb = jobs[i];
    const SystemModel model = experiment_model(s, 8, jb.leds, experiment_slices(s, 3), jb.seed);
    const ScaResult r = optimize_ee(model, s.sca);
    for (const auto& t : r.trace) {
      out[i].push_back(cells(jb.leds, jb.seed, t.iter, t.phi, t.psi, t.sum_rate, t.p_wifi, t.p_lifi, t.status,
                             r.plateau_iteration, r.converged));
    }
  });
  Table t;
  t.header = {"leds", "seed", "iter", "phi", "psi", "sum_rate_nats", "p_wifi_w", "p_lifi_w", "solver_status",
              "plateau_iter", "converged"};
  for (auto& rows : out)
    for (auto& r : rows) t.rows.push_back(std::move(r));
  return t;
}

Table run_benchmark(const ExperimentSettings& s, const std::vector<int>& leds) {
  struct Job {
    int leds;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int l : leds)
    for (auto seed : s.seeds) jobs.push_back({l, seed});
  std::vector<std::vector<std::vector<std::string>>> out(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), s.threads, [&](int i) {
    const Job& jb = jobs[i];
    const SystemModel model = experiment_model(s, 8, jb.leds, experiment_slices(s, 3), jb.seed);
    const ScaResult r = optimize_ee(model, s.sca);
    const Outcome p = outcome_of(model, r.state.wifi, r.state.lifi);
    out[i].push_back(cells(jb.leds, jb.seed, "proposed", p.ee, p.sum_rate, p.power, p.feasible));
    for (BaselineKind kind : {BaselineKind::ZF, BaselineKind::MRT}) {
      const BaselinePrecoders b = baseline_precoders(model, kind);
      const Outcome o = outcome_of(model, b.wifi, b.lifi);
      out[i].push_back(cells(jb.leds, jb.seed, to_string(kind), o.ee, o.sum_rate, o.power, o.feasible));
    }
  });
  Table t;
  t.header = {"leds", "seed", "method", "ee", "sum_rate_nats", "power_w", "feasible"};
  for (auto& rows : out)
    for (auto& r : rows) t.rows.push_back(std::move(r));
  return t;
}

Table run_tx_time_sweep(const ExperimentSettings& s, const std::vector<double>& tx_time_ms,
                        const std::vector<int>& leds) {
  std::vector<double> grid = tx_time_ms.empty() ? default_tx_grid() : tx_time_ms;
  for (double v : grid) {
    if (!(v > 0)) throw Error("tx_time sweep: transmission times must be > 0");
  }
  std::sort(grid.begin(), grid.end());
  struct Job {
    int leds;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (int l : leds)
    for (auto seed : s.seeds) jobs.push_back({l, seed});
  std::vector<std::vector<std::vector<std::string>>> out(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), s.threads, [&](int i) {
    const Job& jb = jobs[i];
    bool have_prev = false;
    PrecodingState prev;
    for (double t_ms : grid) {
      SliceAssignment slices = experiment_slices(s, 3, true);
      for (auto& p : slices) p.tx_time_s = t_ms * 1e-3;
      const SystemModel model = experiment_model(s, 8, jb.leds, slices, jb.seed);
      ScaResult best = optimize_ee(model, s.sca);
      std::string start = "cold";
      if (have_prev && evaluate(model, prev.wifi, prev.lifi).feasible()) {
        PrecodingState warm = prev;
        if (s.sca.power_backoff) warm = power_backoff(model, warm);
        ScaResult r = optimize_from(model, warm, s.sca);
        if (r.state.phi > best.state.phi) {
          best = std::move(r);
          start = "warm";
        }
      }
      prev = best.state;
      have_prev = true;
      const Outcome o = outcome_of(model, best.state.wifi, best.state.lifi);
      out[i].push_back(cells(jb.leds, jb.seed, t_ms, o.ee, o.sum_rate, o.power, o.feasible, start));
    }
  });
  Table t;
  t.header = {"leds", "seed", "tx_time_ms", "ee", "sum_rate_nats", "power_w", "feasible", "start"};
  for (auto& rows : out)
    for (auto& r : rows) t.rows.push_back(std::move(r));
  return t;
}

Table run_latency(const std::vector<double>& service_rates, const std::vector<double>& arrival_per_user,
                  const std::vector<int>& users) {
  if (service_rates.empty() || arrival_per_user.empty() || users.empty()) throw Error("latency sweep: empty grid");
  const SliceParams urllc = default_slice_params(Slice::URLLC);
  Table t;
  t.header = {"service_rate", "arrival_per_user", "users", "arrival_rate", "stable", "waiting_ms", "total_ms", "urllc_ok"};
  for (double mu : service_rates) {
    for (int k : users) {
      for (double alpha : arrival_per_user) {
        if (!(mu > 0) || !(alpha >= 0) || k < 1) throw Error("latency sweep: invalid grid value");
        const double lambda = k * alpha;
        if (lambda >= mu) {
          t.rows.push_back(cells(mu, alpha, k, lambda, false, "inf", "inf", false));
          continue;
        }
        const double w = mm1_wait(mu, lambda);
        const LatencyBudget b = reference_budget(w, urllc.tx_time_s);
        t.rows.push_back(cells(mu, alpha, k, lambda, true, w * 1e3, total_latency(b) * 1e3, check_latency(urllc, b)));
      }
    }
  }
  return t;
}

Table run_user_scaling(const ExperimentSettings& s, const std::vector<int>& users) {
  struct Job {
    int users;
    std::uint64_t seed;
    bool hybrid;
  };
  std::vector<Job> jobs;
  for (int k : users) {
    if (k < 1) throw Error("user scaling: user counts must be >= 1");
    for (auto seed : s.seeds) {
      jobs.push_back({k, seed, true});
      jobs.push_back({k, seed, false});
    }
  }
  std::vector<std::vector<std::string>> out(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), s.threads, [&](int i) {
    const Job& jb = jobs[i];
    const SystemModel model = experiment_model(s, 4, jb.hybrid ? 16 : 0, experiment_slices(s, jb.users), jb.seed);
    const ScaResult r = optimize_ee(model, s.sca);
    const Outcome o = outcome_of(model, r.state.wifi, r.state.lifi);
    out[i] = cells(jb.users, jb.seed, jb.hybrid ? "hybrid" : "wifi_only", o.ee, o.sum_rate, o.power, o.feasible,
                   static_cast<long>(r.state.lifi.size()));
  });
  Table t;
  t.header = {"users", "seed", "system", "ee", "sum_rate_nats", "power_w", "feasible", "lifi_precoders"};
  for (auto& r : out) t.rows.push_back(std::move(r));
  return t;
}

Table seed_average(const Table& t, const std::vector<std::string>& keys, const std::string& value) {
  std::vector<std::size_t> kcols;
  for (const auto& k : keys) kcols.push_back(t.column(k));
  std::vector<std::vector<std::string>> order;
  std::map<std::vector<std::string>, std::pair<double, int>> acc;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::vector<std::string> key;
    for (std::size_t c : kcols) key.push_back(t.rows[r][c]);
    auto [it, inserted] = acc.try_emplace(key, 0.0, 0);
    if (inserted) order.push_back(key);
    it->second.first += t.number(r, value);
    it->second.second += 1;
  }
  Table out;
  out.header = keys;
  out.header.push_back("mean_" + value);
  out.header.push_back("count");
  for (const auto& key : order) {
    const auto& [sum, n] = acc.at(key);
    std::vector<std::string> row = key;
    row.push_back(format_number(sum / n));
    row.push_back(std::to_string(n));
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<std::string> run_experiment(const ExperimentSpec& spec) {
  if (spec.seeds.empty()) throw Error("experiment: at least one seed is required");
  ExperimentSettings s = spec.config_path.empty() ? ExperimentSettings{} : load_settings(spec.config_path);
  s.seeds = spec.seeds;
  auto ints = [&](std::vector<int> fallback) {
    if (spec.sweep.empty()) return fallback;
    std::vector<int> v;
    for (double x : spec.sweep) {
      if (x != std::floor(x)) throw Error("experiment: sweep values must be integers for '" + spec.name + "'");
      v.push_back(static_cast<int>(x));
    }
    return v;
  };
  const std::filesystem::path dir(spec.out_dir);
  std::vector<std::string> written;
  auto emit = [&](const Table& t, const std::string& file) {
    const std::string path = (dir / file).string();
    emit_csv(t, path);
    written.push_back(path);
  };
  if (spec.name == "convergence") {
    emit(run_convergence(s, ints({9, 16, 25})), "convergence.csv");
  } else if (spec.name == "benchmark") {
    const Table t = run_benchmark(s, ints({9, 16, 25}));
    emit(t, "benchmark.csv");
    emit(seed_average(t, {"leds", "method"}, "ee"), "benchmark_summary.csv");
  } else if (spec.name == "tx_time") {
    const Table t = run_tx_time_sweep(s, spec.sweep);
    emit(t, "tx_time.csv");
    emit(seed_average(t, {"leds", "tx_time_ms"}, "ee"), "tx_time_summary.csv");
  } else if (spec.name == "latency") {
    emit(spec.sweep.empty() ? run_latency() : run_latency({4000, 6000, 8000, 10000}, spec.sweep), "latency.csv");
  } else if (spec.name == "user_scaling") {
    const Table t = run_user_scaling(s, ints({2, 3, 4, 5, 6}));
    emit(t, "user_scaling.csv");
    emit(seed_average(t, {"users", "system"}, "ee"), "user_scaling_summary.csv");
  } else {
    throw Error("unknown experiment '" + spec.name + "' (convergence, benchmark, tx_time, latency, user_scaling)");
  }
  return written;
}

}  // namespace hyfi
