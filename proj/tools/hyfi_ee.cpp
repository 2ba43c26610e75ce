// Command-line front end: experiments, single optimizations and the slice predictor.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hyfi/csv.hpp"
#include "hyfi/experiments.hpp"
#include "hyfi/latency_model.hpp"
#include "hyfi/slice_predictor.hpp"

using namespace hyfi;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(s)) {
    // Accept "a-b" ranges as well as single values.
    const auto dash = item.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoull(item));
      } else {
        const auto lo = std::stoull(item.substr(0, dash));
        const auto hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw Error("bad seed range '" + item + "'");
        for (auto v = lo; v <= hi; ++v) out.push_back(v);
      }
    } catch (const std::logic_error&) {
      throw Error("bad seed '" + item + "'");
    }
  }
  if (out.empty()) throw Error("no seeds given");
  return out;
}

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw Error("bad number '" + item + "'");
    }
  }
  return out;
}

struct OptimizeArgs {
  std::string config;
  std::string slices = "embb,urllc,mmtc";
  std::uint64_t seed = 1;
  std::string trace;
  bool timing = false;
  std::string dump_channels;
  double arrival_rate = 100.0;  // packets/s per user
  double packet_bits = 2048.0;
};

int run_optimize(const OptimizeArgs& a) {
  const ExperimentSettings s = a.config.empty() ? ExperimentSettings{} : load_settings(a.config);
  SliceAssignment slices;
  for (const auto& name : split_list(a.slices)) {
    SliceParams p = default_slice_params(slice_from_string(name));
    p.rate_min = p.finite_blocklength() ? s.fbl_rate_min : s.embb_rate_min;
    slices.push_back(p);
  }
  if (slices.empty()) throw Error("--slices must name at least one slice");
  ScenarioConfig cfg = s.base;
  cfg.num_users = static_cast<int>(slices.size());
  cfg.seed = a.seed;
  const Scenario sc = build_scenario(cfg, a.seed);
  const ChannelSet ch = realize_channels(sc, a.seed);
  if (!a.dump_channels.empty()) {
    std::ofstream out(a.dump_channels);
    if (!out) throw Error("cannot open '" + a.dump_channels + "'");
    write_channels_csv(out, ch);
  }
  const SystemModel model = make_system(sc, ch, slices);
  const ScaResult r = optimize_ee(model, s.sca);
  if (!a.trace.empty()) {
    std::ofstream out(a.trace);
    if (!out) throw Error("cannot open '" + a.trace + "'");
    write_trace_csv(out, r.trace, a.timing);
  }
  const Evaluation ev = evaluate(model, r.state.wifi, r.state.lifi);
  std::cerr << "ee_nats_per_joule=" << format_number(ev.ee) << " power_w=" << format_number(ev.power.total_w())
            << " iterations=" << r.trace.size() - 1 << " converged=" << (r.converged ? 1 : 0);
  if (!r.diagnostic.empty()) std::cerr << " (" << r.diagnostic << ")";
  std::cerr << "\n";

  // Per-user report with the latency check: M/M/1 waiting at the achieved rate
  // plus the fixed latency components.
  CsvWriter csv(std::cout, {"user", "slice", "rate_wifi", "rate_lifi", "rate_min", "rate_ok", "waiting_ms",
                            "total_latency_ms", "latency_max_ms", "latency_ok"});
  bool all_ok = ev.feasible();
  for (int k = 0; k < model.num_users(); ++k) {
    const SliceParams& p = model.slices[k];
    const double rate = ev.rates[k].total();
    const double mu = service_rate_from_rate(std::max(rate, 0.0), a.packet_bits);
    std::string waiting = "inf", total = "inf";
    bool latency_ok = false;
    if (mu > a.arrival_rate) {
      const double w = mm1_wait(mu, a.arrival_rate);
      const LatencyBudget b = reference_budget(w, p.tx_time_s);
      waiting = format_number(w * 1e3);
      total = format_number(total_latency(b) * 1e3);
      latency_ok = check_latency(p, b);
    }
    all_ok = all_ok && latency_ok;
    csv.row(k, to_string(p.slice), ev.rates[k].wifi, ev.rates[k].lifi, p.rate_min, rate >= p.rate_min - 1e-6,
            waiting, total, p.latency_max_s * 1e3, latency_ok);
  }
  return all_ok ? 0 : 3;
}

int run_train(const std::string& data, const std::string& out_path, const std::string& dump, int n,
              std::uint64_t seed, int epochs) {
  std::vector<KpiRecord> records;
  if (data.empty()) {
    records = generate_dataset(n, seed);
  } else {
    std::ifstream in(data);
    if (!in) throw Error("cannot open dataset '" + data + "'");
    records = read_dataset_csv(in);
  }
  if (!dump.empty()) {
    std::ofstream out(dump);
    if (!out) throw Error("cannot open '" + dump + "'");
    write_dataset_csv(out, records);
  }
  auto [train, test] = split_dataset(records, 0.8, seed);
  TrainOptions opt;
  opt.seed = seed;
  opt.epochs = epochs;
  TrainHistory h;
  const SlicePredictor model = train_predictor(train, opt, &h);
  save_model(model, out_path);
  const ClassifierReport rep = evaluate_classifier(model, test);
  std::cout << "epoch,loss,train_accuracy\n";
  for (std::size_t e = 0; e < h.loss.size(); ++e) {
    std::cout << e << ',' << format_number(h.loss[e]) << ',' << format_number(h.accuracy[e]) << '\n';
  }
  std::cerr << "test_accuracy=" << format_number(rep.accuracy) << " train=" << train.size()
            << " test=" << test.size() << " model=" << out_path << "\n";
  return 0;
}

int run_predict(const std::string& model_path, const std::string& input) {
  const SlicePredictor model = load_model(model_path);
  std::ifstream in(input);
  if (!in) throw Error("cannot open input '" + input + "'");
  const auto records = read_dataset_csv(in);
  CsvWriter csv(std::cout, {"row", "slice", "p_embb", "p_urllc", "p_mmtc"});
  for (std::size_t i = 0; i < records.size(); ++i) {
    const Prediction p = predict(model, records[i]);
    csv.row(static_cast<long>(i), to_string(p.label), p.probabilities[0], p.probabilities[1], p.probabilities[2]);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-efficient precoding for hybrid LiFi/WiFi networks with network slicing"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  std::string seeds = "1";
  std::string sweep;
  auto* exp = app.add_subcommand("experiment", "Run a named experiment and write CSV files");
  exp->add_option("name", spec.name, "convergence | benchmark | tx_time | latency | user_scaling")->required();
  exp->add_option("--config", spec.config_path, "JSON scenario / experiment config");
  exp->add_option("--seeds", seeds, "Seeds, e.g. 1,2,3 or 1-20");
  exp->add_option("--sweep", sweep, "Comma-separated sweep values overriding the defaults");
  exp->add_option("--out", spec.out_dir, "Output directory");

  OptimizeArgs oa;
  auto* opt = app.add_subcommand("optimize", "Optimize one scenario and report per-user rates and latency");
  opt->add_option("--config", oa.config, "JSON scenario / experiment config");
  opt->add_option("--slices", oa.slices, "Slice per user, e.g. embb,urllc,mmtc");
  opt->add_option("--seed", oa.seed, "Scenario seed");
  opt->add_option("--trace", oa.trace, "Write the per-iteration trace CSV here");
  opt->add_flag("--timing", oa.timing, "Include wall-clock time in the trace");
  opt->add_option("--dump-channels", oa.dump_channels, "Write the realized channels CSV here");
  opt->add_option("--arrival-rate", oa.arrival_rate, "Packet arrivals per user, packets/s");
  opt->add_option("--packet-bits", oa.packet_bits, "Packet size in bits");

  std::string data, model_out = "slice_model.txt", dump;
  int n = 10000;
  int epochs = 200;
  std::uint64_t train_seed = 1;
  auto* train = app.add_subcommand("train-predictor", "Train the slice classifier");
  train->add_option("--data", data, "Dataset CSV (default: synthetic)");
  train->add_option("--out", model_out, "Model file");
  train->add_option("--dump-data", dump, "Also write the dataset CSV here");
  train->add_option("--records", n, "Synthetic dataset size")->check(CLI::PositiveNumber);
  train->add_option("--seed", train_seed, "Dataset, split and initialization seed");
  train->add_option("--epochs", epochs, "Training epochs")->check(CLI::PositiveNumber);

  std::string model_in, input;
  auto* pred = app.add_subcommand("predict", "Predict slices for a KPI CSV");
  pred->add_option("--model", model_in, "Model file")->required();
  pred->add_option("--input", input, "KPI CSV (label column optional)")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*exp) {
      spec.seeds = parse_seeds(seeds);
      if (!sweep.empty()) spec.sweep = parse_numbers(sweep);
      for (const auto& path : run_experiment(spec)) std::cout << path << "\n";
      return 0;
    }
    if (*opt) return run_optimize(oa);
    if (*train) return run_train(data, model_out, dump, n, train_seed, epochs);
    if (*pred) return run_predict(model_in, input);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
