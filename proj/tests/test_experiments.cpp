#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <locale>
#include <sstream>

#include "hyfi/csv.hpp"
#include "hyfi/experiments.hpp"

using namespace hyfi;

namespace {

std::string to_text(const Table& t) {
  std::ostringstream out;
  write_csv(out, t);
  return out.str();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Decimal comma and thousands grouping, the usual way locales break CSV output.
struct CommaPunct : std::numpunct<char> {
  char do_decimal_point() const override { return ','; }
  char do_thousands_sep() const override { return '.'; }
  std::string do_grouping() const override { return "\3"; }
};

ExperimentSettings quick_settings() {
  ExperimentSettings s;
  s.seeds = {1};
  s.threads = 1;
  return s;
}

}  // namespace

TEST(Table, ColumnLookupAndNumbers) {
  Table t;
  t.header = {"a", "b"};
  t.rows = {{"1", "2.5"}, {"3", "inf"}};
  EXPECT_EQ(t.column("b"), 1u);
  EXPECT_DOUBLE_EQ(t.number(0, "b"), 2.5);
  EXPECT_TRUE(std::isinf(t.number(1, "b")));
  EXPECT_THROW(t.column("c"), Error);
}

TEST(Table, RowWidthMismatchThrows) {
  Table t;
  t.header = {"a", "b"};
  t.rows = {{"1"}};
  std::ostringstream out;
  EXPECT_THROW(write_csv(out, t), Error);
}

TEST(Table, TraceWithThreeRowsGivesFourLines) {
  Table t;
  t.header = {"iter", "phi"};
  for (int i = 0; i < 3; ++i) t.rows.push_back({std::to_string(i), format_number(0.1 * i)});
  const std::string text = to_text(t);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 4);
  EXPECT_EQ(text.substr(0, 9), "iter,phi\n");
}

TEST(Table, OutputIgnoresGlobalLocale) {
  Table t;
  t.header = {"x", "n"};
  t.rows = {{format_number(1234567.25), std::to_string(1234567)}};
  const std::string before = to_text(t);
  const std::locale saved = std::locale::global(std::locale(std::locale::classic(), new CommaPunct));
  Table u;
  u.header = {"x", "n"};
  u.rows = {{format_number(1234567.25), std::to_string(1234567)}};
  std::ostringstream out;  // picks up the new global locale
  write_csv(out, u);
  std::locale::global(saved);
  EXPECT_EQ(out.str(), before);
  EXPECT_EQ(before, "x,n\n1234567.25,1234567\n");
}

TEST(Table, EmitCreatesDirectories) {
  const auto dir = std::filesystem::temp_directory_path() / "hyfi_emit_test";
  std::filesystem::remove_all(dir);
  Table t;
  t.header = {"a"};
  t.rows = {{"1"}};
  const std::string path = (dir / "sub" / "t.csv").string();
  emit_csv(t, path);
  EXPECT_EQ(read_file(path), "a\n1\n");
  std::filesystem::remove_all(dir);
}

TEST(SeedAverage, GroupsInFirstSeenOrder) {
  Table t;
  t.header = {"k", "seed", "v"};
  t.rows = {{"b", "1", "1"}, {"a", "1", "10"}, {"b", "2", "3"}, {"a", "2", "20"}, {"a", "3", "30"}};
  const Table avg = seed_average(t, {"k"}, "v");
  ASSERT_EQ(avg.header, (std::vector<std::string>{"k", "mean_v", "count"}));
  ASSERT_EQ(avg.rows.size(), 2u);
  EXPECT_EQ(avg.rows[0], (std::vector<std::string>{"b", "2", "2"}));
  EXPECT_EQ(avg.rows[1], (std::vector<std::string>{"a", "20", "3"}));
}

TEST(Settings, ParsesExperimentBlock) {
  const ExperimentSettings s = parse_settings(R"({
    "experiment": {"embb_rate_min": 2e6, "fbl_rate_min": 3e5, "threads": 2,
                   "sca": {"rel_tol": 1e-5, "max_iters": 40, "power_backoff": false}}
  })");
  EXPECT_EQ(s.embb_rate_min, 2e6);
  EXPECT_EQ(s.fbl_rate_min, 3e5);
  EXPECT_EQ(s.threads, 2);
  EXPECT_EQ(s.sca.rel_tol, 1e-5);
  EXPECT_EQ(s.sca.max_iters, 40);
  EXPECT_FALSE(s.sca.power_backoff);
  EXPECT_FALSE(s.base.wifi.shadowing);
}

TEST(Settings, ShadowingOnlyWhenRequested) {
  EXPECT_FALSE(parse_settings("{}").base.wifi.shadowing);
  EXPECT_TRUE(parse_settings(R"({"wifi": {"shadowing": true}})").base.wifi.shadowing);
}

TEST(Settings, RejectsBadValues) {
  EXPECT_THROW(parse_settings(R"({"experiment": {"embb_rate_min": 0}})"), Error);
  EXPECT_THROW(parse_settings(R"({"experiment": {"sca": {"max_iters": 0}}})"), Error);
  EXPECT_THROW(parse_settings("{not json"), Error);
  EXPECT_THROW(load_settings("/nonexistent/config.json"), Error);
}

TEST(Slices, MixedAndFblPatterns) {
  const ExperimentSettings s;
  const SliceAssignment mixed = experiment_slices(s, 4);
  ASSERT_EQ(mixed.size(), 4u);
  EXPECT_EQ(mixed[0].slice, Slice::eMBB);
  EXPECT_EQ(mixed[1].slice, Slice::URLLC);
  EXPECT_EQ(mixed[2].slice, Slice::mMTC);
  EXPECT_EQ(mixed[3].slice, Slice::eMBB);
  EXPECT_EQ(mixed[0].rate_min, s.embb_rate_min);
  EXPECT_EQ(mixed[1].rate_min, s.fbl_rate_min);
  const SliceAssignment fbl = experiment_slices(s, 3, true);
  EXPECT_EQ(fbl[0].slice, Slice::URLLC);
  EXPECT_EQ(fbl[1].slice, Slice::mMTC);
  EXPECT_EQ(fbl[2].slice, Slice::URLLC);
}

TEST(Model, LedCountMustBeSquare) {
  const ExperimentSettings s;
  const SliceAssignment sl = experiment_slices(s, 2);
  EXPECT_EQ(experiment_model(s, 4, 9, sl, 1).num_leds(), 9);
  EXPECT_EQ(experiment_model(s, 4, 0, sl, 1).num_leds(), 0);
  EXPECT_THROW(experiment_model(s, 4, 10, sl, 1), Error);
}

TEST(ParallelFor, FillsEveryIndexAndRethrows) {
  std::vector<int> v(50, 0);
  parallel_for(50, 3, [&](int i) { v[i] = i * i; });
  for (int i = 0; i < 50; ++i) EXPECT_EQ(v[i], i * i);
  EXPECT_THROW(parallel_for(10, 2, [](int i) {
                 if (i == 7) throw Error("job failed");
               }),
               Error);
}

TEST(Latency, WaitingGrowsWithLoadAndUnstableRowsAreMarked) {
  const Table t = run_latency({4000}, {100, 200, 300, 400, 500, 600, 700, 800, 900, 1000}, {2, 4, 6});
  ASSERT_EQ(t.rows.size(), 30u);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double mu = t.number(r, "service_rate");
    const double lambda = t.number(r, "arrival_rate");
    EXPECT_DOUBLE_EQ(lambda, t.number(r, "users") * t.number(r, "arrival_per_user"));
    if (lambda >= mu) {
      EXPECT_EQ(t.rows[r][t.column("stable")], "0");
      EXPECT_EQ(t.rows[r][t.column("waiting_ms")], "inf");
      EXPECT_EQ(t.rows[r][t.column("urllc_ok")], "0");
    } else {
      EXPECT_NEAR(t.number(r, "waiting_ms"), 1e3 / (mu - lambda), 1e-12);
    }
  }
  // Within one user count the waiting time increases with the arrival rate
  // until the queue turns unstable.
  for (std::size_t r = 1; r < t.rows.size(); ++r) {
    if (t.rows[r][t.column("users")] != t.rows[r - 1][t.column("users")]) continue;
    if (t.rows[r - 1][t.column("stable")] == "0") continue;
    EXPECT_GT(t.number(r, "waiting_ms"), t.number(r - 1, "waiting_ms"));
  }
}

TEST(Latency, MoreUsersMeanMoreWaiting) {
  const Table t = run_latency({10000}, {500}, {2, 4, 6});
  ASSERT_EQ(t.rows.size(), 3u);
  EXPECT_LT(t.number(0, "waiting_ms"), t.number(1, "waiting_ms"));
  EXPECT_LT(t.number(1, "waiting_ms"), t.number(2, "waiting_ms"));
}

TEST(Latency, RejectsEmptyOrInvalidGrid) {
  EXPECT_THROW(run_latency({}, {100}, {2}), Error);
  EXPECT_THROW(run_latency({-1}, {100}, {2}), Error);
}

TEST(UserScaling, WifiOnlyRowsHaveNoLifiPrecoders) {
  const Table t = run_user_scaling(quick_settings(), {2});
  ASSERT_EQ(t.rows.size(), 2u);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string sys = t.rows[r][t.column("system")];
    EXPECT_EQ(t.rows[r][t.column("feasible")], "1");
    if (sys == "wifi_only") {
      EXPECT_EQ(t.number(r, "lifi_precoders"), 0.0);
    } else {
      EXPECT_EQ(sys, "hybrid");
      EXPECT_GT(t.number(r, "lifi_precoders"), 0.0);
    }
  }
}

TEST(Benchmark, RepeatedRunsAreByteIdentical) {
  ExperimentSettings s = quick_settings();
  const std::string a = to_text(run_benchmark(s, {9}));
  s.threads = 2;
  const std::string b = to_text(run_benchmark(s, {9}));
  EXPECT_EQ(a, b);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 4);
}

TEST(RunExperiment, WritesCsvAndSummary) {
  const auto dir = std::filesystem::temp_directory_path() / "hyfi_run_experiment_test";
  std::filesystem::remove_all(dir);
  ExperimentSpec spec;
  spec.name = "latency";
  spec.out_dir = dir.string();
  spec.sweep = {100, 200};
  const auto paths = run_experiment(spec);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_TRUE(std::filesystem::exists(paths[0]));
  spec.name = "nonsense";
  EXPECT_THROW(run_experiment(spec), Error);
  spec.name = "latency";
  spec.seeds.clear();
  EXPECT_THROW(run_experiment(spec), Error);
  std::filesystem::remove_all(dir);
}
