#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "hyfi/slice_predictor.hpp"

using namespace hyfi;

namespace {

KpiRecord clean_urllc() {
  KpiRecord r;
  r.use_case = "remote_surgery";
  r.latency_ms = 1.0;
  r.reliability_pct = 99.999;
  r.technology = "lifi";
  r.packet_bytes = 128;
  r.device_density = 100;
  r.time_of_day = "morning";
  r.label = Slice::URLLC;
  return r;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("hyfi_test_" + name)).string();
}

// Trained once and shared: 10k records, 80/20 split, default hyper-parameters.
class Trained : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto data = generate_dataset(10000, 7);
    auto parts = split_dataset(data, 0.8, 7);
    test_ = new std::vector<KpiRecord>(std::move(parts.second));
    history_ = new TrainHistory();
    TrainOptions opt;
    opt.seed = 7;
    model_ = new SlicePredictor(train_predictor(parts.first, opt, history_));
  }
  static void TearDownTestSuite() {
    delete model_;
    delete history_;
    delete test_;
  }
  static SlicePredictor* model_;
  static TrainHistory* history_;
  static std::vector<KpiRecord>* test_;
};

SlicePredictor* Trained::model_ = nullptr;
TrainHistory* Trained::history_ = nullptr;
std::vector<KpiRecord>* Trained::test_ = nullptr;

}  // namespace

TEST(Dataset, ClassProportions) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto d = generate_dataset(10000, seed);
    int counts[3] = {0, 0, 0};
    for (const auto& r : d) ++counts[static_cast<int>(r.label)];
    for (int c : counts) {
      EXPECT_GE(c / 10000.0, 0.2);
      EXPECT_LE(c / 10000.0, 0.5);
    }
  }
}

TEST(Dataset, DeterministicAndNoiseRate) {
  const auto a = generate_dataset(2000, 5);
  const auto b = generate_dataset(2000, 5);
  std::ostringstream sa, sb;
  write_dataset_csv(sa, a);
  write_dataset_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  // Redrawing 5% of labels uniformly changes about two thirds of those.
  const auto big = generate_dataset(20000, 6);
  int flipped = 0;
  for (const auto& r : big) flipped += r.label != rule_label(r);
  EXPECT_NEAR(flipped / 20000.0, 0.05 * 2.0 / 3.0, 0.006);
  for (const auto& r : generate_dataset(500, 6, 0.0)) EXPECT_EQ(r.label, rule_label(r));
}

TEST(Dataset, RuleExamples) {
  KpiRecord r = clean_urllc();
  EXPECT_EQ(rule_label(r), Slice::URLLC);
  r.latency_ms = 5.0;
  EXPECT_EQ(rule_label(r), Slice::eMBB);
  r.device_density = 5e4;
  EXPECT_EQ(rule_label(r), Slice::mMTC);
  r.packet_bytes = 512;
  EXPECT_EQ(rule_label(r), Slice::eMBB);
}

TEST(Dataset, CsvRoundTrip) {
  const auto d = generate_dataset(50, 3);
  std::stringstream ss;
  write_dataset_csv(ss, d);
  const auto back = read_dataset_csv(ss);
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back[i].use_case, d[i].use_case);
    EXPECT_EQ(back[i].latency_ms, d[i].latency_ms);
    EXPECT_EQ(back[i].device_density, d[i].device_density);
    EXPECT_EQ(back[i].label, d[i].label);
  }
  std::stringstream bad("a,b,c\n");
  EXPECT_THROW(read_dataset_csv(bad), Error);
}

TEST(Split, SizesPartitionDeterminism) {
  auto d = generate_dataset(1000, 2);
  for (std::size_t i = 0; i < d.size(); ++i) d[i].latency_ms = static_cast<double>(i) + 1.0;  // unique tag
  const auto [train, test] = split_dataset(d, 0.8, 9);
  EXPECT_EQ(train.size(), 800u);
  EXPECT_EQ(test.size(), 200u);
  std::set<double> seen;
  for (const auto& r : train) seen.insert(r.latency_ms);
  for (const auto& r : test) EXPECT_TRUE(seen.insert(r.latency_ms).second);
  EXPECT_EQ(seen.size(), 1000u);
  const auto again = split_dataset(d, 0.8, 9);
  for (std::size_t i = 0; i < train.size(); ++i) EXPECT_EQ(again.first[i].latency_ms, train[i].latency_ms);
  EXPECT_THROW(split_dataset(d, 1.0, 1), Error);
}

TEST(Encoder, OneHotBlocks) {
  KpiVocabulary v{{"a", "b", "c"}, {"x"}, {"t"}};
  FeatureEncoder enc(v);
  KpiRecord r = clean_urllc();
  r.use_case = "b";
  r.technology = "x";
  r.time_of_day = "t";
  const Eigen::RowVectorXd e = enc.encode(r);
  EXPECT_EQ(e.size(), 3 + 1 + 1 + 4);
  EXPECT_EQ(e.head(3), Eigen::RowVector3d(0, 1, 0));
  KpiRecord r2 = r;
  r2.use_case = "c";
  const Eigen::RowVectorXd e2 = enc.encode(r2);
  EXPECT_EQ((e - e2).tail(e.size() - 3).norm(), 0.0);
  EXPECT_NE((e - e2).head(3).norm(), 0.0);
  r2.use_case = "d";
  EXPECT_THROW(enc.encode(r2), Error);
}

TEST(Encoder, StandardizedOnTraining) {
  const auto d = generate_dataset(3000, 4);
  FeatureEncoder enc(default_vocabulary());
  enc.fit(d);
  const Eigen::MatrixXd x = enc.encode(d);
  for (int j = x.cols() - 4; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    EXPECT_LE(std::abs(mean), 1e-9);
    EXPECT_NEAR((x.col(j).array() - mean).square().mean(), 1.0, 1e-9);
  }
}

TEST(Rprop, StepRule) {
  const RpropParams p;
  double delta = 0.1, prev = 0.0;
  EXPECT_DOUBLE_EQ(rprop_step(0.5, delta, prev, p), -0.1);  // no memory yet: keep delta
  EXPECT_DOUBLE_EQ(rprop_step(0.7, delta, prev, p), -0.12);  // (+,+)
  EXPECT_DOUBLE_EQ(delta, 0.12);
  delta = 0.1;
  prev = 0.3;
  EXPECT_DOUBLE_EQ(rprop_step(-0.2, delta, prev, p), 0.0);  // flip: shrink, no step
  EXPECT_DOUBLE_EQ(delta, 0.05);
  EXPECT_EQ(prev, 0.0);
  EXPECT_DOUBLE_EQ(rprop_step(-0.2, delta, prev, p), 0.05);  // memory cleared: keep delta
  // Caps.
  delta = 49.0;
  prev = 1.0;
  rprop_step(1.0, delta, prev, p);
  EXPECT_DOUBLE_EQ(delta, 50.0);
  delta = 1.5e-6;
  prev = 1.0;
  rprop_step(-1.0, delta, prev, p);
  EXPECT_DOUBLE_EQ(delta, 1e-6);
}

TEST(Rprop, InvariantToLossScale) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd;
  const RpropParams p;
  double d1 = 0.1, g1 = 0.0, d2 = 0.1, g2 = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double g = nd(rng);
    EXPECT_EQ(rprop_step(g, d1, g1, p), rprop_step(37.5 * g, d2, g2, p));
  }
}

TEST(Network, SoftmaxProperties) {
  Eigen::MatrixXd z(2, 3);
  z << 1.0, -2.0, 0.5, 800.0, 801.0, 799.0;
  const Eigen::MatrixXd p = softmax_rows(z);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);
  const Eigen::MatrixXd shifted = softmax_rows(z.array() + 12.0);
  EXPECT_LT((p - shifted).norm(), 1e-12);
  EXPECT_LT((softmax_rows(Eigen::MatrixXd::Constant(1, 3, 4.2)).array() - 1.0 / 3.0).abs().maxCoeff(), 1e-15);
}

TEST(Network, GradientsMatchFiniteDifferences) {
  // 2 -> 2 -> 3 network: 10 weights plus 5 biases.
  Mlp m = make_mlp({2, 2, 3}, 1e-2, 3);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  for (auto& b : m.biases)
    for (int i = 0; i < b.size(); ++i) b(i) = 0.3 + 0.1 * nd(rng);
  Eigen::MatrixXd x(6, 2);
  for (int i = 0; i < x.size(); ++i) x(i) = nd(rng);
  const std::vector<int> y{0, 1, 2, 2, 1, 0};
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::RowVectorXd> db;
  m.gradients(x, y, dw, db);
  int weights = 0;
  auto check = [&](double& param, double analytic) {
    const double h = 1e-6;
    const double keep = param;
    param = keep + h;
    const double fp = m.loss(x, y);
    param = keep - h;
    const double fm = m.loss(x, y);
    param = keep;
    const double fd = (fp - fm) / (2 * h);
    EXPECT_LE(std::abs(fd - analytic), 1e-5 * std::max(std::abs(fd), 1e-3)) << fd << " vs " << analytic;
  };
  for (std::size_t l = 0; l < m.weights.size(); ++l) {
    for (int i = 0; i < m.weights[l].size(); ++i, ++weights) check(m.weights[l](i), dw[l](i));
    for (int i = 0; i < m.biases[l].size(); ++i) check(m.biases[l](i), db[l](i));
  }
  EXPECT_EQ(weights, 10);
  EXPECT_EQ(m.num_parameters(), 15);
}

TEST(Network, RejectsBadArchitecture) {
  EXPECT_THROW(make_mlp({4, 8, 2}, 1e-4, 1), Error);
  EXPECT_THROW(make_mlp({4}, 1e-4, 1), Error);
  const Mlp m = make_mlp({4, 3}, 1e-4, 1);
  EXPECT_THROW(m.logits(Eigen::MatrixXd::Zero(1, 5)), Error);
}

TEST(Scoring, OracleAndConfusion) {
  const auto d = generate_dataset(300, 8, 0.0);
  std::vector<int> truth, oracle;
  for (const auto& r : d) {
    truth.push_back(static_cast<int>(r.label));
    oracle.push_back(static_cast<int>(rule_label(r)));
  }
  const ClassifierReport rep = score_predictions(truth, oracle);
  EXPECT_DOUBLE_EQ(rep.accuracy, 1.0);
  int counts[3] = {0, 0, 0};
  for (int t : truth) ++counts[t];
  for (int c = 0; c < 3; ++c) EXPECT_EQ(rep.confusion[c][0] + rep.confusion[c][1] + rep.confusion[c][2], counts[c]);
  EXPECT_THROW(score_predictions({}, {}), Error);
}

TEST_F(Trained, LossDecreasesAndAccuracy) {
  ASSERT_FALSE(history_->loss.empty());
  for (double l : history_->loss) EXPECT_TRUE(std::isfinite(l));
  EXPECT_LE(history_->loss.back(), history_->loss.front());
  const ClassifierReport rep = evaluate_classifier(*model_, *test_);
  EXPECT_GE(rep.accuracy, 0.95);
  EXPECT_EQ(rep.total, 2000);
}

TEST_F(Trained, PredictsCleanUrllc) {
  const Prediction p = predict(*model_, clean_urllc());
  EXPECT_EQ(p.label, Slice::URLLC);
  EXPECT_NEAR(p.probabilities[0] + p.probabilities[1] + p.probabilities[2], 1.0, 1e-9);
}

TEST_F(Trained, SaveLoadRoundTrip) {
  const std::string path = temp_path("model.txt");
  save_model(*model_, path);
  const SlicePredictor back = load_model(path);
  const auto inputs = generate_dataset(100, 99);
  for (const auto& r : inputs) {
    const Prediction a = predict(*model_, r);
    const Prediction b = predict(back, r);
    EXPECT_EQ(a.label, b.label);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(a.probabilities[c], b.probabilities[c]);
  }
  // Corrupt: truncate the file.
  std::stringstream full;
  write_model(full, *model_);
  const std::string text = full.str();
  {
    std::ofstream out(path);
    out << text.substr(0, text.size() / 2);
  }
  EXPECT_THROW(load_model(path), Error);
  // Version mismatch.
  {
    std::ofstream out(path);
    std::string v2 = text;
    v2.replace(v2.find(" 1\n"), 3, " 2\n");
    out << v2;
  }
  EXPECT_THROW(load_model(path), Error);
  std::remove(path.c_str());
  EXPECT_THROW(load_model(temp_path("missing_model.txt")), Error);
}
