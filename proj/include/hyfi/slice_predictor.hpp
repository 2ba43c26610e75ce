#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hyfi/rate_model.hpp"

namespace hyfi {

/// One row of the KPI dataset used to pick a slice.
struct KpiRecord {
  std::string use_case;
  double latency_ms = 0.0;
  double reliability_pct = 0.0;
  std::string technology;
  double packet_bytes = 0.0;
  double device_density = 0.0;  // devices per km^2
  std::string time_of_day;
  Slice label = Slice::eMBB;
};

/// Declared vocabularies of the categorical fields.
struct KpiVocabulary {
  std::vector<std::string> use_case;
  std::vector<std::string> technology;
  std::vector<std::string> time_of_day;
};

const KpiVocabulary& default_vocabulary();

/// Deterministic labelling rule without noise: latency <= 2 ms and reliability
/// >= 99.99 % is URLLC; density >= 1e4 /km^2 with packets <= 256 B is mMTC; else eMBB.
Slice rule_label(const KpiRecord& r);

/// Synthetic dataset: each record draws a use case, tiered KPIs from that use case's
/// profile, the rule label, and with probability `label_noise` a label redrawn
/// uniformly from the three slices.
std::vector<KpiRecord> generate_dataset(int n, std::uint64_t seed, double label_noise = 0.05);

/// Disjoint shuffled partition; the first part holds round(ratio * n) records.
std::pair<std::vector<KpiRecord>, std::vector<KpiRecord>> split_dataset(const std::vector<KpiRecord>& data,
                                                                        double ratio, std::uint64_t seed);

/// CSV header use_case,latency_ms,reliability_pct,technology,packet_bytes,device_density,time_of_day,label.
void write_dataset_csv(std::ostream& out, const std::vector<KpiRecord>& data);
std::vector<KpiRecord> read_dataset_csv(std::istream& in);

/// One-hot blocks for the categorical fields followed by four standardized
/// numeric columns: log10 latency, reliability in nines (-log10(1 - r/100)),
/// log10 packet size and log10 device density.
class FeatureEncoder {
 public:
  FeatureEncoder() = default;
  explicit FeatureEncoder(KpiVocabulary vocab);

  /// Fits the numeric means and standard deviations on `train`.
  void fit(const std::vector<KpiRecord>& train);
  Eigen::MatrixXd encode(const std::vector<KpiRecord>& records) const;
  Eigen::RowVectorXd encode(const KpiRecord& r) const;
  std::vector<int> labels(const std::vector<KpiRecord>& records) const;

  int width() const;
  const KpiVocabulary& vocabulary() const { return vocab_; }
  const std::array<double, 4>& mean() const { return mean_; }
  const std::array<double, 4>& stddev() const { return std_; }
  void set_statistics(const std::array<double, 4>& mean, const std::array<double, 4>& stddev);

  static std::array<double, 4> raw_numeric(const KpiRecord& r);

 private:
  KpiVocabulary vocab_;
  std::array<double, 4> mean_{0, 0, 0, 0};
  std::array<double, 4> std_{1, 1, 1, 1};
};

/// Feedforward classifier: ReLU hidden layers, softmax output over {eMBB, URLLC, mMTC}.
struct Mlp {
  std::vector<Eigen::MatrixXd> weights;  // layer i maps width i -> width i + 1
  std::vector<Eigen::RowVectorXd> biases;
  double l2 = 1e-4;

  std::vector<int> layer_sizes() const;
  /// Row-wise class probabilities.
  Eigen::MatrixXd probabilities(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd logits(const Eigen::MatrixXd& x) const;
  /// Mean cross-entropy plus l2 * sum of squared weights (biases excluded).
  double loss(const Eigen::MatrixXd& x, const std::vector<int>& y) const;
  /// Backpropagated gradients of loss() in the layout of weights / biases.
  void gradients(const Eigen::MatrixXd& x, const std::vector<int>& y, std::vector<Eigen::MatrixXd>& dw,
                 std::vector<Eigen::RowVectorXd>& db) const;
  int num_parameters() const;
};

/// He-uniform initialization for the given layer sizes.
Mlp make_mlp(const std::vector<int>& sizes, double l2, std::uint64_t seed);

/// Row-wise softmax, shifted by the row maximum.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& z);

struct RpropParams {
  double eta_plus = 1.2;
  double eta_minus = 0.5;
  double delta0 = 0.1;
  double delta_min = 1e-6;
  double delta_max = 50.0;
};

/// One Rprop- update of a single weight. `delta` and `prev_grad` are updated in
/// place; on a sign flip the stored gradient is cleared and no step is taken.
/// Returns the weight increment.
double rprop_step(double grad, double& delta, double& prev_grad, const RpropParams& p);

struct TrainOptions {
  std::vector<int> hidden{64, 32};
  int epochs = 200;
  double l2 = 1e-4;
  RpropParams rprop;
  std::uint64_t seed = 1;
};

struct TrainHistory {
  std::vector<double> loss;
  std::vector<double> accuracy;  // training accuracy per epoch
};

/// Full-batch Rprop training on encoded features. Throws if the loss turns non-finite.
Mlp train_rprop(const Eigen::MatrixXd& x, const std::vector<int>& y, const TrainOptions& opt, TrainHistory* history);

/// Encoder plus network, as stored on disk.
struct SlicePredictor {
  FeatureEncoder encoder;
  Mlp net;
};

struct Prediction {
  Slice label = Slice::eMBB;
  std::array<double, 3> probabilities{0, 0, 0};
};

/// Fits the encoder on `train` and trains the network.
SlicePredictor train_predictor(const std::vector<KpiRecord>& train, const TrainOptions& opt,
                               TrainHistory* history = nullptr);

Prediction predict(const SlicePredictor& model, const KpiRecord& r);

struct ClassifierReport {
  double accuracy = 0.0;
  std::array<std::array<int, 3>, 3> confusion{};  // [true][predicted]
  int total = 0;
};

ClassifierReport evaluate_classifier(const SlicePredictor& model, const std::vector<KpiRecord>& test);
/// Accuracy of precomputed predictions against labels.
ClassifierReport score_predictions(const std::vector<int>& truth, const std::vector<int>& predicted);

/// Versioned text format. Throws on I/O errors, version mismatch or corrupt content.
void save_model(const SlicePredictor& model, const std::string& path);
SlicePredictor load_model(const std::string& path);
void write_model(std::ostream& out, const SlicePredictor& model);
SlicePredictor read_model(std::istream& in);

}  // namespace hyfi
