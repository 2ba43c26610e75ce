#include "hyfi/slice_predictor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "hyfi/csv.hpp"

namespace hyfi {

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

const KpiVocabulary& default_vocabulary() {
  static const KpiVocabulary v{
      {"video_streaming", "ar_vr", "web_browsing", "industrial_automation", "remote_surgery", "vehicular_safety",
       "smart_metering", "asset_tracking", "environmental_sensing"},
      {"wifi", "lifi", "hybrid", "cellular"},
      {"night", "morning", "afternoon", "evening"}};
  return v;
}

Slice rule_label(const KpiRecord& r) {
  if (r.latency_ms <= 2.0 && r.reliability_pct >= 99.99) return Slice::URLLC;
  if (r.device_density >= 1e4 && r.packet_bytes <= 256.0) return Slice::mMTC;
  return Slice::eMBB;
}

namespace {

// KPI levels of one use-case profile with their relative weights.
struct Tiered {
  std::vector<double> levels;
  std::vector<double> weights;

  double draw(std::mt19937_64& rng) const {
    std::discrete_distribution<std::size_t> d(weights.begin(), weights.end());
    return levels[d(rng)];
  }
};

struct Profile {
  Tiered latency_ms;
  Tiered reliability_pct;
  Tiered packet_bytes;
  Tiered density;
};

// Use cases come in three groups of three (broadband, critical, sensor). KPIs
// are tabulated in discrete tiers; the tiers overlap the rule thresholds so the
// use case alone does not determine the label.
const std::array<Profile, 3>& profiles() {
  static const std::array<Profile, 3> p{{
      {{{5, 10, 20, 50, 100, 300}, {1, 1, 1, 1, 1, 1}},
       {{99.0, 99.9, 99.99}, {1, 1, 1}},
       {{512, 1024, 1500, 4096, 9000}, {1, 1, 1, 1, 1}},
       {{10, 100, 1e3, 5e3}, {1, 1, 1, 1}}},
      {{{0.5, 1, 2, 5}, {3, 3, 3, 1}},
       {{99.9, 99.99, 99.999, 99.9999}, {1, 4, 4, 4}},
       {{32, 64, 128, 256, 512, 1024, 1500}, {1, 1, 1, 1, 1, 1, 1}},
       {{10, 100, 1e3, 5e3}, {1, 1, 1, 1}}},
      {{{5, 10, 50, 100, 300, 1000}, {1, 1, 1, 1, 1, 1}},
       {{90.0, 99.0, 99.9}, {1, 1, 1}},
       {{32, 64, 128, 256, 512}, {2, 2, 2, 2, 1}},
       {{1e3, 5e3, 1e4, 5e4, 1e5, 1e6}, {1, 1, 3, 3, 3, 3}}},
  }};
  return p;
}

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
  std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
  return v[d(rng)];
}

}  // namespace

std::vector<KpiRecord> generate_dataset(int n, std::uint64_t seed, double label_noise) {
  if (n < 1) throw Error("generate_dataset: n must be >= 1");
  if (!(label_noise >= 0 && label_noise <= 1)) throw Error("generate_dataset: label noise must lie in [0, 1]");
  const KpiVocabulary& vocab = default_vocabulary();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> cls(0, 2);
  std::vector<KpiRecord> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    KpiRecord r;
    const std::size_t uc = std::uniform_int_distribution<std::size_t>(0, vocab.use_case.size() - 1)(rng);
    r.use_case = vocab.use_case[uc];
    const Profile& pr = profiles()[uc / 3];
    r.latency_ms = pr.latency_ms.draw(rng);
    r.reliability_pct = pr.reliability_pct.draw(rng);
    r.packet_bytes = pr.packet_bytes.draw(rng);
    r.device_density = pr.density.draw(rng);
    r.technology = pick(rng, vocab.technology);
    r.time_of_day = pick(rng, vocab.time_of_day);
    r.label = rule_label(r);
    if (u01(rng) < label_noise) r.label = static_cast<Slice>(cls(rng));
    out.push_back(std::move(r));
  }
  return out;
}

std::pair<std::vector<KpiRecord>, std::vector<KpiRecord>> split_dataset(const std::vector<KpiRecord>& data,
                                                                        double ratio, std::uint64_t seed) {
  if (!(ratio > 0 && ratio < 1)) throw Error("split_dataset: ratio must lie in (0, 1)");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(data.size())));
  std::pair<std::vector<KpiRecord>, std::vector<KpiRecord>> out;
  for (std::size_t i = 0; i < idx.size(); ++i) (i < n_train ? out.first : out.second).push_back(data[idx[i]]);
  return out;
}

void write_dataset_csv(std::ostream& out, const std::vector<KpiRecord>& data) {
  CsvWriter csv(out, {"use_case", "latency_ms", "reliability_pct", "technology", "packet_bytes", "device_density",
                      "time_of_day", "label"});
  for (const auto& r : data) {
    csv.row(r.use_case, r.latency_ms, r.reliability_pct, r.technology, r.packet_bytes, r.device_density,
            r.time_of_day, to_string(r.label));
  }
}

namespace {

double parse_double(const std::string& s, const char* what) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(std::string("cannot parse ") + what + " '" + s + "'");
  }
  return v;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) f.push_back(cell);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  return f;
}

}  // namespace

std::vector<KpiRecord> read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("dataset CSV: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string header = "use_case,latency_ms,reliability_pct,technology,packet_bytes,device_density,time_of_day";
  // The label column is optional so the same reader serves prediction inputs.
  const bool labelled = line == header + ",label";
  if (!labelled && line != header) throw Error("dataset CSV: unexpected header '" + line + "'");
  std::vector<KpiRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != (labelled ? 8u : 7u)) throw Error("dataset CSV: wrong field count on line " + std::to_string(lineno));
    KpiRecord r;
    r.use_case = f[0];
    r.latency_ms = parse_double(f[1], "latency_ms");
    r.reliability_pct = parse_double(f[2], "reliability_pct");
    r.technology = f[3];
    r.packet_bytes = parse_double(f[4], "packet_bytes");
    r.device_density = parse_double(f[5], "device_density");
    r.time_of_day = f[6];
    if (labelled) r.label = slice_from_string(f[7]);
    out.push_back(std::move(r));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Encoding
// ---------------------------------------------------------------------------

FeatureEncoder::FeatureEncoder(KpiVocabulary vocab) : vocab_(std::move(vocab)) {
  if (vocab_.use_case.empty() || vocab_.technology.empty() || vocab_.time_of_day.empty()) {
    throw Error("FeatureEncoder: empty vocabulary");
  }
}

std::array<double, 4> FeatureEncoder::raw_numeric(const KpiRecord& r) {
  if (!(r.latency_ms > 0) || !std::isfinite(r.latency_ms) || !(r.reliability_pct < 100.0) || !(r.reliability_pct > 0.0) ||
      !(r.packet_bytes > 0) || !(r.device_density > 0)) {
    throw Error("FeatureEncoder: numeric KPI out of range");
  }
  return {std::log10(r.latency_ms), -std::log10(1.0 - r.reliability_pct / 100.0), std::log10(r.packet_bytes),
          std::log10(r.device_density)};
}

void FeatureEncoder::fit(const std::vector<KpiRecord>& train) {
  if (train.empty()) throw Error("FeatureEncoder::fit: empty training set");
  std::array<double, 4> sum{0, 0, 0, 0};
  for (const auto& r : train) {
    const auto v = raw_numeric(r);
    for (int j = 0; j < 4; ++j) sum[j] += v[j];
  }
  const double n = static_cast<double>(train.size());
  for (int j = 0; j < 4; ++j) mean_[j] = sum[j] / n;
  std::array<double, 4> ss{0, 0, 0, 0};
  for (const auto& r : train) {
    const auto v = raw_numeric(r);
    for (int j = 0; j < 4; ++j) ss[j] += (v[j] - mean_[j]) * (v[j] - mean_[j]);
  }
  for (int j = 0; j < 4; ++j) {
    const double s = std::sqrt(ss[j] / n);
    std_[j] = s > 0 ? s : 1.0;
  }
}

void FeatureEncoder::set_statistics(const std::array<double, 4>& mean, const std::array<double, 4>& stddev) {
  for (double s : stddev) {
    if (!(s > 0)) throw Error("FeatureEncoder: standard deviations must be > 0");
  }
  mean_ = mean;
  std_ = stddev;
}

int FeatureEncoder::width() const {
  return static_cast<int>(vocab_.use_case.size() + vocab_.technology.size() + vocab_.time_of_day.size()) + 4;
}

namespace {

int index_of(const std::vector<std::string>& vocab, const std::string& v, const char* field) {
  const auto it = std::find(vocab.begin(), vocab.end(), v);
  if (it == vocab.end()) throw Error(std::string("unknown ") + field + " '" + v + "'");
  return static_cast<int>(it - vocab.begin());
}

}  // namespace

Eigen::RowVectorXd FeatureEncoder::encode(const KpiRecord& r) const {
  Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(width());
  int off = 0;
  x(off + index_of(vocab_.use_case, r.use_case, "use_case")) = 1.0;
  off += static_cast<int>(vocab_.use_case.size());
  x(off + index_of(vocab_.technology, r.technology, "technology")) = 1.0;
  off += static_cast<int>(vocab_.technology.size());
  x(off + index_of(vocab_.time_of_day, r.time_of_day, "time_of_day")) = 1.0;
  off += static_cast<int>(vocab_.time_of_day.size());
  const auto v = raw_numeric(r);
  for (int j = 0; j < 4; ++j) x(off + j) = (v[j] - mean_[j]) / std_[j];
  return x;
}

Eigen::MatrixXd FeatureEncoder::encode(const std::vector<KpiRecord>& records) const {
  Eigen::MatrixXd x(static_cast<int>(records.size()), width());
  for (std::size_t i = 0; i < records.size(); ++i) x.row(static_cast<int>(i)) = encode(records[i]);
  return x;
}

std::vector<int> FeatureEncoder::labels(const std::vector<KpiRecord>& records) const {
  std::vector<int> y;
  y.reserve(records.size());
  for (const auto& r : records) y.push_back(static_cast<int>(r.label));
  return y;
}

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& z) {
  Eigen::MatrixXd p(z.rows(), z.cols());
  for (int i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    p.row(i) = (z.row(i).array() - m).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

std::vector<int> Mlp::layer_sizes() const {
  std::vector<int> s;
  if (weights.empty()) return s;
  s.push_back(static_cast<int>(weights.front().rows()));
  for (const auto& w : weights) s.push_back(static_cast<int>(w.cols()));
  return s;
}

int Mlp::num_parameters() const {
  int n = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) n += static_cast<int>(weights[i].size() + biases[i].size());
  return n;
}

Eigen::MatrixXd Mlp::logits(const Eigen::MatrixXd& x) const {
  if (weights.empty() || x.cols() != weights.front().rows()) throw Error("Mlp: input width does not match the network");
  Eigen::MatrixXd a = x;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    Eigen::MatrixXd z = (a * weights[i]).rowwise() + biases[i];
    a = i + 1 < weights.size() ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

Eigen::MatrixXd Mlp::probabilities(const Eigen::MatrixXd& x) const { return softmax_rows(logits(x)); }

double Mlp::loss(const Eigen::MatrixXd& x, const std::vector<int>& y) const {
  const Eigen::MatrixXd z = logits(x);
  double ce = 0.0;
  for (int i = 0; i < z.rows(); ++i) {
    const double m = z.row(i).maxCoeff();
    const double lse = m + std::log((z.row(i).array() - m).exp().sum());
    ce += lse - z(i, y[i]);
  }
  double reg = 0.0;
  for (const auto& w : weights) reg += w.squaredNorm();
  return ce / static_cast<double>(z.rows()) + l2 * reg;
}

void Mlp::gradients(const Eigen::MatrixXd& x, const std::vector<int>& y, std::vector<Eigen::MatrixXd>& dw,
                    std::vector<Eigen::RowVectorXd>& db) const {
  const std::size_t n_layers = weights.size();
  std::vector<Eigen::MatrixXd> acts{x};  // inputs of each layer
  std::vector<Eigen::MatrixXd> pre;
  for (std::size_t i = 0; i < n_layers; ++i) {
    Eigen::MatrixXd z = (acts.back() * weights[i]).rowwise() + biases[i];
    pre.push_back(z);
    if (i + 1 < n_layers) acts.push_back(z.cwiseMax(0.0));
  }
  const double n = static_cast<double>(x.rows());
  Eigen::MatrixXd delta = softmax_rows(pre.back());
  for (int r = 0; r < delta.rows(); ++r) delta(r, y[r]) -= 1.0;
  delta /= n;
  dw.assign(n_layers, Eigen::MatrixXd());
  db.assign(n_layers, Eigen::RowVectorXd());
  for (std::size_t i = n_layers; i-- > 0;) {
    dw[i] = acts[i].transpose() * delta + 2.0 * l2 * weights[i];
    db[i] = delta.colwise().sum();
    if (i > 0) {
      delta = (delta * weights[i].transpose()).cwiseProduct((pre[i - 1].array() > 0.0).cast<double>().matrix());
    }
  }
}

Mlp make_mlp(const std::vector<int>& sizes, double l2, std::uint64_t seed) {
  if (sizes.size() < 2) throw Error("make_mlp: need at least input and output sizes");
  for (int s : sizes) {
    if (s < 1) throw Error("make_mlp: layer sizes must be >= 1");
  }
  if (sizes.back() != 3) throw Error("make_mlp: output layer must have 3 units");
  if (!(l2 >= 0)) throw Error("make_mlp: l2 must be >= 0");
  Mlp m;
  m.l2 = l2;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    const double lim = std::sqrt(6.0 / sizes[i]);
    std::uniform_real_distribution<double> u(-lim, lim);
    Eigen::MatrixXd w(sizes[i], sizes[i + 1]);
    for (int j = 0; j < w.size(); ++j) w(j) = u(rng);
    m.weights.push_back(std::move(w));
    m.biases.push_back(Eigen::RowVectorXd::Zero(sizes[i + 1]));
  }
  return m;
}

double rprop_step(double grad, double& delta, double& prev_grad, const RpropParams& p) {
  const double s = grad * prev_grad;
  if (s > 0) {
    delta = std::min(delta * p.eta_plus, p.delta_max);
  } else if (s < 0) {
    delta = std::max(delta * p.eta_minus, p.delta_min);
    prev_grad = 0.0;
    return 0.0;
  }
  prev_grad = grad;
  if (grad > 0) return -delta;
  if (grad < 0) return delta;
  return 0.0;
}

namespace {

double accuracy_of(const Eigen::MatrixXd& logits, const std::vector<int>& y) {
  int correct = 0;
  for (int i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    if (arg == y[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

template <typename M>
void apply_rprop(M& param, const M& grad, M& delta, M& prev, const RpropParams& p) {
  for (Eigen::Index j = 0; j < param.size(); ++j) param(j) += rprop_step(grad(j), delta(j), prev(j), p);
}

}  // namespace

Mlp train_rprop(const Eigen::MatrixXd& x, const std::vector<int>& y, const TrainOptions& opt, TrainHistory* history) {
  if (x.rows() == 0 || static_cast<std::size_t>(x.rows()) != y.size()) throw Error("train_rprop: features / labels mismatch");
  for (int c : y) {
    if (c < 0 || c > 2) throw Error("train_rprop: labels must be 0, 1 or 2");
  }
  if (opt.epochs < 1) throw Error("train_rprop: epochs must be >= 1");
  const RpropParams& rp = opt.rprop;
  if (!(rp.eta_plus > 1 && rp.eta_minus > 0 && rp.eta_minus < 1 && rp.delta_min > 0 && rp.delta_min <= rp.delta0 &&
        rp.delta0 <= rp.delta_max)) {
    throw Error("train_rprop: invalid Rprop constants");
  }
  std::vector<int> sizes{static_cast<int>(x.cols())};
  sizes.insert(sizes.end(), opt.hidden.begin(), opt.hidden.end());
  sizes.push_back(3);
  Mlp m = make_mlp(sizes, opt.l2, opt.seed);

  std::vector<Eigen::MatrixXd> dw_step, dw_prev, dw;
  std::vector<Eigen::RowVectorXd> db_step, db_prev, db;
  for (std::size_t i = 0; i < m.weights.size(); ++i) {
    dw_step.push_back(Eigen::MatrixXd::Constant(m.weights[i].rows(), m.weights[i].cols(), rp.delta0));
    dw_prev.push_back(Eigen::MatrixXd::Zero(m.weights[i].rows(), m.weights[i].cols()));
    db_step.push_back(Eigen::RowVectorXd::Constant(m.biases[i].size(), rp.delta0));
    db_prev.push_back(Eigen::RowVectorXd::Zero(m.biases[i].size()));
  }
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    if (history) {
      const double l = m.loss(x, y);
      if (!std::isfinite(l)) throw Error("train_rprop: loss diverged at epoch " + std::to_string(epoch));
      history->loss.push_back(l);
      history->accuracy.push_back(accuracy_of(m.logits(x), y));
    }
    m.gradients(x, y, dw, db);
    for (std::size_t i = 0; i < m.weights.size(); ++i) {
      apply_rprop(m.weights[i], dw[i], dw_step[i], dw_prev[i], rp);
      apply_rprop(m.biases[i], db[i], db_step[i], db_prev[i], rp);
    }
  }
  const double final_loss = m.loss(x, y);
  if (!std::isfinite(final_loss)) throw Error("train_rprop: loss diverged");
  if (history) {
    history->loss.push_back(final_loss);
    history->accuracy.push_back(accuracy_of(m.logits(x), y));
  }
  return m;
}

SlicePredictor train_predictor(const std::vector<KpiRecord>& train, const TrainOptions& opt, TrainHistory* history) {
  SlicePredictor p;
  p.encoder = FeatureEncoder(default_vocabulary());
  p.encoder.fit(train);
  p.net = train_rprop(p.encoder.encode(train), p.encoder.labels(train), opt, history);
  return p;
}

Prediction predict(const SlicePredictor& model, const KpiRecord& r) {
  const Eigen::RowVectorXd x = model.encoder.encode(r);
  if (model.net.weights.empty() || x.size() != model.net.weights.front().rows()) {
    throw Error("predict: encoding does not match the network input");
  }
  const Eigen::MatrixXd p = model.net.probabilities(x);
  Prediction out;
  Eigen::Index arg = 0;
  p.row(0).maxCoeff(&arg);
  out.label = static_cast<Slice>(arg);
  for (int c = 0; c < 3; ++c) out.probabilities[c] = p(0, c);
  return out;
}

ClassifierReport score_predictions(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.empty() || truth.size() != predicted.size()) throw Error("score_predictions: empty or mismatched inputs");
  ClassifierReport rep;
  int correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ++rep.confusion[truth[i]][predicted[i]];
    if (truth[i] == predicted[i]) ++correct;
  }
  rep.total = static_cast<int>(truth.size());
  rep.accuracy = static_cast<double>(correct) / rep.total;
  return rep;
}

ClassifierReport evaluate_classifier(const SlicePredictor& model, const std::vector<KpiRecord>& test) {
  if (test.empty()) throw Error("evaluate_classifier: empty test set");
  const Eigen::MatrixXd z = model.net.logits(model.encoder.encode(test));
  std::vector<int> pred(test.size());
  for (int i = 0; i < z.rows(); ++i) {
    Eigen::Index arg = 0;
    z.row(i).maxCoeff(&arg);
    pred[i] = static_cast<int>(arg);
  }
  return score_predictions(model.encoder.labels(test), pred);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kMagic = "hyfi-slice-mlp";
constexpr int kVersion = 1;

void write_words(std::ostream& out, const char* key, const std::vector<std::string>& words) {
  out << key << ' ' << words.size();
  for (const auto& w : words) out << ' ' << w;
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word(const char* what) {
    std::string w;
    if (!(in_ >> w)) throw Error(std::string("model file: truncated while reading ") + what);
    return w;
  }
  void expect(const std::string& key) {
    const std::string w = word(key.c_str());
    if (w != key) throw Error("model file: expected '" + key + "', found '" + w + "'");
  }
  long integer(const char* what) {
    const std::string w = word(what);
    long v = 0;
    const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
    if (res.ec != std::errc() || res.ptr != w.data() + w.size()) throw Error(std::string("model file: bad ") + what);
    return v;
  }
  double number(const char* what) {
    const std::string w = word(what);
    double v = 0;
    const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
    if (res.ec != std::errc() || res.ptr != w.data() + w.size() || !std::isfinite(v)) {
      throw Error(std::string("model file: bad ") + what);
    }
    return v;
  }
  std::vector<std::string> words(const char* key) {
    expect(key);
    const long n = integer(key);
    if (n < 1 || n > 10000) throw Error(std::string("model file: bad size for ") + key);
    std::vector<std::string> out;
    for (long i = 0; i < n; ++i) out.push_back(word(key));
    return out;
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_model(std::ostream& out, const SlicePredictor& model) {
  const auto sizes = model.net.layer_sizes();
  out << kMagic << ' ' << kVersion << '\n';
  out << "layers " << sizes.size();
  for (int s : sizes) out << ' ' << s;
  out << '\n';
  out << "activation relu softmax\n";
  out << "l2 " << format_number(model.net.l2) << '\n';
  const auto& v = model.encoder.vocabulary();
  write_words(out, "use_case", v.use_case);
  write_words(out, "technology", v.technology);
  write_words(out, "time_of_day", v.time_of_day);
  out << "numeric_mean";
  for (double m : model.encoder.mean()) out << ' ' << format_number(m);
  out << "\nnumeric_std";
  for (double s : model.encoder.stddev()) out << ' ' << format_number(s);
  out << '\n';
  for (std::size_t i = 0; i < model.net.weights.size(); ++i) {
    const auto& w = model.net.weights[i];
    out << "weights " << i;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) out << ' ' << format_number(w(r, c));
    out << "\nbias " << i;
    for (Eigen::Index c = 0; c < model.net.biases[i].size(); ++c) out << ' ' << format_number(model.net.biases[i](c));
    out << '\n';
  }
  out << "end\n";
}

SlicePredictor read_model(std::istream& in) {
  Reader rd(in);
  if (rd.word("header") != kMagic) throw Error("model file: not a slice predictor model");
  const long version = rd.integer("version");
  if (version != kVersion) throw Error("model file: unsupported version " + std::to_string(version));
  rd.expect("layers");
  const long n_layers = rd.integer("layer count");
  if (n_layers < 2 || n_layers > 64) throw Error("model file: bad layer count");
  std::vector<int> sizes;
  for (long i = 0; i < n_layers; ++i) {
    const long s = rd.integer("layer size");
    if (s < 1 || s > 100000) throw Error("model file: bad layer size");
    sizes.push_back(static_cast<int>(s));
  }
  if (sizes.back() != 3) throw Error("model file: output layer must have 3 units");
  rd.expect("activation");
  rd.expect("relu");
  rd.expect("softmax");
  rd.expect("l2");
  SlicePredictor p;
  p.net.l2 = rd.number("l2");
  KpiVocabulary v;
  v.use_case = rd.words("use_case");
  v.technology = rd.words("technology");
  v.time_of_day = rd.words("time_of_day");
  p.encoder = FeatureEncoder(v);
  std::array<double, 4> mean{}, stddev{};
  rd.expect("numeric_mean");
  for (auto& m : mean) m = rd.number("numeric mean");
  rd.expect("numeric_std");
  for (auto& s : stddev) s = rd.number("numeric std");
  p.encoder.set_statistics(mean, stddev);
  if (sizes.front() != p.encoder.width()) throw Error("model file: input size does not match the feature encoding");
  for (long i = 0; i + 1 < n_layers; ++i) {
    rd.expect("weights");
    if (rd.integer("layer index") != i) throw Error("model file: layers out of order");
    Eigen::MatrixXd w(sizes[i], sizes[i + 1]);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rd.number("weight");
    rd.expect("bias");
    if (rd.integer("layer index") != i) throw Error("model file: layers out of order");
    Eigen::RowVectorXd b(sizes[i + 1]);
    for (Eigen::Index c = 0; c < b.size(); ++c) b(c) = rd.number("bias");
    p.net.weights.push_back(std::move(w));
    p.net.biases.push_back(std::move(b));
  }
  rd.expect("end");
  return p;
}

void save_model(const SlicePredictor& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_model(out, model);
  if (!out) throw Error("failed writing '" + path + "'");
}

SlicePredictor load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file '" + path + "'");
  return read_model(in);
}

}  // namespace hyfi
