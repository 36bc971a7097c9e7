#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "selfsum/common.hpp"
#include "selfsum/corpus.hpp"
#include "selfsum/rouge.hpp"

namespace selfsum {

inline constexpr std::size_t kFeatureCount = 5;

inline const std::array<std::string, kFeatureCount>& feature_names() {
  static const std::array<std::string, kFeatureCount> names = {
      "relative_position", "length_norm", "centroid_similarity", "distinctive_term_count_norm",
      "stopword_ratio"};
  return names;
}

inline const std::unordered_set<std::string>& stopword_set() {
  static const std::unordered_set<std::string> words = {
      "a",    "an",   "and",  "are", "as",   "at",   "be",   "but",  "by",   "for", "from",
      "had",  "has",  "have", "he",  "her",  "his",  "i",    "in",   "is",   "it",  "its",
      "not",  "of",   "on",   "or",  "she",  "that", "the",  "their", "then", "they", "this",
      "to",   "was",  "we",   "were", "will", "with", "you"};
  return words;
}

struct SentenceFeatures {
  double relative_position = 0.0;
  double length_norm = 0.0;
  double centroid_similarity = 0.0;
  double distinctive_term_count_norm = 0.0;
  double stopword_ratio = 0.0;

  std::array<double, kFeatureCount> as_array() const {
    return {relative_position, length_norm, centroid_similarity, distinctive_term_count_norm,
            stopword_ratio};
  }
};

namespace detail {

using TfVector = std::unordered_map<std::string, double>;

inline double cosine(const TfVector& a, const TfVector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (const auto& [term, v] : a) {
    na += v * v;
    auto it = b.find(term);
    if (it != b.end()) dot += v * it->second;
  }
  for (const auto& [term, v] : b) nb += v * v;
  if (na == 0.0 && nb == 0.0) return 1.0;
  if (na == 0.0 || nb == 0.0) return 0.0;
  // all term weights are non-negative, so the true value lies in [0,1];
  // clamp away floating-point spill
  return std::min(1.0, dot / (std::sqrt(na) * std::sqrt(nb)));
}

}  // namespace detail

/// Hand-rolled surface signals standing in for a learned sentence encoder.
inline std::vector<SentenceFeatures> featurize(const Document& doc) {
  const std::size_t n = doc.sentences.size();
  if (n == 0) throw std::invalid_argument("featurize: empty document");

  std::vector<std::vector<std::string>> tokens(n);
  std::vector<detail::TfVector> tf(n);
  detail::TfVector centroid;
  std::size_t max_len = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tokens[i] = tokenize(doc.sentences[i]);
    max_len = std::max(max_len, tokens[i].size());
    for (const auto& t : tokens[i]) tf[i][t] += 1.0;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [term, v] : tf[i]) centroid[term] += v / static_cast<double>(n);

  // Terms that occur in exactly one sentence of the document.
  std::unordered_map<std::string, std::size_t> sentence_count;
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [term, v] : tf[i]) sentence_count[term] += 1;

  std::vector<SentenceFeatures> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    SentenceFeatures& f = out[i];
    f.relative_position = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
    f.length_norm =
        max_len == 0 ? 0.0 : static_cast<double>(tokens[i].size()) / static_cast<double>(max_len);
    f.centroid_similarity = detail::cosine(tf[i], centroid);
    std::size_t distinctive = 0;
    for (const auto& [term, v] : tf[i])
      if (sentence_count[term] == 1) ++distinctive;
    f.distinctive_term_count_norm =
        tf[i].empty() ? 0.0 : static_cast<double>(distinctive) / static_cast<double>(tf[i].size());
    std::size_t stop = 0;
    for (const auto& t : tokens[i])
      if (stopword_set().count(t)) ++stop;
    f.stopword_ratio =
        tokens[i].empty() ? 0.0 : static_cast<double>(stop) / static_cast<double>(tokens[i].size());
  }
  return out;
}

struct TrainingExample {
  std::array<double, kFeatureCount> features{};
  int label = 0;  // 0 or 1
};

struct TeacherParams {
  std::array<double, kFeatureCount> weights{};
  double bias = 0.0;

  double logit(const std::array<double, kFeatureCount>& x) const {
    double z = bias;
    for (std::size_t i = 0; i < kFeatureCount; ++i) z += weights[i] * x[i];
    return z;
  }
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z))); }

/// Mean binary cross-entropy with positive examples weighted by pos_weight.
inline double weighted_bce_loss(std::span<const TrainingExample> examples,
                                const TeacherParams& params, double pos_weight) {
  if (examples.empty()) throw std::invalid_argument("weighted_bce_loss: no examples");
  double total = 0.0;
  for (const auto& ex : examples) {
    const double z = params.logit(ex.features);
    // -log sigmoid(z) = softplus(-z); -log(1 - sigmoid(z)) = softplus(z)
    const double nll = ex.label == 1 ? pos_weight * softplus(-z) : softplus(z);
    total += nll;
  }
  return total / static_cast<double>(examples.size());
}

/// Analytic gradient of weighted_bce_loss with respect to weights and bias.
inline TeacherParams weighted_bce_gradient(std::span<const TrainingExample> examples,
                                           const TeacherParams& params, double pos_weight) {
  if (examples.empty()) throw std::invalid_argument("weighted_bce_gradient: no examples");
  TeacherParams grad;
  for (const auto& ex : examples) {
    const double z = params.logit(ex.features);
    const double c = ex.label == 1 ? pos_weight : 1.0;
    const double dz = c * (sigmoid(z) - static_cast<double>(ex.label));
    for (std::size_t i = 0; i < kFeatureCount; ++i) grad.weights[i] += dz * ex.features[i];
    grad.bias += dz;
  }
  const double inv = 1.0 / static_cast<double>(examples.size());
  for (auto& w : grad.weights) w *= inv;
  grad.bias *= inv;
  return grad;
}

/// Top-n sentence indices by probability (ties toward the lower index), in document order.
inline std::vector<std::size_t> extract_summary(std::span<const double> probabilities,
                                                std::size_t n) {
  if (probabilities.empty()) throw std::invalid_argument("extract_summary: empty probability list");
  if (n < 1) throw std::invalid_argument("extract_summary: n must be >= 1");
  std::vector<std::size_t> order(probabilities.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probabilities[a] > probabilities[b]; });
  order.resize(std::min(n, order.size()));
  std::sort(order.begin(), order.end());
  return order;
}

/// A document paired with the sentence indices treated as summary-positive.
struct LabeledExample {
  const Document* document = nullptr;
  std::vector<std::size_t> labels;
};

class TeacherModel {
 public:
  virtual ~TeacherModel() = default;
  virtual void fit(std::span<const LabeledExample> labeled) = 0;
  virtual std::vector<double> predict_probs(const Document& doc) const = 0;
  virtual bool trained() const = 0;
};

struct TeacherHyperparams {
  double learning_rate = 0.1;
  std::size_t epochs = 300;
  std::uint64_t seed = 0;  // reserved for stochastic variants; the reference fit is closed-form deterministic
};

/// Reference teacher: logistic regression over SentenceFeatures, full-batch gradient
/// descent from zero-initialized weights.
class LogisticTeacher : public TeacherModel {
 public:
  LogisticTeacher() = default;
  explicit LogisticTeacher(TeacherHyperparams hyper) : hyper_(hyper) {}

  void fit(std::span<const LabeledExample> labeled) override {
    std::vector<TrainingExample> examples;
    std::size_t positives = 0;
    for (const auto& item : labeled) {
      if (!item.document) throw std::invalid_argument("fit: null document");
      std::unordered_set<std::size_t> selected(item.labels.begin(), item.labels.end());
      const auto feats = featurize(*item.document);
      for (std::size_t i = 0; i < feats.size(); ++i) {
        TrainingExample ex;
        ex.features = feats[i].as_array();
        ex.label = selected.count(i) ? 1 : 0;
        positives += static_cast<std::size_t>(ex.label);
        examples.push_back(ex);
      }
    }
    if (examples.empty()) throw DataError("fit: no training sentences");
    if (positives == 0 || positives == examples.size())
      throw DataError("fit: degenerate label distribution (needs >= 1 positive and >= 1 negative)");

    const double pos_weight =
        static_cast<double>(examples.size() - positives) / static_cast<double>(positives);
    params_ = TeacherParams{};
    loss_trace_.clear();
    loss_trace_.reserve(hyper_.epochs);
    for (std::size_t epoch = 0; epoch < hyper_.epochs; ++epoch) {
      loss_trace_.push_back(weighted_bce_loss(examples, params_, pos_weight));
      const TeacherParams grad = weighted_bce_gradient(examples, params_, pos_weight);
      for (std::size_t i = 0; i < kFeatureCount; ++i)
        params_.weights[i] -= hyper_.learning_rate * grad.weights[i];
      params_.bias -= hyper_.learning_rate * grad.bias;
    }
    trained_ = true;
  }

  std::vector<double> predict_probs(const Document& doc) const override {
    if (!trained_) throw Error("predict_probs: model not trained");
    const auto feats = featurize(doc);
    std::vector<double> probs;
    probs.reserve(feats.size());
    for (const auto& f : feats) probs.push_back(sigmoid(params_.logit(f.as_array())));
    return probs;
  }

  bool trained() const override { return trained_; }

  const TeacherParams& parameters() const { return params_; }
  const std::vector<double>& loss_trace() const { return loss_trace_; }

  void set_parameters(const TeacherParams& params) {
    params_ = params;
    trained_ = true;
  }

  void save(const std::string& path) const {
    if (!trained_) throw Error("save: model not trained");
    std::string text = "selfsum-teacher-v1\n";
    for (std::size_t i = 0; i < kFeatureCount; ++i)
      text += feature_names()[i] + " " + format_double(params_.weights[i]) + "\n";
    text += "bias " + format_double(params_.bias) + "\n";
    write_file(path, text);
  }

  void load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CheckpointError("cannot open teacher weights file: " + path);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "selfsum-teacher-v1")
      throw CheckpointError("unrecognized teacher weights header in " + path);
    TeacherParams params;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      if (!std::getline(in, line))
        throw CheckpointError("truncated teacher weights file: " + path);
      const auto parts = split(trim(line), ' ');
      if (parts.size() != 2 || parts[0] != feature_names()[i])
        throw CheckpointError("unexpected weight line '" + line + "' in " + path);
      params.weights[i] = std::stod(parts[1]);
    }
    if (!std::getline(in, line)) throw CheckpointError("truncated teacher weights file: " + path);
    const auto parts = split(trim(line), ' ');
    if (parts.size() != 2 || parts[0] != "bias")
      throw CheckpointError("unexpected bias line '" + line + "' in " + path);
    params.bias = std::stod(parts[1]);
    set_parameters(params);
  }

 private:
  TeacherHyperparams hyper_;
  TeacherParams params_;
  std::vector<double> loss_trace_;
  bool trained_ = false;
};

}  // namespace selfsum
