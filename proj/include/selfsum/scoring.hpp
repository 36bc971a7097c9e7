#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "selfsum/common.hpp"
#include "selfsum/corpus.hpp"
#include "selfsum/rng.hpp"
#include "selfsum/rouge.hpp"

namespace selfsum {

enum class Provenance { teacher, llm_relabel };

inline std::string to_string(Provenance p) {
  return p == Provenance::teacher ? "teacher" : "llm_relabel";
}

inline Provenance parse_provenance(std::string_view s) {
  if (s == "teacher") return Provenance::teacher;
  if (s == "llm_relabel") return Provenance::llm_relabel;
  throw DataError("unknown provenance '" + std::string(s) + "'");
}

struct PseudoLabel {
  std::string document_id;
  std::vector<double> probabilities;
  std::vector<std::size_t> selected;  // sorted ascending
  std::optional<double> teacher_conf;
  std::optional<int> llm_score;  // [0,100]
  Provenance provenance = Provenance::teacher;
};

/// Mean predicted probability of the selected sentences.
inline double teacher_confidence(std::span<const double> probabilities,
                                 std::span<const std::size_t> selected) {
  if (selected.empty()) throw std::invalid_argument("teacher_confidence: empty selection");
  double sum = 0.0;
  for (std::size_t i : selected) {
    if (i >= probabilities.size())
      throw std::invalid_argument("teacher_confidence: selected index out of range");
    sum += probabilities[i];
  }
  return sum / static_cast<double>(selected.size());
}

struct ConfidenceBreakdown {
  std::vector<double> c_values;
  std::vector<int> top4_indicator;
};

/// Per-sentence agreement terms of the TSL-style confidence: q_i marks the top-4
/// probabilities (ties toward the lower index), c_i = p_i q_i + (1 - p_i)(1 - q_i).
inline ConfidenceBreakdown tsl_breakdown(std::span<const double> probabilities) {
  if (probabilities.empty()) throw std::invalid_argument("tsl_breakdown: empty probabilities");
  std::vector<std::size_t> order(probabilities.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probabilities[a] > probabilities[b]; });
  ConfidenceBreakdown out;
  out.c_values.resize(probabilities.size());
  out.top4_indicator.assign(probabilities.size(), 0);
  for (std::size_t r = 0; r < std::min<std::size_t>(4, order.size()); ++r)
    out.top4_indicator[order[r]] = 1;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities[i];
    const double q = static_cast<double>(out.top4_indicator[i]);
    out.c_values[i] = p * q + (1.0 - p) * (1.0 - q);
  }
  return out;
}

/// Mean of the agreement terms over every sentence of the document.
inline double tsl_confidence(std::span<const double> probabilities) {
  const ConfidenceBreakdown b = tsl_breakdown(probabilities);
  double sum = 0.0;
  for (double c : b.c_values) sum += c;
  return sum / static_cast<double>(b.c_values.size());
}

namespace detail {

inline bool confidence_before(const PseudoLabel& a, const PseudoLabel& b) {
  if (*a.teacher_conf != *b.teacher_conf) return *a.teacher_conf > *b.teacher_conf;
  return a.document_id < b.document_id;
}

}  // namespace detail

/// Top-min(m, count) pseudo-labels by teacher confidence, descending; equal
/// confidences order by document id.
inline std::vector<PseudoLabel> shortlist(std::vector<PseudoLabel> candidates, std::size_t m) {
  for (const auto& c : candidates)
    if (!c.teacher_conf)
      throw std::invalid_argument("shortlist: candidate '" + c.document_id +
                                  "' lacks teacher confidence");
  std::sort(candidates.begin(), candidates.end(), detail::confidence_before);
  if (candidates.size() > m) candidates.resize(m);
  return candidates;
}

/// k candidates drawn uniformly without replacement (all of them when k >= count).
inline std::vector<PseudoLabel> select_random(const std::vector<PseudoLabel>& candidates,
                                              std::size_t k, std::mt19937& rng) {
  return sample_without_replacement(candidates, k, rng);
}

/// Top-min(k, count) by llm_score descending; ties prefer higher teacher
/// confidence, then the smaller document id.
inline std::vector<PseudoLabel> select_top_by_score(std::vector<PseudoLabel> candidates,
                                                    std::size_t k) {
  for (const auto& c : candidates)
    if (!c.llm_score)
      throw std::invalid_argument("select_top_by_score: candidate '" + c.document_id +
                                  "' lacks an llm_score");
  std::sort(candidates.begin(), candidates.end(), [](const PseudoLabel& a, const PseudoLabel& b) {
    if (*a.llm_score != *b.llm_score) return *a.llm_score > *b.llm_score;
    const double ca = a.teacher_conf.value_or(0.0);
    const double cb = b.teacher_conf.value_or(0.0);
    if (ca != cb) return ca > cb;
    return a.document_id < b.document_id;
  });
  if (candidates.size() > k) candidates.resize(k);
  return candidates;
}

/// ROUGE-2 F1 of a candidate's pseudo-summary against its document's gold summary.
inline double oracle_r2(const PseudoLabel& candidate, const Corpus& corpus) {
  const Document& doc = corpus.at(candidate.document_id);
  if (!doc.gold_labels)
    throw DataError("oracle_r2: document '" + doc.id + "' has no gold labels");
  const auto cand_tokens = tokenize(summary_text(doc, candidate.selected));
  const auto gold_tokens = tokenize(summary_text(doc, *doc.gold_labels));
  return rouge_n(cand_tokens, gold_tokens, 2).f1;
}

/// Top-min(k, count) by ROUGE-2 F1 against gold; ties prefer higher teacher
/// confidence, then the smaller document id.
inline std::vector<PseudoLabel> oracle_select(std::vector<PseudoLabel> candidates,
                                              const Corpus& corpus, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> keyed;
  keyed.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i)
    keyed.emplace_back(oracle_r2(candidates[i], corpus), i);
  std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    const PseudoLabel& pa = candidates[a.second];
    const PseudoLabel& pb = candidates[b.second];
    const double ca = pa.teacher_conf.value_or(0.0);
    const double cb = pb.teacher_conf.value_or(0.0);
    if (ca != cb) return ca > cb;
    return pa.document_id < pb.document_id;
  });
  std::vector<PseudoLabel> out;
  out.reserve(std::min(k, keyed.size()));
  for (std::size_t i = 0; i < std::min(k, keyed.size()); ++i)
    out.push_back(candidates[keyed[i].second]);
  return out;
}

enum class Strategy {
  random,
  confidence,
  confidence_score,
  confidence_relabel,
  confidence_relabel_score,
  oracle,
};

inline std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::random: return "random";
    case Strategy::confidence: return "confidence";
    case Strategy::confidence_score: return "confidence_score";
    case Strategy::confidence_relabel: return "confidence_relabel";
    case Strategy::confidence_relabel_score: return "confidence_relabel_score";
    case Strategy::oracle: return "oracle";
  }
  throw std::logic_error("unreachable strategy value");
}

inline const std::vector<std::string>& strategy_names() {
  static const std::vector<std::string> names = {
      "random",  "confidence",       "confidence_score", "confidence_relabel",
      "confidence_relabel_score", "oracle"};
  return names;
}

inline Strategy parse_strategy(std::string_view s) {
  if (s == "random") return Strategy::random;
  if (s == "confidence") return Strategy::confidence;
  if (s == "confidence_score") return Strategy::confidence_score;
  if (s == "confidence_relabel") return Strategy::confidence_relabel;
  if (s == "confidence_relabel_score") return Strategy::confidence_relabel_score;
  if (s == "oracle") return Strategy::oracle;
  throw ConfigError("unknown strategy '" + std::string(s) + "' (valid: " +
                    join(strategy_names(), " | ") + ")");
}

inline bool uses_relabel(Strategy s) {
  return s == Strategy::confidence_relabel || s == Strategy::confidence_relabel_score;
}

inline bool uses_score(Strategy s) {
  return s == Strategy::confidence_score || s == Strategy::confidence_relabel_score;
}

}  // namespace selfsum
