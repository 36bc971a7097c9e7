#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace selfsum {

/// Precision/recall/F1 triple for one ROUGE variant. 0/0 counts score as 0.
struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

enum class Metric { rouge1, rouge2, rougeL };

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::rouge1: return "r1";
    case Metric::rouge2: return "r2";
    case Metric::rougeL: return "rl";
  }
  return "?";
}

inline Metric parse_metric(std::string_view name) {
  if (name == "r1") return Metric::rouge1;
  if (name == "r2") return Metric::rouge2;
  if (name == "rl") return Metric::rougeL;
  throw std::invalid_argument("unknown metric (expected r1|r2|rl): " + std::string(name));
}

/// Lowercases and splits on maximal runs of non-alphanumeric characters (ASCII).
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const bool digit = ch >= '0' && ch <= '9';
    const bool lower = ch >= 'a' && ch <= 'z';
    const bool upper = ch >= 'A' && ch <= 'Z';
    if (digit || lower) {
      cur.push_back(ch);
    } else if (upper) {
      cur.push_back(static_cast<char>(ch - 'A' + 'a'));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

namespace detail {

inline double f1_from(double precision, double recall) {
  return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

// n-grams keyed by tokens joined with an unlikely separator byte.
inline std::unordered_map<std::string, std::size_t> ngram_counts(std::span<const std::string> tokens,
                                                                 std::size_t n) {
  std::unordered_map<std::string, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key;
    for (std::size_t j = 0; j < n; ++j) {
      if (j) key.push_back('\x1f');
      key += tokens[i + j];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace detail

/// Clipped n-gram overlap: sum over distinct n-grams of min(candidate count, reference count).
inline RougeScore rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                          std::size_t n) {
  if (n < 1) throw std::invalid_argument("rouge_n: n must be >= 1");
  const auto cand_counts = detail::ngram_counts(candidate, n);
  const auto ref_counts = detail::ngram_counts(reference, n);
  std::size_t cand_total = candidate.size() >= n ? candidate.size() - n + 1 : 0;
  std::size_t ref_total = reference.size() >= n ? reference.size() - n + 1 : 0;
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cand_counts) {
    auto it = ref_counts.find(gram);
    if (it != ref_counts.end()) overlap += std::min(count, it->second);
  }
  RougeScore s;
  s.precision = cand_total ? static_cast<double>(overlap) / static_cast<double>(cand_total) : 0.0;
  s.recall = ref_total ? static_cast<double>(overlap) / static_cast<double>(ref_total) : 0.0;
  s.f1 = detail::f1_from(s.precision, s.recall);
  return s;
}

inline RougeScore rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
  const std::size_t m = candidate.size(), n = reference.size();
  std::size_t lcs = 0;
  if (m && n) {
    // single-row DP
    std::vector<std::size_t> row(n + 1, 0);
    for (std::size_t i = 1; i <= m; ++i) {
      std::size_t diag = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t up = row[j];
        row[j] = candidate[i - 1] == reference[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
        diag = up;
      }
    }
    lcs = row[n];
  }
  RougeScore s;
  s.precision = m ? static_cast<double>(lcs) / static_cast<double>(m) : 0.0;
  s.recall = n ? static_cast<double>(lcs) / static_cast<double>(n) : 0.0;
  s.f1 = detail::f1_from(s.precision, s.recall);
  return s;
}

inline RougeScore rouge_score(std::span<const std::string> candidate,
                              std::span<const std::string> reference, Metric metric) {
  switch (metric) {
    case Metric::rouge1: return rouge_n(candidate, reference, 1);
    case Metric::rouge2: return rouge_n(candidate, reference, 2);
    case Metric::rougeL: return rouge_l(candidate, reference);
  }
  throw std::invalid_argument("rouge_score: bad metric");
}

/// Best score over the references by F1; ties keep the earliest reference.
inline RougeScore rouge_multi(std::span<const std::string> candidate,
                              const std::vector<std::vector<std::string>>& references, Metric metric) {
  if (references.empty()) throw std::invalid_argument("rouge_multi: at least one reference required");
  RougeScore best = rouge_score(candidate, references.front(), metric);
  for (std::size_t i = 1; i < references.size(); ++i) {
    const RougeScore s = rouge_score(candidate, references[i], metric);
    if (s.f1 > best.f1) best = s;
  }
  return best;
}

}  // namespace selfsum
