#pragma once

// Brute-force reference implementations used only by tests. These stay deliberately
// naive and independent of the library's algorithms: n-gram overlap is counted by
// quadratic scanning, the LCS is found by plain recursion, and the greedy labeler is
// re-enumerated step by step. Keep them slow and obvious.

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace oracle {

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline double f1_of(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

inline std::vector<std::vector<std::string>> ngrams(const std::vector<std::string>& toks,
                                                    std::size_t n) {
  std::vector<std::vector<std::string>> out;
  if (toks.size() < n) return out;
  for (std::size_t i = 0; i + n <= toks.size(); ++i)
    out.emplace_back(toks.begin() + static_cast<std::ptrdiff_t>(i),
                     toks.begin() + static_cast<std::ptrdiff_t>(i + n));
  return out;
}

inline std::size_t count_occurrences(const std::vector<std::vector<std::string>>& grams,
                                     const std::vector<std::string>& g) {
  std::size_t c = 0;
  for (const auto& h : grams)
    if (h == g) ++c;
  return c;
}

inline Prf rouge_n_brute(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                         std::size_t n) {
  const auto cg = ngrams(cand, n);
  const auto rg = ngrams(ref, n);
  std::size_t overlap = 0;
  std::set<std::vector<std::string>> seen;
  for (const auto& g : cg) {
    if (!seen.insert(g).second) continue;
    overlap += std::min(count_occurrences(cg, g), count_occurrences(rg, g));
  }
  Prf out;
  out.precision = cg.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(cg.size());
  out.recall = rg.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(rg.size());
  out.f1 = f1_of(out.precision, out.recall);
  return out;
}

// Exponential-time LCS by recursion; fine for the short sequences tests use.
inline std::size_t lcs_recursive(const std::vector<std::string>& a, const std::vector<std::string>& b,
                                 std::size_t i, std::size_t j) {
  if (i == a.size() || j == b.size()) return 0;
  if (a[i] == b[j]) return 1 + lcs_recursive(a, b, i + 1, j + 1);
  return std::max(lcs_recursive(a, b, i + 1, j), lcs_recursive(a, b, i, j + 1));
}

inline Prf rouge_l_brute(const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
  const auto len = static_cast<double>(lcs_recursive(cand, ref, 0, 0));
  Prf out;
  out.precision = cand.empty() ? 0.0 : len / static_cast<double>(cand.size());
  out.recall = ref.empty() ? 0.0 : len / static_cast<double>(ref.size());
  out.f1 = f1_of(out.precision, out.recall);
  return out;
}

// ASCII-only tokenizer kept separate from the library's.
inline std::vector<std::string> tokenize_brute(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const bool alnum = (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z');
    if (alnum) {
      cur.push_back(ch >= 'A' && ch <= 'Z' ? static_cast<char>(ch - 'A' + 'a') : ch);
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Objective used by the greedy labeler: ROUGE-1 F1 + ROUGE-2 F1 of the concatenated
// selection (document order) against the abstract.
inline double greedy_objective_brute(const std::vector<std::string>& sentences,
                                     const std::set<std::size_t>& selection,
                                     const std::string& abstract) {
  std::string text;
  for (std::size_t idx : selection) {
    if (!text.empty()) text += ' ';
    text += sentences[idx];
  }
  const auto cand = tokenize_brute(text);
  const auto ref = tokenize_brute(abstract);
  return rouge_n_brute(cand, ref, 1).f1 + rouge_n_brute(cand, ref, 2).f1;
}

// Step-by-step re-enumeration of the greedy loop with the lower-index tie rule.
inline std::set<std::size_t> greedy_labels_brute(const std::vector<std::string>& sentences,
                                                 const std::string& abstract, std::size_t max_k) {
  std::set<std::size_t> selection;
  double current = 0.0;
  while (selection.size() < max_k) {
    double best = current;
    std::size_t best_idx = sentences.size();
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (selection.count(i)) continue;
      auto trial = selection;
      trial.insert(i);
      const double score = greedy_objective_brute(sentences, trial, abstract);
      if (score > best) {
        best = score;
        best_idx = i;
      }
    }
    if (best_idx == sentences.size()) break;
    selection.insert(best_idx);
    current = best;
  }
  return selection;
}

// Top-n indices by probability, ties to the lower index, returned in document order.
inline std::vector<std::size_t> top_n_brute(const std::vector<double>& probs, std::size_t n) {
  std::vector<std::size_t> order(probs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  if (n < order.size()) order.resize(n);
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace oracle
