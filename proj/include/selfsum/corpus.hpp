#pragma once

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "selfsum/common.hpp"
#include "selfsum/rng.hpp"
#include "selfsum/rouge.hpp"

namespace selfsum {

/// One pre-sentence-split document. gold_labels / reference_summaries hold sentence
/// indices into `sentences`; abstract is a free-text reference for oracle labeling.
struct Document {
  std::string id;
  std::vector<std::string> sentences;
  std::optional<std::vector<std::size_t>> gold_labels;  // sorted, unique
  std::optional<std::string> abstract;
  std::optional<std::vector<std::vector<std::size_t>>> reference_summaries;

  void validate() const {
    if (sentences.empty()) throw DataError("document '" + id + "' has no sentences");
    for (const auto& s : sentences)
      if (s.empty()) throw DataError("document '" + id + "' contains an empty sentence");
    auto check_indices = [&](std::span<const std::size_t> idx, const char* what) {
      for (std::size_t i : idx)
        if (i >= sentences.size())
          throw DataError("document '" + id + "': " + what + " index " + std::to_string(i) +
                          " out of range for " + std::to_string(sentences.size()) + " sentences");
    };
    if (gold_labels) check_indices(*gold_labels, "gold_labels");
    if (reference_summaries)
      for (const auto& ref : *reference_summaries) check_indices(ref, "reference_summaries");
  }

  bool labelable() const { return gold_labels.has_value(); }
};

/// Selected sentences joined with single spaces, in document order.
inline std::string summary_text(const Document& doc, std::span<const std::size_t> indices) {
  std::string out;
  for (std::size_t i : indices) {
    if (i >= doc.sentences.size())
      throw std::invalid_argument("summary_text: index out of range for document '" + doc.id + "'");
    if (!out.empty()) out += ' ';
    out += doc.sentences[i];
  }
  return out;
}

/// Reference summary texts for evaluation: reference_summaries when present, else
/// gold_labels as a single reference. Empty when the document carries neither.
inline std::vector<std::string> reference_texts(const Document& doc) {
  std::vector<std::string> out;
  if (doc.reference_summaries) {
    for (const auto& ref : *doc.reference_summaries) out.push_back(summary_text(doc, ref));
  } else if (doc.gold_labels) {
    out.push_back(summary_text(doc, *doc.gold_labels));
  }
  return out;
}

class Corpus {
 public:
  void add(Document doc) {
    doc.validate();
    if (index_.count(doc.id)) throw DataError("duplicate document id '" + doc.id + "'");
    index_[doc.id] = docs_.size();
    docs_.push_back(std::move(doc));
  }

  const Document* find(const std::string& id) const {
    auto it = index_.find(id);
    return it == index_.end() ? nullptr : &docs_[it->second];
  }

  const Document& at(const std::string& id) const {
    const Document* doc = find(id);
    if (!doc) throw DataError("unknown document id '" + id + "'");
    return *doc;
  }

  Document& mutable_at(const std::string& id) {
    auto it = index_.find(id);
    if (it == index_.end()) throw DataError("unknown document id '" + id + "'");
    return docs_[it->second];
  }

  const std::vector<Document>& docs() const { return docs_; }
  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Disjoint labeled/unlabeled id pools.
struct Pools {
  std::vector<std::string> labeled;
  std::vector<std::string> unlabeled;

  bool disjoint() const {
    std::unordered_set<std::string> seen(labeled.begin(), labeled.end());
    if (seen.size() != labeled.size()) return false;
    for (const auto& id : unlabeled)
      if (!seen.insert(id).second) return false;
    return seen.size() == labeled.size() + unlabeled.size();
  }

  void move_to_labeled(const std::string& id) {
    auto it = std::find(unlabeled.begin(), unlabeled.end(), id);
    if (it == unlabeled.end()) throw DataError("pool move: id '" + id + "' is not unlabeled");
    unlabeled.erase(it);
    labeled.push_back(id);
  }
};

namespace detail {

inline std::vector<std::size_t> index_set_from_json(const nlohmann::json& arr, std::size_t line,
                                                    const char* field) {
  if (!arr.is_array()) throw DataError(std::string(field) + " must be an array of integers", line);
  std::vector<std::size_t> out;
  for (const auto& v : arr) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw DataError(std::string(field) + " must hold non-negative integers", line);
    out.push_back(v.get<std::size_t>());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/// Parses the line-delimited dataset format. Line numbers become ids when absent.
inline Corpus parse_dataset(std::istream& in) {
  Corpus corpus;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (trim(raw).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed record: ") + e.what(), line_no);
    }
    if (!rec.is_object()) throw DataError("record must be an object", line_no);
    Document doc;
    doc.id = rec.contains("id") && rec["id"].is_string() ? rec["id"].get<std::string>()
                                                         : std::to_string(line_no);
    if (!rec.contains("sentences"))
      throw DataError("record missing required field 'sentences'", line_no);
    if (!rec["sentences"].is_array())
      throw DataError("'sentences' must be an array of strings", line_no);
    for (const auto& s : rec["sentences"]) {
      if (!s.is_string()) throw DataError("'sentences' must be an array of strings", line_no);
      doc.sentences.push_back(s.get<std::string>());
    }
    if (rec.contains("gold_labels"))
      doc.gold_labels = detail::index_set_from_json(rec["gold_labels"], line_no, "gold_labels");
    if (rec.contains("abstract")) {
      if (!rec["abstract"].is_string()) throw DataError("'abstract' must be a string", line_no);
      doc.abstract = rec["abstract"].get<std::string>();
    }
    if (rec.contains("reference_summaries")) {
      if (!rec["reference_summaries"].is_array())
        throw DataError("'reference_summaries' must be an array of arrays", line_no);
      std::vector<std::vector<std::size_t>> refs;
      for (const auto& r : rec["reference_summaries"])
        refs.push_back(detail::index_set_from_json(r, line_no, "reference_summaries"));
      doc.reference_summaries = std::move(refs);
    }
    try {
      corpus.add(std::move(doc));
    } catch (const DataError& e) {
      throw DataError(e.what(), line_no);
    }
  }
  return corpus;
}

inline nlohmann::json document_to_json(const Document& doc) {
  nlohmann::json rec;
  rec["id"] = doc.id;
  rec["sentences"] = doc.sentences;
  if (doc.gold_labels) rec["gold_labels"] = *doc.gold_labels;
  if (doc.abstract) rec["abstract"] = *doc.abstract;
  if (doc.reference_summaries) rec["reference_summaries"] = *doc.reference_summaries;
  return rec;
}

/// Canonical one-record-per-line form, preserving corpus order.
inline void write_dataset(const Corpus& corpus, std::ostream& out) {
  for (const auto& doc : corpus.docs()) out << document_to_json(doc).dump() << '\n';
}

/// Random initial labeled/unlabeled split. Only documents with gold labels are
/// eligible for the labeled side; everything else lands in the unlabeled pool.
inline Pools split_pools(const Corpus& corpus, std::size_t labeled_count, std::uint64_t seed) {
  std::vector<std::string> eligible;
  for (const auto& doc : corpus.docs())
    if (doc.labelable()) eligible.push_back(doc.id);
  if (labeled_count > eligible.size())
    throw DataError("labeled_count " + std::to_string(labeled_count) + " exceeds the " +
                    std::to_string(eligible.size()) + " documents that carry gold labels");
  std::mt19937 rng(static_cast<std::uint32_t>(seed));
  deterministic_shuffle(eligible, rng);
  std::unordered_set<std::string> chosen(eligible.begin(),
                                         eligible.begin() + static_cast<std::ptrdiff_t>(labeled_count));
  Pools pools;
  for (const auto& doc : corpus.docs()) {
    if (chosen.count(doc.id))
      pools.labeled.push_back(doc.id);
    else
      pools.unlabeled.push_back(doc.id);
  }
  return pools;
}

/// min(limit, |unlabeled|) ids drawn uniformly without replacement.
inline std::vector<std::string> sample_unlabeled(const Pools& pools, std::size_t limit,
                                                 std::mt19937& rng) {
  if (limit == 0) throw std::invalid_argument("sample_unlabeled: limit must be positive");
  return sample_without_replacement(pools.unlabeled, limit, rng);
}

/// Greedy oracle labels: grow the selection one sentence at a time, each step
/// taking the sentence that most increases ROUGE-1 F1 + ROUGE-2 F1 of the concatenated
/// selection against the abstract; stop on no strict improvement or at max_k.
inline std::vector<std::size_t> greedy_extractive_labels(std::span<const std::string> sentences,
                                                         std::string_view abstract,
                                                         std::size_t max_k) {
  if (sentences.empty()) throw std::invalid_argument("greedy_extractive_labels: no sentences");
  if (abstract.empty()) throw std::invalid_argument("greedy_extractive_labels: empty abstract");
  if (max_k < 1) throw std::invalid_argument("greedy_extractive_labels: max_k must be >= 1");

  std::vector<std::vector<std::string>> sentence_tokens;
  sentence_tokens.reserve(sentences.size());
  for (const auto& s : sentences) sentence_tokens.push_back(tokenize(s));
  const std::vector<std::string> abstract_tokens = tokenize(abstract);

  auto objective = [&](const std::set<std::size_t>& selection) {
    std::vector<std::string> cat;
    for (std::size_t i : selection)
      cat.insert(cat.end(), sentence_tokens[i].begin(), sentence_tokens[i].end());
    return rouge_n(cat, abstract_tokens, 1).f1 + rouge_n(cat, abstract_tokens, 2).f1;
  };

  std::set<std::size_t> selection;
  double current = 0.0;
  while (selection.size() < max_k) {
    double best = current;
    std::size_t best_idx = sentences.size();
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (selection.count(i)) continue;
      auto trial = selection;
      trial.insert(i);
      const double score = objective(trial);
      if (score > best) {  // strict improvement; ties keep the earlier candidate
        best = score;
        best_idx = i;
      }
    }
    if (best_idx == sentences.size()) break;
    selection.insert(best_idx);
    current = best;
  }
  return {selection.begin(), selection.end()};
}

}  // namespace selfsum
