#pragma once

// Planted-keyword corpus generator for end-to-end tests.
//
// Three document shapes, all carrying gold labels:
//  - signal: two long all-rare key sentences, one short weak key, and
//    stopword-heavy fillers, two of them "strong": longer than the weak key
//    with a single rare token. Any reasonably trained teacher ranks the keys
//    first with high confidence.
//  - clone noise: three decoy sentences the teacher likes (long, rare-heavy)
//    plus four sentences shaped like weak keys; gold points at three random
//    positions. An adopted pseudo-label selects the decoys and marks the four
//    weak-key-shaped clones negative.
//  - lure noise: three sentences shaped like strong fillers over short
//    fillers; an adopted pseudo-label marks strong-filler-shaped sentences
//    positive.
//
// Adopting noise pseudo-labels therefore pushes weak keys down and strong
// fillers up until they swap on held-out signal documents; adopting gold or
// signal-only labels does not. Confidence separates signal from noise
// structurally (a weak key rides with two near-certain keys, decoys ride
// alone), so confidence-ordered selection stays on signal documents.
// Sampling candidates with a limit at or below the shortlist size keeps noise
// documents in every cycle's candidate set regardless of that margin.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "selfsum/corpus.hpp"
#include "selfsum/rng.hpp"

namespace synth {

struct SyntheticSpec {
  std::size_t train_docs = 200;
  std::size_t test_docs = 50;
  double signal_fraction_train = 0.45;
  std::size_t sentences_per_doc = 8;
  std::size_t keys_per_doc = 3;
  std::uint64_t seed = 97531;
};

struct SyntheticData {
  selfsum::Corpus train;
  selfsum::Corpus test;  // signal documents only
};

namespace detail {

inline const std::vector<std::string>& stop_pool() {
  static const std::vector<std::string> words = {"the", "of",  "and", "in", "to",
                                                 "is",  "on",  "at",  "as", "by"};
  return words;
}

inline const std::vector<std::string>& noun_pool() {
  static const std::vector<std::string> words = {
      "river",  "market", "signal", "bridge", "letter", "engine", "garden", "window",
      "music",  "stone",  "meadow", "harbor", "copper", "valley", "lantern", "orchard",
      "saddle", "kettle", "timber", "anchor", "ribbon", "barrel", "candle", "hammer"};
  return words;
}

class TokenFactory {
 public:
  std::string rare() { return "zq" + std::to_string(counter_++); }

 private:
  std::size_t counter_ = 0;
};

inline std::string pick(const std::vector<std::string>& pool, std::mt19937& rng) {
  return pool[selfsum::uniform_below(rng, static_cast<std::uint32_t>(pool.size()))];
}

inline std::string join_tokens(std::vector<std::string> tokens, std::mt19937& rng) {
  selfsum::deterministic_shuffle(tokens, rng);
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

/// Seven tokens, all unique to the sentence.
inline std::string strong_key(TokenFactory& tokens, std::mt19937& rng) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < 7; ++i) parts.push_back(tokens.rare());
  return join_tokens(std::move(parts), rng);
}

/// Six tokens, three unique.
inline std::string weak_key(const std::vector<std::string>& doc_nouns, TokenFactory& tokens,
                            std::mt19937& rng) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < 3; ++i) parts.push_back(tokens.rare());
  parts.push_back(pick(doc_nouns, rng));
  parts.push_back(pick(stop_pool(), rng));
  parts.push_back(pick(stop_pool(), rng));
  return join_tokens(std::move(parts), rng);
}

/// Same length and uniqueness as a weak key, stopwords in place of the noun.
inline std::string clone(TokenFactory& tokens, std::mt19937& rng) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < 3; ++i) parts.push_back(tokens.rare());
  for (std::size_t i = 0; i < 3; ++i) parts.push_back(pick(stop_pool(), rng));
  return join_tokens(std::move(parts), rng);
}

/// Long and rare-heavy; outranks clones without reaching strong-key strength.
inline std::string decoy(const std::vector<std::string>& doc_nouns, TokenFactory& tokens,
                         std::mt19937& rng) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < 5; ++i) parts.push_back(tokens.rare());
  parts.push_back(pick(doc_nouns, rng));
  parts.push_back(pick(doc_nouns, rng));
  for (std::size_t i = 0; i < 3; ++i) parts.push_back(pick(stop_pool(), rng));
  return join_tokens(std::move(parts), rng);
}

/// Longer than a weak key with a single rare token; lures in noise documents
/// use the same construction.
inline std::string strong_filler(const std::vector<std::string>& doc_nouns, TokenFactory& tokens,
                                 std::mt19937& rng) {
  std::vector<std::string> parts;
  parts.push_back(tokens.rare());
  for (std::size_t i = 0; i < 4; ++i) parts.push_back(pick(doc_nouns, rng));
  for (std::size_t i = 0; i < 3; ++i) parts.push_back(pick(stop_pool(), rng));
  return join_tokens(std::move(parts), rng);
}

/// Short and stopword-heavy.
inline std::string short_filler(const std::vector<std::string>& doc_nouns, std::mt19937& rng) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < 3; ++i) parts.push_back(pick(stop_pool(), rng));
  const std::size_t nouns = 1 + selfsum::uniform_below(rng, 2);  // 1..2
  for (std::size_t i = 0; i < nouns; ++i) parts.push_back(pick(doc_nouns, rng));
  return join_tokens(std::move(parts), rng);
}

/// Longest sentence of a noise document; mostly stopwords, never gold and
/// never attractive to the teacher. Keeps length normalization comparable
/// between document shapes.
inline std::string anchor(const std::vector<std::string>& doc_nouns, std::mt19937& rng) {
  std::vector<std::string> parts;
  for (std::size_t i = 0; i < 6; ++i) parts.push_back(pick(stop_pool(), rng));
  for (std::size_t i = 0; i < 4; ++i) parts.push_back(pick(doc_nouns, rng));
  return join_tokens(std::move(parts), rng);
}

inline std::vector<std::string> doc_noun_pool(std::mt19937& rng) {
  std::vector<std::string> nouns;
  while (nouns.size() < 2) {
    std::string n = pick(noun_pool(), rng);
    if (std::find(nouns.begin(), nouns.end(), n) == nouns.end()) nouns.push_back(n);
  }
  return nouns;
}

inline std::vector<std::size_t> random_positions(std::size_t count, std::size_t total,
                                                 std::mt19937& rng) {
  std::vector<std::size_t> all(total);
  std::iota(all.begin(), all.end(), std::size_t{0});
  auto chosen = selfsum::sample_without_replacement(all, count, rng);
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

inline selfsum::Document signal_doc(const std::string& id, const SyntheticSpec& spec,
                                    TokenFactory& tokens, std::mt19937& rng) {
  selfsum::Document doc;
  doc.id = id;
  doc.sentences.resize(spec.sentences_per_doc);
  const std::vector<std::string> nouns = doc_noun_pool(rng);
  const auto keys = random_positions(spec.keys_per_doc, spec.sentences_per_doc, rng);
  const std::size_t weak_slot =
      selfsum::uniform_below(rng, static_cast<std::uint32_t>(keys.size()));
  for (std::size_t i = 0; i < keys.size(); ++i)
    doc.sentences[keys[i]] =
        i == weak_slot ? weak_key(nouns, tokens, rng) : strong_key(tokens, rng);
  std::size_t fillers = 0;
  for (auto& sentence : doc.sentences)
    if (sentence.empty())
      sentence = fillers++ < 2 ? strong_filler(nouns, tokens, rng) : short_filler(nouns, rng);
  doc.gold_labels = keys;
  return doc;
}

enum class NoiseKind { clones, lures };

inline selfsum::Document noise_doc(const std::string& id, NoiseKind kind,
                                   const SyntheticSpec& spec, TokenFactory& tokens,
                                   std::mt19937& rng) {
  selfsum::Document doc;
  doc.id = id;
  doc.sentences.resize(spec.sentences_per_doc);
  const std::vector<std::string> nouns = doc_noun_pool(rng);
  const std::size_t anchor_pos =
      selfsum::uniform_below(rng, static_cast<std::uint32_t>(spec.sentences_per_doc));
  std::size_t placed = 0;
  for (std::size_t i = 0; i < spec.sentences_per_doc; ++i) {
    if (i == anchor_pos) {
      doc.sentences[i] = anchor(nouns, rng);
      continue;
    }
    const std::size_t slot = placed++;
    if (kind == NoiseKind::clones)
      doc.sentences[i] = slot < 3   ? decoy(nouns, tokens, rng)
                         : slot < 7 ? clone(tokens, rng)
                                    : short_filler(nouns, rng);
    else
      doc.sentences[i] = slot < 3 ? strong_filler(nouns, tokens, rng)
                                  : short_filler(nouns, rng);
  }
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < spec.sentences_per_doc; ++i)
    if (i != anchor_pos) eligible.push_back(i);
  auto gold = selfsum::sample_without_replacement(eligible, spec.keys_per_doc, rng);
  std::sort(gold.begin(), gold.end());
  doc.gold_labels = gold;
  return doc;
}

}  // namespace detail

inline SyntheticData make_synthetic(const SyntheticSpec& spec = SyntheticSpec{}) {
  std::mt19937 rng(static_cast<std::uint32_t>(spec.seed));
  detail::TokenFactory tokens;
  SyntheticData data;

  const auto signal_count = static_cast<std::size_t>(
      spec.signal_fraction_train * static_cast<double>(spec.train_docs) + 0.5);
  // 0 = signal, 1 = clone noise, 2 = lure noise
  std::vector<int> kind(spec.train_docs, 0);
  for (std::size_t i = signal_count; i < spec.train_docs; ++i)
    kind[i] = (i - signal_count) % 2 == 0 ? 1 : 2;
  selfsum::deterministic_shuffle(kind, rng);
  for (std::size_t i = 0; i < spec.train_docs; ++i) {
    const std::string id = "train_" + std::to_string(i);
    if (kind[i] == 0)
      data.train.add(detail::signal_doc(id, spec, tokens, rng));
    else
      data.train.add(detail::noise_doc(
          id, kind[i] == 1 ? detail::NoiseKind::clones : detail::NoiseKind::lures, spec, tokens,
          rng));
  }
  for (std::size_t i = 0; i < spec.test_docs; ++i)
    data.test.add(detail::signal_doc("test_" + std::to_string(i), spec, tokens, rng));
  return data;
}

/// Shape of a generated document, recovered from its sentences.
enum class DocKind { signal, clones, lures };

inline DocKind classify(const selfsum::Document& doc) {
  std::size_t rare_sentences = 0;
  std::size_t max_rare = 0;
  for (const auto& sentence : doc.sentences) {
    std::size_t rare = 0;
    for (const auto& token : selfsum::tokenize(sentence))
      if (token.size() > 2 && token[0] == 'z' && token[1] == 'q') rare++;
    if (rare > 0) rare_sentences++;
    max_rare = std::max(max_rare, rare);
  }
  if (max_rare >= 6) return DocKind::signal;  // only strong keys reach 7 rare tokens
  return rare_sentences >= 6 ? DocKind::clones : DocKind::lures;  // signal has 5 rare-bearing
}

/// Documents whose extracted summary equals the gold label set.
inline std::size_t exact_matches(const selfsum::TeacherModel& teacher,
                                 const std::vector<const selfsum::Document*>& docs,
                                 std::size_t summary_len) {
  std::size_t hits = 0;
  for (const auto* doc : docs) {
    auto sel = selfsum::extract_summary(teacher.predict_probs(*doc), summary_len);
    if (sel == *doc->gold_labels) hits++;
  }
  return hits;
}

inline std::vector<const selfsum::Document*> doc_ptrs(const selfsum::Corpus& corpus) {
  std::vector<const selfsum::Document*> out;
  out.reserve(corpus.size());
  for (const auto& doc : corpus.docs()) out.push_back(&doc);
  return out;
}

}  // namespace synth
