#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "selfsum/common.hpp"
#include "selfsum/corpus.hpp"
#include "selfsum/rouge.hpp"
#include "selfsum/teacher.hpp"

namespace selfsum {

struct GenParams {
  double temperature = 0.0;
  int max_tokens = 512;

  bool operator==(const GenParams&) const = default;
};

/// A rendered completion request. document_id and summary carry routing metadata
/// for mock clients; only template_id, rendered_text, and GenParams feed the cache key.
struct Prompt {
  std::string template_id;  // relabel | score | leval
  std::string rendered_text;
  int k_or_n = 0;
  std::string document_id;
  std::string summary;
};

class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const Prompt& prompt, const GenParams& params) = 0;
};

namespace detail {

inline std::string flatten_line(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c == '\n' || c == '\r') c = ' ';
  return out;
}

inline std::string document_text(const Document& doc) {
  std::string out;
  for (const auto& s : doc.sentences) {
    if (!out.empty()) out += ' ';
    out += flatten_line(s);
  }
  return out;
}

}  // namespace detail

inline Prompt build_relabel_prompt(const Document& doc, std::size_t n) {
  if (doc.sentences.empty()) throw std::invalid_argument("build_relabel_prompt: empty document");
  std::string text =
      "You are labeling sentences of a document for extractive summarization.\n"
      "Each sentence below is prefixed with its line ID.\n\n";
  for (std::size_t i = 0; i < doc.sentences.size(); ++i)
    text += std::to_string(i + 1) + ": " + detail::flatten_line(doc.sentences[i]) + "\n";
  const std::string n_str = std::to_string(n);
  text +=
      "\nFor every sentence, output a line of the form \"ID: probability\" where the "
      "probability (a real number between 0 and 1) expresses how likely the sentence belongs "
      "in the summary. The summary will be built from the top-" +
      n_str +
      " sentences by probability, kept in their order of appearance in the document. "
      "Output exactly one line per sentence and nothing else.\n";
  Prompt p;
  p.template_id = "relabel";
  p.rendered_text = std::move(text);
  p.k_or_n = static_cast<int>(n);
  p.document_id = doc.id;
  return p;
}

inline Prompt build_score_prompt(const Document& doc, const std::string& summary, std::size_t k) {
  if (summary.empty()) throw std::invalid_argument("build_score_prompt: empty summary");
  const std::string k_str = std::to_string(k);
  std::string text =
      "Part 1. A text and its candidate summary.\n\nText:\n" + detail::document_text(doc) +
      "\n\nSummary:\n" + detail::flatten_line(summary) +
      "\n\nPart 2. Rate the summary with a rating between 0-100 according to the following "
      "criteria:\n"
      "- The summary should be concise, ideally with less than " +
      k_str +
      " sentences.\n"
      "- The summary should capture the key points from the input text. Do not penalize if it "
      "doesn't include any minor additional details.\n"
      "- The summary should be extractive, i.e., directly taken from the conversation without "
      "any modifications or removal of symbols.\n"
      "- The response should contain only the numerical rating.\n";
  Prompt p;
  p.template_id = "score";
  p.rendered_text = std::move(text);
  p.k_or_n = static_cast<int>(k);
  p.document_id = doc.id;
  p.summary = summary;
  return p;
}

inline Prompt build_leval_prompt(const Document& doc, const std::string& summary) {
  std::string text =
      "You will be given one candidate summary written for a source text. Rate the summary "
      "with a rating between 0-100, considering:\n"
      "- Coherence: the summary reads as well-structured, well-organized text.\n"
      "- Consistency: the summary contains only statements supported by the source text.\n"
      "- Relevance: the summary covers the important content of the source text.\n"
      "- Conciseness: the summary avoids redundant or repeated content.\n\n"
      "Source text:\n" +
      detail::document_text(doc) + "\n\nSummary:\n" + detail::flatten_line(summary) +
      "\n\nThe response should contain only the numerical rating.\n";
  Prompt p;
  p.template_id = "leval";
  p.rendered_text = std::move(text);
  p.document_id = doc.id;
  p.summary = summary;
  return p;
}

/// First integer token in [0,100] wins; an "X/100" pattern is normalized by clamping
/// its numerator; bare out-of-range integers are skipped.
inline int parse_rating(const std::string& text) {
  const std::size_t n = text.size();
  std::size_t i = 0;
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  while (i < n) {
    bool negative = false;
    std::size_t start = i;
    if (text[i] == '-' && i + 1 < n && is_digit(text[i + 1])) {
      negative = true;
      ++i;
    }
    if (!is_digit(text[i])) {
      i = start + 1;
      continue;
    }
    long long value = 0;
    while (i < n && is_digit(text[i])) {
      if (value < 1000000) value = value * 10 + (text[i] - '0');
      ++i;
    }
    if (negative) value = -value;
    // X/100 normalization: clamp the numerator
    std::size_t j = i;
    while (j < n && text[j] == ' ') ++j;
    if (j < n && text[j] == '/') {
      ++j;
      while (j < n && text[j] == ' ') ++j;
      if (j + 3 <= n && text.compare(j, 3, "100") == 0 && (j + 3 == n || !is_digit(text[j + 3]))) {
        return static_cast<int>(std::clamp<long long>(value, 0, 100));
      }
    }
    if (value >= 0 && value <= 100) return static_cast<int>(value);
  }
  throw LlmParseError("no rating in [0,100] found in response: " +
                      (text.size() > 120 ? text.substr(0, 120) + "..." : text));
}

/// Recovers "ID: value" pairs (first occurrence of an ID wins, out-of-range IDs
/// ignored, values clamped to [0,1]), fills missing IDs with probability 0, and
/// applies the teacher's top-n selection rule. Returns 0-based indices.
inline std::vector<std::size_t> parse_relabel_response(const std::string& text,
                                                       std::size_t sentence_count, std::size_t n) {
  if (sentence_count < 1)
    throw std::invalid_argument("parse_relabel_response: sentence_count must be >= 1");
  std::vector<double> probs(sentence_count, 0.0);
  std::vector<bool> seen(sentence_count, false);
  std::size_t pairs = 0;

  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  for (const auto& line : split(text, '\n')) {
    const std::size_t len = line.size();
    std::size_t i = 0;
    while (i < len) {
      if (!is_digit(line[i])) {
        ++i;
        continue;
      }
      std::size_t id = 0;
      bool overflow = false;
      while (i < len && is_digit(line[i])) {
        if (id > sentence_count) overflow = true;
        if (!overflow) id = id * 10 + static_cast<std::size_t>(line[i] - '0');
        ++i;
      }
      std::size_t j = i;
      while (j < len && (line[j] == ' ' || line[j] == '\t')) ++j;
      if (j >= len || line[j] != ':') continue;
      ++j;
      while (j < len && (line[j] == ' ' || line[j] == '\t')) ++j;
      if (j >= len) continue;
      const char* begin = line.c_str() + j;
      char* end = nullptr;
      const double value = std::strtod(begin, &end);
      if (end == begin || std::isnan(value)) continue;
      if (!overflow && id >= 1 && id <= sentence_count && !seen[id - 1]) {
        seen[id - 1] = true;
        probs[id - 1] = std::clamp(value, 0.0, 1.0);
        ++pairs;
      }
      break;  // one pair per line
    }
  }
  if (pairs == 0)
    throw LlmParseError("no ID: probability pairs found in relabel response: " +
                        (text.size() > 120 ? text.substr(0, 120) + "..." : text));
  return extract_summary(probs, n);
}

inline std::string cache_key(const Prompt& prompt, const GenParams& params) {
  std::string material = prompt.template_id;
  material += '\x1e';
  material += prompt.rendered_text;
  material += '\x1e';
  material += format_double(params.temperature);
  material += '\x1e';
  material += std::to_string(params.max_tokens);
  return sha256_hex(material);
}

/// Append-safe JSONL store: one record per completion keyed by cache_key.
class ResponseCache {
 public:
  explicit ResponseCache(std::string path) : path_(std::move(path)) { load(); }

  std::optional<std::string> get(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(const std::string& key, const Prompt& prompt, const GenParams& params,
           const std::string& response) {
    std::lock_guard<std::mutex> lock(mutex_);
    nlohmann::json rec;
    rec["key"] = key;
    rec["template_id"] = prompt.template_id;
    rec["temperature"] = params.temperature;
    rec["max_tokens"] = params.max_tokens;
    rec["response"] = response;
    rec["timestamp"] = static_cast<std::int64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
    std::ofstream out(path_, std::ios::app);
    if (!out) throw CacheError("cannot append to cache file: " + path_);
    out << rec.dump() << '\n';
    out.flush();
    if (!out) throw CacheError("write failed for cache file: " + path_);
    entries_[key] = response;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return entries_.size();
  }

  const std::string& path() const { return path_; }

 private:
  void load() {
    std::ifstream in(path_);
    if (!in) return;  // no cache yet
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      nlohmann::json rec;
      try {
        rec = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw CacheError("corrupt cache entry at " + path_ + ":" + std::to_string(line_no) +
                         ": " + e.what());
      }
      if (!rec.is_object() || !rec.contains("key") || !rec.contains("response") ||
          !rec["key"].is_string() || !rec["response"].is_string())
        throw CacheError("corrupt cache entry at " + path_ + ":" + std::to_string(line_no));
      entries_[rec["key"].get<std::string>()] = rec["response"].get<std::string>();
    }
  }

  std::string path_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> entries_;
};

struct RetryPolicy {
  std::size_t max_attempts = 3;
  std::chrono::milliseconds initial_backoff{100};
  double multiplier = 2.0;
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

inline void default_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

/// Retries retryable failures with exponential backoff; other errors propagate.
inline std::string complete_with_retries(LlmClient& client, const Prompt& prompt,
                                         const GenParams& params, const RetryPolicy& policy,
                                         const SleepFn& sleep = default_sleep) {
  if (policy.max_attempts < 1) throw std::invalid_argument("retry policy needs >= 1 attempt");
  double backoff = static_cast<double>(policy.initial_backoff.count());
  for (std::size_t attempt = 1;; ++attempt) {
    try {
      return client.complete(prompt, params);
    } catch (const LlmRetryableError&) {
      if (attempt >= policy.max_attempts) throw;
      sleep(std::chrono::milliseconds(static_cast<std::int64_t>(backoff)));
      backoff *= policy.multiplier;
    }
  }
}

/// Cache-through completion: hits skip the client entirely.
inline std::string cached_complete(LlmClient& client, ResponseCache& cache, const Prompt& prompt,
                                   const GenParams& params,
                                   const RetryPolicy& policy = RetryPolicy{},
                                   const SleepFn& sleep = default_sleep) {
  const std::string key = cache_key(prompt, params);
  if (auto hit = cache.get(key)) return *hit;
  const std::string response = complete_with_retries(client, prompt, params, policy, sleep);
  cache.put(key, prompt, params, response);
  return response;
}

struct HttpEndpoint {
  std::string base_url;  // e.g. https://api.openai.com or http://127.0.0.1:8080
  std::string api_key;
  std::string model;
  std::string path = "/v1/chat/completions";
  int timeout_seconds = 60;
};

/// OpenAI-compatible chat-completion client.
class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    if (endpoint_.base_url.empty()) throw ConfigError("LLM endpoint base URL is not configured");
    if (endpoint_.api_key.empty()) throw ConfigError("LLM API key is not configured");
    if (endpoint_.model.empty()) throw ConfigError("LLM model name is not configured");
  }

  std::string complete(const Prompt& prompt, const GenParams& params) override {
    nlohmann::json body;
    body["model"] = endpoint_.model;
    body["messages"] = nlohmann::json::array(
        {nlohmann::json{{"role", "user"}, {"content", prompt.rendered_text}}});
    body["temperature"] = params.temperature;
    body["max_tokens"] = params.max_tokens;

    httplib::Client client(endpoint_.base_url);
    client.set_connection_timeout(endpoint_.timeout_seconds, 0);
    client.set_read_timeout(endpoint_.timeout_seconds, 0);
    client.set_bearer_token_auth(endpoint_.api_key);

    httplib::Result res = client.Post(endpoint_.path, body.dump(), "application/json");
    if (!res)
      throw LlmRetryableError("LLM request failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
      throw LlmRetryableError("LLM endpoint returned status " + std::to_string(res->status) +
                              ": " + truncate_body(res->body));
    if (res->status < 200 || res->status >= 300)
      throw LlmError("LLM endpoint returned status " + std::to_string(res->status) + ": " +
                     truncate_body(res->body));
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw LlmError(std::string("malformed LLM response body: ") + e.what());
    }
    try {
      return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      throw LlmError("LLM response lacks choices[0].message.content: " + truncate_body(res->body));
    }
  }

 private:
  static std::string truncate_body(const std::string& body) {
    return body.size() > 200 ? body.substr(0, 200) + "..." : body;
  }

  HttpEndpoint endpoint_;
};

/// Replays canned responses in order; optionally injects failures.
class ScriptedLlmClient : public LlmClient {
 public:
  struct Entry {
    std::string text;
    bool fail_retryable = false;
    bool fail_fatal = false;
  };

  explicit ScriptedLlmClient(std::vector<std::string> responses) {
    for (auto& r : responses) script_.push_back(Entry{std::move(r)});
  }
  explicit ScriptedLlmClient(std::vector<Entry> script) {
    for (auto& e : script) script_.push_back(std::move(e));
  }

  std::string complete(const Prompt& prompt, const GenParams& params) override {
    seen_.push_back({prompt, params});
    if (script_.empty()) throw LlmError("scripted client exhausted its responses");
    Entry entry = std::move(script_.front());
    script_.pop_front();
    if (entry.fail_retryable) throw LlmRetryableError("scripted retryable failure");
    if (entry.fail_fatal) throw LlmError("scripted fatal failure");
    return entry.text;
  }

  const std::vector<std::pair<Prompt, GenParams>>& seen() const { return seen_; }
  std::size_t remaining() const { return script_.size(); }

 private:
  std::deque<Entry> script_;
  std::vector<std::pair<Prompt, GenParams>> seen_;
};

/// Answers from hidden gold labels: relabel prompts get probability 1 on gold
/// sentences and 0 elsewhere; score and judge prompts get the rounded percentage
/// ROUGE-2 F1 of the candidate summary against the gold summary.
class OracleLlmClient : public LlmClient {
 public:
  explicit OracleLlmClient(const Corpus& corpus) : corpus_(&corpus) {}

  std::string complete(const Prompt& prompt, const GenParams&) override {
    const Document& doc = corpus_->at(prompt.document_id);
    if (!doc.gold_labels)
      throw LlmError("oracle client: document '" + doc.id + "' has no gold labels");
    if (prompt.template_id == "relabel") {
      std::unordered_set<std::size_t> gold(doc.gold_labels->begin(), doc.gold_labels->end());
      std::string out;
      for (std::size_t i = 0; i < doc.sentences.size(); ++i)
        out += std::to_string(i + 1) + (gold.count(i) ? ": 1.0\n" : ": 0.0\n");
      return out;
    }
    if (prompt.template_id == "score" || prompt.template_id == "leval") {
      const auto cand_tokens = tokenize(prompt.summary);
      const auto gold_tokens = tokenize(summary_text(doc, *doc.gold_labels));
      const double r2 = rouge_n(cand_tokens, gold_tokens, 2).f1;
      return std::to_string(static_cast<int>(std::lround(100.0 * r2)));
    }
    throw LlmError("oracle client: unknown template '" + prompt.template_id + "'");
  }

 private:
  const Corpus* corpus_;
};

/// Pass-through wrapper that tallies calls per prompt template.
class CountingLlmClient : public LlmClient {
 public:
  explicit CountingLlmClient(LlmClient& inner) : inner_(&inner) {}

  std::string complete(const Prompt& prompt, const GenParams& params) override {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      ++counts_[prompt.template_id];
      ++total_;
    }
    return inner_->complete(prompt, params);
  }

  std::size_t count(const std::string& template_id) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = counts_.find(template_id);
    return it == counts_.end() ? 0 : it->second;
  }

  std::size_t total() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return total_;
  }

 private:
  LlmClient* inner_;
  mutable std::mutex mutex_;
  std::map<std::string, std::size_t> counts_;
  std::size_t total_ = 0;
};

}  // namespace selfsum
