#pragma once

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "selfsum/common.hpp"
#include "selfsum/corpus.hpp"
#include "selfsum/llm.hpp"
#include "selfsum/report.hpp"
#include "selfsum/rng.hpp"
#include "selfsum/rouge.hpp"
#include "selfsum/scoring.hpp"
#include "selfsum/teacher.hpp"

namespace selfsum {

enum class LlmMode { http, oracle };

struct LlmSettings {
  LlmMode mode = LlmMode::http;
  std::string base_url;
  std::string api_key;
  std::string model;
  std::string cache_path;
  std::size_t max_attempts = 3;
  std::size_t initial_backoff_ms = 100;
  std::size_t concurrency = 1;
};

struct RunConfig {
  Strategy strategy = Strategy::confidence_relabel_score;
  std::size_t labeled_count = 50;
  std::size_t shortlist_size = 50;
  std::size_t select_k = 5;
  std::size_t n_cycles = 50;
  std::size_t summary_len = 4;
  std::size_t unlabeled_sample_limit = 1000;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  TeacherHyperparams teacher;
  LlmSettings llm;

  void validate() const {
    if (n_cycles < 1) throw ConfigError("n_cycles must be >= 1");
    if (summary_len < 1) throw ConfigError("summary_len must be >= 1");
    if (labeled_count < 1) throw ConfigError("labeled_count must be >= 1");
    if (select_k < 1) throw ConfigError("select_k must be >= 1");
    if (select_k > shortlist_size) throw ConfigError("select_k must not exceed shortlist_size");
    if (unlabeled_sample_limit < 1) throw ConfigError("unlabeled_sample_limit must be >= 1");
    if (seeds.empty()) throw ConfigError("at least one seed is required");
    if (llm.max_attempts < 1) throw ConfigError("llm_max_attempts must be >= 1");
    if (llm.concurrency < 1) throw ConfigError("llm_concurrency must be >= 1");
  }
};

namespace detail {

inline std::size_t parse_count(const std::string& value, const std::string& key) {
  try {
    const long long v = std::stoll(value);
    if (v < 0) throw ConfigError(key + " must be non-negative");
    return static_cast<std::size_t>(v);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse " + key + " value '" + value + "'");
  }
}

}  // namespace detail

/// Plain-text config: one `key = value` per line, `#` comments.
inline RunConfig load_run_config(std::istream& in) {
  RunConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const std::size_t eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key == "strategy") {
      config.strategy = parse_strategy(value);
    } else if (key == "labeled_count") {
      config.labeled_count = detail::parse_count(value, key);
    } else if (key == "shortlist_size") {
      config.shortlist_size = detail::parse_count(value, key);
    } else if (key == "select_k") {
      config.select_k = detail::parse_count(value, key);
    } else if (key == "n_cycles") {
      config.n_cycles = detail::parse_count(value, key);
    } else if (key == "summary_len") {
      config.summary_len = detail::parse_count(value, key);
    } else if (key == "unlabeled_sample_limit") {
      config.unlabeled_sample_limit = detail::parse_count(value, key);
    } else if (key == "seeds") {
      config.seeds.clear();
      for (const auto& part : split(value, ','))
        config.seeds.push_back(detail::parse_count(trim(part), key));
    } else if (key == "learning_rate") {
      try {
        config.teacher.learning_rate = std::stod(value);
      } catch (const std::exception&) {
        throw ConfigError("cannot parse learning_rate value '" + value + "'");
      }
    } else if (key == "epochs") {
      config.teacher.epochs = detail::parse_count(value, key);
    } else if (key == "llm_mode") {
      if (value == "http")
        config.llm.mode = LlmMode::http;
      else if (value == "oracle")
        config.llm.mode = LlmMode::oracle;
      else
        throw ConfigError("unknown llm_mode '" + value + "' (valid: http | oracle)");
    } else if (key == "llm_base_url") {
      config.llm.base_url = value;
    } else if (key == "llm_api_key") {
      config.llm.api_key = value;
    } else if (key == "llm_model") {
      config.llm.model = value;
    } else if (key == "llm_cache") {
      config.llm.cache_path = value;
    } else if (key == "llm_max_attempts") {
      config.llm.max_attempts = detail::parse_count(value, key);
    } else if (key == "llm_initial_backoff_ms") {
      config.llm.initial_backoff_ms = detail::parse_count(value, key);
    } else if (key == "llm_concurrency") {
      config.llm.concurrency = detail::parse_count(value, key);
    } else {
      throw ConfigError("unknown config key '" + key + "' at line " + std::to_string(line_no));
    }
  }
  return config;
}

/// Environment beats both config file and flags.
inline void apply_env_overrides(RunConfig& config) {
  if (const char* v = std::getenv("SELFSUM_LLM_API_KEY")) config.llm.api_key = v;
  if (const char* v = std::getenv("SELFSUM_LLM_BASE_URL")) config.llm.base_url = v;
  if (const char* v = std::getenv("SELFSUM_LLM_MODEL")) config.llm.model = v;
}

inline void to_json(nlohmann::json& j, const PseudoLabel& p) {
  j = nlohmann::json{{"document_id", p.document_id},
                     {"probabilities", p.probabilities},
                     {"selected", p.selected},
                     {"provenance", to_string(p.provenance)}};
  if (p.teacher_conf) j["teacher_confidence"] = *p.teacher_conf;
  if (p.llm_score) j["llm_score"] = *p.llm_score;
}

inline void from_json(const nlohmann::json& j, PseudoLabel& p) {
  j.at("document_id").get_to(p.document_id);
  j.at("probabilities").get_to(p.probabilities);
  j.at("selected").get_to(p.selected);
  p.provenance = parse_provenance(j.at("provenance").get<std::string>());
  p.teacher_conf.reset();
  p.llm_score.reset();
  if (j.contains("teacher_confidence")) p.teacher_conf = j["teacher_confidence"].get<double>();
  if (j.contains("llm_score")) p.llm_score = j["llm_score"].get<int>();
}

struct CycleMetrics {
  std::size_t cycle = 0;
  std::size_t train_size = 0;
  double mean_r1 = std::numeric_limits<double>::quiet_NaN();
  double mean_r2 = std::numeric_limits<double>::quiet_NaN();
  double mean_rl = std::numeric_limits<double>::quiet_NaN();
  double mean_pseudo_r2 = std::numeric_limits<double>::quiet_NaN();
};

inline std::string metrics_header() {
  return "cycle,strategy,seed,train_size,mean_r1,mean_r2,mean_rl,mean_pseudo_r2_vs_gold";
}

inline std::string metrics_row(const CycleMetrics& m, Strategy strategy, std::uint64_t seed) {
  auto cell = [](double v) { return std::isnan(v) ? std::string("nan") : format_fixed(v, 6); };
  return std::to_string(m.cycle) + "," + to_string(strategy) + "," + std::to_string(seed) + "," +
         std::to_string(m.train_size) + "," + cell(m.mean_r1) + "," + cell(m.mean_r2) + "," +
         cell(m.mean_rl) + "," + cell(m.mean_pseudo_r2);
}

struct CycleState {
  std::size_t cycle = 0;  // completed cycles
  Pools pools;
  std::map<std::string, std::vector<std::size_t>> adopted;  // pseudo training labels
  std::vector<std::vector<PseudoLabel>> selections;         // one entry per completed cycle
  std::vector<std::string> metrics_rows;                    // verbatim csv data rows
  std::string rng_state;
  std::shared_ptr<LogisticTeacher> teacher;
  bool exhausted = false;
};

using TeacherFactory = std::function<std::shared_ptr<LogisticTeacher>()>;

struct PipelineHooks {
  TeacherFactory teacher_factory;
  LlmClient* llm = nullptr;
  ResponseCache* cache = nullptr;
  SleepFn sleep = default_sleep;
};

namespace detail {

inline void for_each_concurrent(std::size_t count, std::size_t workers,
                                const std::function<void(std::size_t)>& fn) {
  if (count == 0) return;
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

inline std::string llm_call(const PipelineHooks& hooks, const RunConfig& config,
                            const Prompt& prompt, const GenParams& params) {
  RetryPolicy policy;
  policy.max_attempts = config.llm.max_attempts;
  policy.initial_backoff = std::chrono::milliseconds(
      static_cast<std::int64_t>(config.llm.initial_backoff_ms));
  if (hooks.cache)
    return cached_complete(*hooks.llm, *hooks.cache, prompt, params, policy, hooks.sleep);
  return complete_with_retries(*hooks.llm, prompt, params, policy, hooks.sleep);
}

inline std::vector<LabeledExample> training_set(const CycleState& state, const Corpus& corpus) {
  std::vector<LabeledExample> labeled;
  labeled.reserve(state.pools.labeled.size());
  for (const auto& id : state.pools.labeled) {
    const Document& doc = corpus.at(id);
    LabeledExample ex;
    ex.document = &doc;
    auto it = state.adopted.find(id);
    if (it != state.adopted.end()) {
      ex.labels = it->second;  // pseudo labels shadow any gold the document carries
    } else if (doc.gold_labels) {
      ex.labels = *doc.gold_labels;
    } else {
      throw DataError("labeled document '" + id + "' has neither gold nor adopted labels");
    }
    labeled.push_back(std::move(ex));
  }
  return labeled;
}

}  // namespace detail

struct CycleOutcome {
  std::vector<PseudoLabel> adopted_now;
  CycleMetrics metrics;
  bool exhausted = false;
};

/// One train → pseudo-label → shortlist → relabel → score → select → adopt pass.
/// Mutates state.pools/state.adopted; the caller records history and metrics rows.
inline CycleOutcome run_cycle(CycleState& state, const RunConfig& config, TeacherModel& teacher,
                              const PipelineHooks& hooks, std::mt19937& rng, const Corpus& corpus,
                              std::span<const Document* const> test_docs) {
  if (!state.pools.disjoint()) throw DataError("run_cycle: pools are not disjoint");
  if (uses_relabel(config.strategy) || uses_score(config.strategy)) {
    if (!hooks.llm) throw ConfigError("strategy '" + to_string(config.strategy) +
                                      "' needs an LLM client, none configured");
  }

  CycleOutcome outcome;
  outcome.metrics.cycle = state.cycle + 1;

  // Stage 1: train on the current labeled pool.
  teacher.fit(detail::training_set(state, corpus));

  // Stage 2: pseudo-label a sample of the unlabeled pool, keep the most confident.
  const auto sampled =
      sample_unlabeled(state.pools, config.unlabeled_sample_limit, rng);
  std::vector<PseudoLabel> candidates(sampled.size());
  for (std::size_t i = 0; i < sampled.size(); ++i) {
    const Document& doc = corpus.at(sampled[i]);
    PseudoLabel label;
    label.document_id = doc.id;
    label.probabilities = teacher.predict_probs(doc);
    label.selected = extract_summary(label.probabilities, config.summary_len);
    label.teacher_conf = teacher_confidence(label.probabilities, label.selected);
    candidates[i] = std::move(label);
  }
  candidates = shortlist(std::move(candidates), config.shortlist_size);

  // Stage 3: LLM relabeling of the shortlist.
  if (uses_relabel(config.strategy)) {
    detail::for_each_concurrent(candidates.size(), config.llm.concurrency, [&](std::size_t i) {
      PseudoLabel& label = candidates[i];
      const Document& doc = corpus.at(label.document_id);
      const Prompt prompt = build_relabel_prompt(doc, config.summary_len);
      const std::string response = detail::llm_call(hooks, config, prompt, GenParams{});
      try {
        label.selected = parse_relabel_response(response, doc.sentences.size(), config.summary_len);
        label.provenance = Provenance::llm_relabel;
        label.teacher_conf = teacher_confidence(label.probabilities, label.selected);
      } catch (const LlmParseError& e) {
        // keep the teacher's pseudo-label
        std::cerr << "relabel parse failure for document '" << label.document_id
                  << "': " << e.what() << "\n";
      }
    });
  }

  // Stage 4: LLM scoring.
  if (uses_score(config.strategy)) {
    detail::for_each_concurrent(candidates.size(), config.llm.concurrency, [&](std::size_t i) {
      PseudoLabel& label = candidates[i];
      const Document& doc = corpus.at(label.document_id);
      const std::string summary = summary_text(doc, label.selected);
      const Prompt prompt = build_score_prompt(doc, summary, config.summary_len);
      const std::string response = detail::llm_call(hooks, config, prompt, GenParams{});
      try {
        label.llm_score = parse_rating(response);
      } catch (const LlmParseError& e) {
        label.llm_score = 0;  // scoreless candidates sink to the bottom
        std::cerr << "score parse failure for document '" << label.document_id
                  << "': " << e.what() << "\n";
      }
    });
  }

  // Select and adopt.
  std::vector<PseudoLabel> chosen;
  switch (config.strategy) {
    case Strategy::random:
      chosen = select_random(candidates, config.select_k, rng);
      break;
    case Strategy::confidence:
    case Strategy::confidence_relabel:
      chosen = shortlist(candidates, config.select_k);
      break;
    case Strategy::confidence_score:
    case Strategy::confidence_relabel_score:
      chosen = select_top_by_score(candidates, config.select_k);
      break;
    case Strategy::oracle:
      chosen = oracle_select(candidates, corpus, config.select_k);
      break;
  }
  for (const auto& label : chosen) {
    state.pools.move_to_labeled(label.document_id);
    state.adopted[label.document_id] = label.selected;
  }
  outcome.adopted_now = std::move(chosen);
  outcome.exhausted = state.pools.unlabeled.empty();

  // Metrics for this cycle: test-set quality of the freshly trained teacher plus
  // gold-side quality of the adopted pseudo-labels.
  outcome.metrics.train_size = state.pools.labeled.size();
  if (!test_docs.empty()) {
    const TestEval eval = evaluate_test(teacher, test_docs, config.summary_len);
    outcome.metrics.mean_r1 = eval.r1.mean;
    outcome.metrics.mean_r2 = eval.r2.mean;
    outcome.metrics.mean_rl = eval.rl.mean;
  }
  const bool gold_complete = [&] {
    if (outcome.adopted_now.empty()) return false;
    for (const auto& label : outcome.adopted_now)
      if (!corpus.at(label.document_id).gold_labels) return false;
    return true;
  }();
  if (gold_complete) {
    double sum = 0.0;
    for (const auto& label : outcome.adopted_now) sum += oracle_r2(label, corpus);
    outcome.metrics.mean_pseudo_r2 = sum / static_cast<double>(outcome.adopted_now.size());
  }
  return outcome;
}

// ---- Checkpointing ---------------------------------------------------------

inline constexpr const char* kCheckpointVersion = "selfsum-checkpoint-v1";

inline void checkpoint_save(const CycleState& state, const RunConfig& config, std::uint64_t seed,
                            const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  nlohmann::json pools;
  pools["labeled"] = state.pools.labeled;
  pools["unlabeled"] = state.pools.unlabeled;
  pools["adopted"] = state.adopted;
  pools["selections"] = state.selections;
  pools["exhausted"] = state.exhausted;
  write_file(dir + "/pools", pools.dump() + "\n");

  if (state.teacher && state.teacher->trained())
    state.teacher->save(dir + "/teacher.weights");
  else
    write_file(dir + "/teacher.weights", "selfsum-teacher-none\n");

  std::string metrics = metrics_header() + "\n";
  for (const auto& row : state.metrics_rows) metrics += row + "\n";
  write_file(dir + "/metrics.csv", metrics);

  write_file(dir + "/rng", state.rng_state + "\n");

  std::string manifest = std::string(kCheckpointVersion) + "\n";
  manifest += "cycle " + std::to_string(state.cycle) + "\n";
  manifest += "strategy " + to_string(config.strategy) + "\n";
  manifest += "seed " + std::to_string(seed) + "\n";
  for (const char* name : {"pools", "teacher.weights", "metrics.csv", "rng"})
    manifest += std::string("file ") + name + " " + sha256_hex(read_file(dir + "/" + name)) + "\n";
  write_file(dir + "/manifest", manifest);
}

inline bool checkpoint_exists(const std::string& dir) {
  return std::filesystem::exists(std::filesystem::path(dir) / "manifest");
}

inline CycleState checkpoint_load(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!checkpoint_exists(dir))
    throw CheckpointError("no checkpoint found in '" + dir + "'");
  const std::string manifest = read_file(dir + "/manifest");
  const auto lines = split(manifest, '\n');
  if (lines.empty() || trim(lines[0]) != kCheckpointVersion)
    throw CheckpointError("checkpoint version mismatch in '" + dir + "'");

  CycleState state;
  for (const auto& raw : lines) {
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto parts = split(line, ' ');
    if (parts[0] == "cycle" && parts.size() == 2) {
      state.cycle = static_cast<std::size_t>(std::stoull(parts[1]));
    } else if (parts[0] == "file" && parts.size() == 3) {
      const std::string path = dir + "/" + parts[1];
      if (!fs::exists(path)) throw CheckpointError("checkpoint file missing: " + path);
      if (sha256_hex(read_file(path)) != parts[2])
        throw CheckpointError("checkpoint integrity check failed for " + path);
    }
  }

  nlohmann::json pools;
  try {
    pools = nlohmann::json::parse(read_file(dir + "/pools"));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt pools file: ") + e.what());
  }
  try {
    pools.at("labeled").get_to(state.pools.labeled);
    pools.at("unlabeled").get_to(state.pools.unlabeled);
    pools.at("adopted").get_to(state.adopted);
    pools.at("selections").get_to(state.selections);
    state.exhausted = pools.value("exhausted", false);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(std::string("corrupt pools file: ") + e.what());
  }

  const std::string weights = read_file(dir + "/teacher.weights");
  if (trim(weights) != "selfsum-teacher-none") {
    state.teacher = std::make_shared<LogisticTeacher>();
    state.teacher->load(dir + "/teacher.weights");
  }

  const auto metric_lines = split(read_file(dir + "/metrics.csv"), '\n');
  if (metric_lines.empty() || trim(metric_lines[0]) != metrics_header())
    throw CheckpointError("checkpoint metrics.csv has an unexpected header");
  for (std::size_t i = 1; i < metric_lines.size(); ++i)
    if (!trim(metric_lines[i]).empty()) state.metrics_rows.push_back(metric_lines[i]);

  state.rng_state = trim(read_file(dir + "/rng"));
  if (state.rng_state.empty()) throw CheckpointError("checkpoint rng state is empty");
  return state;
}

// ---- Full runs -------------------------------------------------------------

struct PipelineResult {
  std::uint64_t seed = 0;
  std::vector<std::string> metrics_rows;
  std::vector<std::vector<PseudoLabel>> selections;
  Pools pools;
  std::shared_ptr<LogisticTeacher> teacher;
  bool exhausted = false;
};

/// Runs n_cycles cycles (or to pool exhaustion) for one seed, checkpointing after
/// every cycle when checkpoint_dir is set; resume continues a saved run.
inline PipelineResult run_pipeline(const RunConfig& config, const Corpus& corpus,
                                   std::span<const Document* const> test_docs, std::uint64_t seed,
                                   const PipelineHooks& hooks,
                                   const std::string& checkpoint_dir = "", bool resume = false) {
  config.validate();
  TeacherFactory factory = hooks.teacher_factory;
  if (!factory)
    factory = [&config] { return std::make_shared<LogisticTeacher>(config.teacher); };

  CycleState state;
  std::mt19937 rng;
  if (resume && !checkpoint_dir.empty() && checkpoint_exists(checkpoint_dir)) {
    state = checkpoint_load(checkpoint_dir);
    rng = load_rng_state(state.rng_state);
  } else {
    state.pools = split_pools(corpus, config.labeled_count, seed);
    rng.seed(static_cast<std::uint32_t>(seed));
    state.rng_state = save_rng_state(rng);
  }

  while (state.cycle < config.n_cycles && !state.exhausted && !state.pools.unlabeled.empty()) {
    auto teacher = factory();
    CycleOutcome outcome;
    try {
      outcome = run_cycle(state, config, *teacher, hooks, rng, corpus, test_docs);
    } catch (const LlmError& e) {
      if (!checkpoint_dir.empty() && checkpoint_exists(checkpoint_dir))
        throw LlmError(std::string(e.what()) + " (cycle " + std::to_string(state.cycle + 1) +
                       "; resume from checkpoint '" + checkpoint_dir + "')");
      throw;
    }
    state.cycle += 1;
    state.teacher = teacher;
    state.selections.push_back(outcome.adopted_now);
    state.metrics_rows.push_back(metrics_row(outcome.metrics, config.strategy, seed));
    state.exhausted = outcome.exhausted;
    state.rng_state = save_rng_state(rng);
    if (!checkpoint_dir.empty()) checkpoint_save(state, config, seed, checkpoint_dir);
  }

  PipelineResult result;
  result.seed = seed;
  result.metrics_rows = state.metrics_rows;
  result.selections = state.selections;
  result.pools = state.pools;
  result.teacher = state.teacher;
  result.exhausted = state.exhausted;
  return result;
}

/// One run per configured seed; per-seed checkpoints live in `<dir>/seed_<s>`.
inline std::vector<PipelineResult> run_seeds(const RunConfig& config, const Corpus& corpus,
                                             std::span<const Document* const> test_docs,
                                             const PipelineHooks& hooks,
                                             const std::string& checkpoint_root = "",
                                             bool resume = false) {
  std::vector<PipelineResult> results;
  for (std::uint64_t seed : config.seeds) {
    const std::string dir =
        checkpoint_root.empty() ? "" : checkpoint_root + "/seed_" + std::to_string(seed);
    results.push_back(run_pipeline(config, corpus, test_docs, seed, hooks, dir, resume));
  }
  return results;
}

/// Full metrics.csv content for a set of per-seed runs.
inline std::string metrics_csv(const std::vector<PipelineResult>& results) {
  std::string out = metrics_header() + "\n";
  for (const auto& r : results)
    for (const auto& row : r.metrics_rows) out += row + "\n";
  return out;
}

struct ParsedMetricsRow {
  std::size_t cycle = 0;
  std::string strategy;
  std::uint64_t seed = 0;
  std::size_t train_size = 0;
  double mean_r1 = std::numeric_limits<double>::quiet_NaN();
  double mean_r2 = std::numeric_limits<double>::quiet_NaN();
  double mean_rl = std::numeric_limits<double>::quiet_NaN();
  double mean_pseudo_r2 = std::numeric_limits<double>::quiet_NaN();
};

inline std::vector<ParsedMetricsRow> parse_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != metrics_header())
    throw DataError("metrics csv: missing or unexpected header");
  std::vector<ParsedMetricsRow> rows;
  std::size_t line_no = 1;
  auto cell = [](const std::string& s) {
    return s == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(s);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto parts = split(trim(line), ',');
    if (parts.size() != 8) throw DataError("metrics csv: expected 8 columns", line_no);
    ParsedMetricsRow row;
    try {
      row.cycle = static_cast<std::size_t>(std::stoull(parts[0]));
      row.strategy = parts[1];
      row.seed = std::stoull(parts[2]);
      row.train_size = static_cast<std::size_t>(std::stoull(parts[3]));
      row.mean_r1 = cell(parts[4]);
      row.mean_r2 = cell(parts[5]);
      row.mean_rl = cell(parts[6]);
      row.mean_pseudo_r2 = cell(parts[7]);
    } catch (const std::exception& e) {
      throw DataError(std::string("metrics csv: ") + e.what(), line_no);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace selfsum
