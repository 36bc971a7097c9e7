#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "selfsum/common.hpp"
#include "selfsum/corpus.hpp"
#include "selfsum/llm.hpp"
#include "selfsum/pipeline.hpp"
#include "selfsum/report.hpp"
#include "selfsum/rouge.hpp"
#include "selfsum/scoring.hpp"
#include "selfsum/teacher.hpp"

namespace fs = std::filesystem;
using namespace selfsum;

namespace {

Corpus read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  return parse_dataset(in);
}

/// Writes to the named file, or to standard out when path is empty.
void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  write_file(path, content);
}

int cmd_ingest(const std::string& input, const std::string& output) {
  const Corpus corpus = read_corpus(input);
  std::ostringstream out;
  write_dataset(corpus, out);
  write_output(output, out.str());
  std::cerr << "ingested " << corpus.size() << " documents\n";
  return 0;
}

int cmd_label(const std::string& input, const std::string& output, std::size_t max_k) {
  const Corpus corpus = read_corpus(input);
  Corpus labeled;
  std::size_t added = 0;
  for (const auto& doc : corpus.docs()) {
    Document copy = doc;
    if (!copy.gold_labels && copy.abstract && !trim(*copy.abstract).empty()) {
      copy.gold_labels = greedy_extractive_labels(copy.sentences, *copy.abstract, max_k);
      ++added;
    }
    labeled.add(std::move(copy));
  }
  std::ostringstream out;
  write_dataset(labeled, out);
  write_output(output, out.str());
  std::cerr << "labeled " << added << " of " << corpus.size() << " documents\n";
  return 0;
}

int cmd_split(const std::string& input, std::size_t labeled_count, std::uint64_t seed,
              const std::string& output_dir) {
  const Corpus corpus = read_corpus(input);
  const Pools pools = split_pools(corpus, labeled_count, seed);
  fs::create_directories(output_dir);
  Corpus labeled, unlabeled;
  for (const auto& id : pools.labeled) labeled.add(corpus.at(id));
  for (const auto& id : pools.unlabeled) unlabeled.add(corpus.at(id));
  std::ostringstream l, u;
  write_dataset(labeled, l);
  write_dataset(unlabeled, u);
  write_file(output_dir + "/labeled.jsonl", l.str());
  write_file(output_dir + "/unlabeled.jsonl", u.str());
  std::cerr << "split " << corpus.size() << " documents into " << pools.labeled.size()
            << " labeled / " << pools.unlabeled.size() << " unlabeled\n";
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& data_path,
            const std::string& test_path, const std::string& strategy_flag,
            const std::vector<std::uint64_t>& seed_flags, const std::string& output_dir,
            bool resume) {
  std::ifstream config_in(config_path);
  if (!config_in) throw ConfigError("cannot open config file: " + config_path);
  RunConfig config = load_run_config(config_in);
  if (!strategy_flag.empty()) config.strategy = parse_strategy(strategy_flag);
  if (!seed_flags.empty()) config.seeds = seed_flags;
  apply_env_overrides(config);
  config.validate();

  const Corpus corpus = read_corpus(data_path);
  Corpus test_corpus;
  std::vector<const Document*> test_docs;
  if (!test_path.empty()) {
    test_corpus = read_corpus(test_path);
    for (const auto& doc : test_corpus.docs()) test_docs.push_back(&doc);
  }

  fs::create_directories(output_dir);
  PipelineHooks hooks;
  std::unique_ptr<LlmClient> client;
  std::unique_ptr<ResponseCache> cache;
  if (uses_relabel(config.strategy) || uses_score(config.strategy)) {
    if (config.llm.mode == LlmMode::oracle) {
      client = std::make_unique<OracleLlmClient>(corpus);
    } else {
      HttpEndpoint endpoint;
      endpoint.base_url = config.llm.base_url;
      endpoint.api_key = config.llm.api_key;
      endpoint.model = config.llm.model;
      client = std::make_unique<HttpLlmClient>(endpoint);
    }
    const std::string cache_path = config.llm.cache_path.empty()
                                       ? output_dir + "/llm_cache.jsonl"
                                       : config.llm.cache_path;
    cache = std::make_unique<ResponseCache>(cache_path);
    hooks.llm = client.get();
    hooks.cache = cache.get();
  }

  const auto results =
      run_seeds(config, corpus, test_docs, hooks, output_dir + "/checkpoints", resume);
  write_file(output_dir + "/metrics.csv", metrics_csv(results));
  std::cerr << "wrote " << output_dir << "/metrics.csv\n";
  return 0;
}

int cmd_eval(const std::string& metric_name, const std::string& predictions_path,
             const std::string& references_path, const std::string& output) {
  const Metric metric = parse_metric(metric_name);
  const Corpus predictions = read_corpus(predictions_path);
  const Corpus references = read_corpus(references_path);
  if (predictions.size() != references.size())
    throw DataError("prediction/reference count mismatch: " + std::to_string(predictions.size()) +
                    " predictions vs " + std::to_string(references.size()) + " references");

  std::ostringstream out;
  out << "id,metric,precision,recall,f1\n";
  double sp = 0.0, sr = 0.0, sf = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const Document& pred = predictions.docs()[i];
    const Document& ref = references.docs()[i];
    const auto cand_tokens = tokenize(join(pred.sentences, " "));
    std::vector<std::string> refs = reference_texts(ref);
    if (refs.empty()) refs.push_back(join(ref.sentences, " "));
    std::vector<std::vector<std::string>> ref_tokens;
    for (const auto& r : refs) ref_tokens.push_back(tokenize(r));
    const RougeScore score = rouge_multi(cand_tokens, ref_tokens, metric);
    out << pred.id << ',' << metric_name << ',' << format_double(score.precision) << ','
        << format_double(score.recall) << ',' << format_double(score.f1) << '\n';
    sp += score.precision;
    sr += score.recall;
    sf += score.f1;
  }
  const double n = static_cast<double>(predictions.size());
  if (predictions.size() > 0)
    out << "mean," << metric_name << ',' << format_double(sp / n) << ',' << format_double(sr / n)
        << ',' << format_double(sf / n) << '\n';
  write_output(output, out.str());
  return 0;
}

int cmd_report(const std::string& input, const std::string& format_name,
               const std::string& output) {
  const ReportFormat format = parse_report_format(format_name);
  std::ifstream in(input);
  if (!in) throw DataError("cannot open metrics file: " + input);
  const auto parsed = parse_metrics_csv(in);
  std::vector<MetricRow> rows;
  for (const auto& p : parsed) {
    const std::pair<const char*, double> cells[] = {{"mean_r1", p.mean_r1},
                                                    {"mean_r2", p.mean_r2},
                                                    {"mean_rl", p.mean_rl},
                                                    {"mean_pseudo_r2_vs_gold", p.mean_pseudo_r2}};
    for (const auto& [name, value] : cells) {
      MetricRow row;
      row.run_id = p.strategy;
      row.seed = p.seed;
      row.cycle = p.cycle;
      row.metric = name;
      row.mean = value;
      rows.push_back(std::move(row));
    }
  }
  std::ostringstream out;
  emit_report(rows, format, out);
  write_output(output, out.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semi-supervised extractive summarization workflow"};
  app.require_subcommand(1);
  std::function<int()> action;

  auto* ingest = app.add_subcommand("ingest", "normalize a dataset into canonical record form");
  {
    auto input = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    ingest->add_option("--input", *input, "dataset file")->required();
    ingest->add_option("--output", *output, "output file (default: stdout)");
    ingest->callback([=, &action] { action = [=] { return cmd_ingest(*input, *output); }; });
  }

  auto* label = app.add_subcommand("label", "derive extractive gold labels from abstracts");
  {
    auto input = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    auto max_k = std::make_shared<std::size_t>(4);
    label->add_option("--input", *input, "dataset file")->required();
    label->add_option("--output", *output, "output file (default: stdout)");
    label->add_option("--max-k", *max_k, "maximum sentences per summary label");
    label->callback([=, &action] { action = [=] { return cmd_label(*input, *output, *max_k); }; });
  }

  auto* split = app.add_subcommand("split", "split a dataset into labeled/unlabeled pools");
  {
    auto input = std::make_shared<std::string>();
    auto labeled_count = std::make_shared<std::size_t>(0);
    auto seed = std::make_shared<std::uint64_t>(1);
    auto output_dir = std::make_shared<std::string>();
    split->add_option("--input", *input, "dataset file")->required();
    split->add_option("--labeled-count", *labeled_count, "labeled pool size")->required();
    split->add_option("--seed", *seed, "split seed");
    split->add_option("--output-dir", *output_dir, "output directory")->required();
    split->callback([=, &action] {
      action = [=] { return cmd_split(*input, *labeled_count, *seed, *output_dir); };
    });
  }

  auto* run = app.add_subcommand("run", "run self-training cycles");
  {
    auto config = std::make_shared<std::string>();
    auto data = std::make_shared<std::string>();
    auto test = std::make_shared<std::string>();
    auto strategy = std::make_shared<std::string>();
    auto seeds = std::make_shared<std::vector<std::uint64_t>>();
    auto output_dir = std::make_shared<std::string>("run_out");
    auto resume = std::make_shared<bool>(false);
    run->add_option("--config", *config, "run config file")->required();
    run->add_option("--data", *data, "training + unlabeled dataset file")->required();
    run->add_option("--test", *test, "held-out test dataset file");
    run->add_option("--strategy", *strategy, "selection strategy (overrides config)");
    run->add_option("--seed", *seeds, "seed (repeatable; overrides config)");
    run->add_option("--output-dir", *output_dir, "output directory");
    run->add_flag("--resume", *resume, "resume from existing checkpoints");
    run->callback([=, &action] {
      action = [=] {
        return cmd_run(*config, *data, *test, *strategy, *seeds, *output_dir, *resume);
      };
    });
  }

  auto* eval = app.add_subcommand("eval", "score predictions against references");
  {
    auto metric = std::make_shared<std::string>();
    auto predictions = std::make_shared<std::string>();
    auto references = std::make_shared<std::string>();
    auto output = std::make_shared<std::string>();
    eval->add_option("--metric", *metric, "r1 | r2 | rl")->required();
    eval->add_option("--predictions", *predictions, "prediction dataset file")->required();
    eval->add_option("--references", *references, "reference dataset file")->required();
    eval->add_option("--output", *output, "output file (default: stdout)");
    eval->callback([=, &action] {
      action = [=] { return cmd_eval(*metric, *predictions, *references, *output); };
    });
  }

  auto* report = app.add_subcommand("report", "reshape run metrics for plotting");
  {
    auto input = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>("csv");
    auto output = std::make_shared<std::string>();
    report->add_option("--input", *input, "metrics.csv from a run")->required();
    report->add_option("--format", *format, "csv | long");
    report->add_option("--output", *output, "output file (default: stdout)");
    report->callback([=, &action] {
      action = [=] { return cmd_report(*input, *format, *output); };
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    return action();
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return 2;
  }
}
