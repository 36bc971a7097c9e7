#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "selfsum/common.hpp"
#include "selfsum/corpus.hpp"
#include "selfsum/llm.hpp"
#include "selfsum/rouge.hpp"
#include "selfsum/scoring.hpp"
#include "selfsum/teacher.hpp"

namespace selfsum {

struct MetricRow {
  std::string run_id;  // strategy name for pipeline runs
  std::uint64_t seed = 0;
  std::size_t cycle = 0;
  std::string metric;
  double mean = 0.0;
  double stddev = 0.0;

  bool operator==(const MetricRow&) const = default;
};

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

inline MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean_std: no values");
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size()))};
}

struct DocScores {
  std::string id;
  double r1 = 0.0;
  double r2 = 0.0;
  double rl = 0.0;
};

struct TestEval {
  std::vector<DocScores> per_doc;
  MeanStd r1, r2, rl;
};

/// Summarizes every test document with the teacher and scores against its
/// references (max F1 over multiple references).
inline TestEval evaluate_test(const TeacherModel& teacher,
                              std::span<const Document* const> test_docs,
                              std::size_t summary_len) {
  if (!teacher.trained()) throw Error("evaluate_test: teacher not trained");
  if (test_docs.empty()) throw std::invalid_argument("evaluate_test: empty test set");
  TestEval eval;
  std::vector<double> r1s, r2s, rls;
  for (const Document* doc : test_docs) {
    const auto refs = reference_texts(*doc);
    if (refs.empty())
      throw DataError("evaluate_test: document '" + doc->id + "' has no reference summary");
    const auto probs = teacher.predict_probs(*doc);
    const auto selected = extract_summary(probs, summary_len);
    const auto cand_tokens = tokenize(summary_text(*doc, selected));
    std::vector<std::vector<std::string>> ref_tokens;
    ref_tokens.reserve(refs.size());
    for (const auto& r : refs) ref_tokens.push_back(tokenize(r));
    DocScores row;
    row.id = doc->id;
    row.r1 = rouge_multi(cand_tokens, ref_tokens, Metric::rouge1).f1;
    row.r2 = rouge_multi(cand_tokens, ref_tokens, Metric::rouge2).f1;
    row.rl = rouge_multi(cand_tokens, ref_tokens, Metric::rougeL).f1;
    r1s.push_back(row.r1);
    r2s.push_back(row.r2);
    rls.push_back(row.rl);
    eval.per_doc.push_back(std::move(row));
  }
  eval.r1 = mean_std(r1s);
  eval.r2 = mean_std(r2s);
  eval.rl = mean_std(rls);
  return eval;
}

struct LevalResult {
  double mean = 0.0;
  std::size_t scored = 0;
  std::size_t parse_failures = 0;
};

/// Reference-free judge scores for (document, summary) pairs; pairs whose response
/// fails to parse are excluded from the mean and counted.
inline LevalResult leval_evaluate(LlmClient& client,
                                  const std::vector<std::pair<const Document*, std::string>>& pairs,
                                  const GenParams& params = GenParams{}) {
  if (pairs.empty()) throw std::invalid_argument("leval_evaluate: no pairs");
  LevalResult result;
  double sum = 0.0;
  for (const auto& [doc, summary] : pairs) {
    const Prompt prompt = build_leval_prompt(*doc, summary);
    const std::string response = client.complete(prompt, params);
    try {
      sum += static_cast<double>(parse_rating(response));
      ++result.scored;
    } catch (const LlmParseError&) {
      ++result.parse_failures;
    }
  }
  if (result.scored == 0) throw LlmParseError("leval_evaluate: every response failed to parse");
  result.mean = sum / static_cast<double>(result.scored);
  return result;
}

/// Per-cycle mean ROUGE-2 F1 of the adopted pseudo-summaries against gold.
inline std::vector<double> pseudo_quality_per_cycle(
    const std::vector<std::vector<PseudoLabel>>& selections_per_cycle, const Corpus& corpus) {
  std::vector<double> out;
  out.reserve(selections_per_cycle.size());
  for (const auto& selections : selections_per_cycle) {
    if (selections.empty()) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    double sum = 0.0;
    for (const auto& label : selections) sum += oracle_r2(label, corpus);
    out.push_back(sum / static_cast<double>(selections.size()));
  }
  return out;
}

namespace detail {

/// Lanczos approximation, g = 7, n = 9.
inline double log_gamma(double x) {
  static const double coeffs[9] = {0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
                                   771.32342877765313,   -176.61502916214059, 12.507343278686905,
                                   -0.13857109526572012, 9.9843695780195716e-6,
                                   1.5056327351493116e-7};
  if (x < 0.5) {
    // reflection: Γ(x)Γ(1−x) = π / sin(πx)
    return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
  }
  x -= 1.0;
  double a = coeffs[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += coeffs[i] / (x + static_cast<double>(i));
  return 0.5 * std::log(2.0 * M_PI) + (x + 0.5) * std::log(t) - t + std::log(a);
}

/// Continued fraction for the incomplete beta function (Lentz's method).
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-14;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  throw Error("betacf: continued fraction failed to converge");
}

/// Regularized incomplete beta function I_x(a, b).
inline double reg_incomplete_beta(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) throw std::invalid_argument("reg_incomplete_beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_bt = log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) +
                        b * std::log(1.0 - x);
  const double bt = std::exp(log_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

struct WelchResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;  // two-sided
};

inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw std::invalid_argument("welch_t_test: each side needs >= 2 samples");
  const auto stats = [](std::span<const double> v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    const double mean = sum / static_cast<double>(v.size());
    double sq = 0.0;
    for (double x : v) sq += (x - mean) * (x - mean);
    const double var = sq / static_cast<double>(v.size() - 1);  // sample variance
    return std::pair<double, double>{mean, var};
  };
  const auto [mean_a, var_a] = stats(a);
  const auto [mean_b, var_b] = stats(b);
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double se_a = var_a / na;
  const double se_b = var_b / nb;
  if (se_a + se_b == 0.0)
    throw std::invalid_argument("welch_t_test: zero variance on both sides");
  WelchResult result;
  result.t = (mean_a - mean_b) / std::sqrt(se_a + se_b);
  result.df = (se_a + se_b) * (se_a + se_b) /
              (se_a * se_a / (na - 1.0) + se_b * se_b / (nb - 1.0));
  const double x = result.df / (result.df + result.t * result.t);
  result.p = detail::reg_incomplete_beta(result.df / 2.0, 0.5, x);
  return result;
}

enum class ReportFormat { csv, long_form };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "csv") return ReportFormat::csv;
  if (s == "long") return ReportFormat::long_form;
  throw ConfigError("unknown report format '" + std::string(s) + "' (valid: csv | long)");
}

/// csv: full rows. long: plot-ready points, one value column per row.
inline void emit_report(const std::vector<MetricRow>& rows, ReportFormat format,
                        std::ostream& out) {
  if (rows.empty()) throw std::invalid_argument("emit_report: no rows");
  if (format == ReportFormat::csv) {
    out << "run_id,seed,cycle,metric,mean,std\n";
    for (const auto& r : rows)
      out << r.run_id << ',' << r.seed << ',' << r.cycle << ',' << r.metric << ','
          << format_double(r.mean) << ',' << format_double(r.stddev) << '\n';
  } else {
    out << "cycle,strategy,seed,metric,value\n";
    for (const auto& r : rows)
      out << r.cycle << ',' << r.run_id << ',' << r.seed << ',' << r.metric << ','
          << format_double(r.mean) << '\n';
  }
  if (!out) throw Error("emit_report: write failed");
}

/// Inverse of emit_report's csv format.
inline std::vector<MetricRow> parse_metric_rows(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "run_id,seed,cycle,metric,mean,std")
    throw DataError("metric csv: missing or unexpected header");
  std::vector<MetricRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto parts = split(line, ',');
    if (parts.size() != 6) throw DataError("metric csv: expected 6 columns", line_no);
    MetricRow row;
    row.run_id = parts[0];
    try {
      row.seed = std::stoull(parts[1]);
      row.cycle = std::stoull(parts[2]);
      row.metric = parts[3];
      row.mean = std::stod(parts[4]);
      row.stddev = std::stod(parts[5]);
    } catch (const std::exception& e) {
      throw DataError(std::string("metric csv: ") + e.what(), line_no);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace selfsum
