#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "selfsum/rng.hpp"
#include "selfsum/rouge.hpp"

using namespace selfsum;

namespace {

bool close(double a, double b, double tol = 1e-9) { return std::fabs(a - b) <= tol; }

bool same_score(const RougeScore& got, const oracle::Prf& want, double tol = 1e-9) {
  return close(got.precision, want.precision, tol) && close(got.recall, want.recall, tol) &&
         close(got.f1, want.f1, tol);
}

std::vector<std::string> random_tokens(std::mt19937& rng, std::size_t max_len) {
  static const std::vector<std::string> vocab = {"aa", "bb", "cc", "dd", "ee", "ff"};
  const std::size_t len = uniform_below(rng, static_cast<std::uint32_t>(max_len + 1));
  std::vector<std::string> out;
  out.reserve(len);
  for (std::size_t i = 0; i < len; ++i)
    out.push_back(vocab[uniform_below(rng, static_cast<std::uint32_t>(vocab.size()))]);
  return out;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on non-alphanumeric runs") {
  CHECK(tokenize("The cat, sat!") == std::vector<std::string>{"the", "cat", "sat"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("A1-b2") == std::vector<std::string>{"a1", "b2"});
  CHECK(tokenize("  \t\n ") == std::vector<std::string>{});
  CHECK(tokenize("don't stop") == std::vector<std::string>{"don", "t", "stop"});
}

TEST_CASE("tokenize agrees with the brute tokenizer on random ASCII") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const std::size_t len = uniform_below(rng, 40);
    for (std::size_t i = 0; i < len; ++i)
      text.push_back(static_cast<char>(32 + uniform_below(rng, 95)));
    CHECK(tokenize(text) == oracle::tokenize_brute(text));
  }
}

TEST_CASE("rouge_n on hand-checked pairs") {
  const std::vector<std::string> cat_sat = tokenize("the cat sat");
  const std::vector<std::string> cat_ran = tokenize("the cat ran");

  SECTION("identical texts score 1 everywhere") {
    for (std::size_t n = 1; n <= 3; ++n) {
      const RougeScore s = rouge_n(cat_sat, cat_sat, n);
      CHECK(close(s.precision, 1.0));
      CHECK(close(s.recall, 1.0));
      CHECK(close(s.f1, 1.0));
    }
  }
  SECTION("one substitution") {
    const RougeScore r1 = rouge_n(cat_sat, cat_ran, 1);
    CHECK(close(r1.precision, 2.0 / 3.0));
    CHECK(close(r1.recall, 2.0 / 3.0));
    CHECK(close(r1.f1, 2.0 / 3.0));
    const RougeScore r2 = rouge_n(cat_sat, cat_ran, 2);
    CHECK(close(r2.precision, 0.5));
    CHECK(close(r2.recall, 0.5));
    CHECK(close(r2.f1, 0.5));
  }
  SECTION("disjoint vocabularies score 0") {
    const auto other = tokenize("dogs bark loudly");
    const RougeScore s = rouge_n(cat_sat, other, 1);
    CHECK(s.precision == 0.0);
    CHECK(s.recall == 0.0);
    CHECK(s.f1 == 0.0);
  }
  SECTION("repeated candidate tokens are clipped by the reference count") {
    const std::vector<std::string> aaa = {"a", "a", "a"};
    const std::vector<std::string> a = {"a"};
    const RougeScore s = rouge_n(aaa, a, 1);
    CHECK(close(s.precision, 1.0 / 3.0));
    CHECK(close(s.recall, 1.0));
    CHECK(close(s.f1, 0.5));
  }
  SECTION("n longer than both sides yields zeros, not an error") {
    const RougeScore s = rouge_n(cat_sat, cat_ran, 7);
    CHECK(s.precision == 0.0);
    CHECK(s.recall == 0.0);
    CHECK(s.f1 == 0.0);
  }
  SECTION("n = 0 is rejected") {
    CHECK_THROWS_AS(rouge_n(cat_sat, cat_ran, 0), std::invalid_argument);
  }
}

TEST_CASE("rouge_l on hand-checked pairs") {
  SECTION("identity") {
    const auto toks = tokenize("one two three");
    const RougeScore s = rouge_l(toks, toks);
    CHECK(close(s.f1, 1.0));
  }
  SECTION("subsequence skips a token") {
    const std::vector<std::string> cand = {"a", "b", "c"};
    const std::vector<std::string> ref = {"a", "c"};
    const RougeScore s = rouge_l(cand, ref);
    CHECK(close(s.precision, 2.0 / 3.0));
    CHECK(close(s.recall, 1.0));
    CHECK(close(s.f1, 0.8));
  }
  SECTION("either side empty scores 0") {
    const std::vector<std::string> empty;
    const std::vector<std::string> some = {"a"};
    CHECK(rouge_l(empty, some).f1 == 0.0);
    CHECK(rouge_l(some, empty).f1 == 0.0);
    CHECK(rouge_l(empty, empty).f1 == 0.0);
  }
}

TEST_CASE("swapping candidate and reference swaps precision and recall") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = random_tokens(rng, 9);
    const auto b = random_tokens(rng, 9);
    for (std::size_t n = 1; n <= 2; ++n) {
      const RougeScore ab = rouge_n(a, b, n);
      const RougeScore ba = rouge_n(b, a, n);
      CHECK(close(ab.precision, ba.recall));
      CHECK(close(ab.recall, ba.precision));
      CHECK(close(ab.f1, ba.f1));
    }
    const RougeScore ab = rouge_l(a, b);
    const RougeScore ba = rouge_l(b, a);
    CHECK(close(ab.precision, ba.recall));
    CHECK(close(ab.f1, ba.f1));
  }
}

TEST_CASE("rouge_n and rouge_l match the brute-force reference on random pairs") {
  std::mt19937 rng(42);
  int nonzero = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const auto cand = random_tokens(rng, 10);
    const auto ref = random_tokens(rng, 10);
    for (std::size_t n = 1; n <= 3; ++n)
      REQUIRE(same_score(rouge_n(cand, ref, n), oracle::rouge_n_brute(cand, ref, n)));
    REQUIRE(same_score(rouge_l(cand, ref), oracle::rouge_l_brute(cand, ref)));
    if (rouge_n(cand, ref, 1).f1 > 0.0) ++nonzero;
  }
  CHECK(nonzero > 40);  // the vocab is small enough that most pairs overlap
}

TEST_CASE("rouge_multi takes the best reference by F1") {
  const auto cand = tokenize("a b c d");
  SECTION("a single reference reduces to rouge_score") {
    const std::vector<std::vector<std::string>> refs = {tokenize("a b x y")};
    const RougeScore multi = rouge_multi(cand, refs, Metric::rouge1);
    const RougeScore single = rouge_score(cand, refs[0], Metric::rouge1);
    CHECK(close(multi.f1, single.f1));
    CHECK(close(multi.precision, single.precision));
  }
  SECTION("the higher-overlap reference wins") {
    const std::vector<std::vector<std::string>> refs = {tokenize("a b x y"), tokenize("c d e")};
    CHECK(close(rouge_multi(cand, refs, Metric::rouge1).f1, 4.0 / 7.0));
  }
  SECTION("an exact copy among the references dominates") {
    const std::vector<std::vector<std::string>> refs = {tokenize("z z z"), cand, tokenize("a")};
    CHECK(close(rouge_multi(cand, refs, Metric::rouge1).f1, 1.0));
    CHECK(close(rouge_multi(cand, refs, Metric::rouge2).f1, 1.0));
    CHECK(close(rouge_multi(cand, refs, Metric::rougeL).f1, 1.0));
  }
  SECTION("F1 ties keep the earliest reference") {
    const auto ab = tokenize("a b");
    // both references reach F1 = 2/3, with different precision/recall splits
    const std::vector<std::vector<std::string>> refs = {tokenize("a"), tokenize("a b x y")};
    const RougeScore s = rouge_multi(ab, refs, Metric::rouge1);
    CHECK(close(s.f1, 2.0 / 3.0));
    CHECK(close(s.precision, 0.5));
    CHECK(close(s.recall, 1.0));
  }
  SECTION("an empty reference list is rejected") {
    CHECK_THROWS_AS(rouge_multi(cand, {}, Metric::rouge1), std::invalid_argument);
  }
}

TEST_CASE("metric names round-trip") {
  for (Metric m : {Metric::rouge1, Metric::rouge2, Metric::rougeL})
    CHECK(parse_metric(to_string(m)) == m);
  CHECK_THROWS_AS(parse_metric("r3"), std::invalid_argument);
  const auto cand = tokenize("x y z");
  const auto ref = tokenize("x y w");
  CHECK(close(rouge_score(cand, ref, Metric::rouge1).f1, rouge_n(cand, ref, 1).f1));
  CHECK(close(rouge_score(cand, ref, Metric::rouge2).f1, rouge_n(cand, ref, 2).f1));
  CHECK(close(rouge_score(cand, ref, Metric::rougeL).f1, rouge_l(cand, ref).f1));
}
