#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "manner/error.hpp"
#include "manner/harness.hpp"
#include "support.hpp"

using namespace manner;
namespace fs = std::filesystem;

namespace {

using Tokens = std::vector<std::string>;

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Io;
}

Tokens tokens(std::string_view text) { return to_tokens(testing::seq(text)); }

Dataset small_dataset(std::size_t n) {
  ForgeConfig cfg;
  cfg.seed = 11;
  cfg.num_examples = n;
  cfg.extra_adverbs = 10;
  cfg.splits = {{"random", RandomSplit{0.5}}, {"cautiously_k1", KShotAdverb{"cautiously", 1}}};
  Dataset d = forge_dataset(cfg);
  d.manifest_digest = "fixture";
  return d;
}

}  // namespace

TEST_CASE("exact match") {
  const auto s = tokens("turn_left walk push");
  CHECK(exact_match(s, s));
  CHECK_FALSE(exact_match(tokens("walk"), tokens("walk walk")));
  CHECK(exact_match(Tokens{}, Tokens{}));

  const std::string c = "turn_left turn_right turn_right turn_left walk";
  const auto gold = tokens("turn_left " + c + " " + c);
  auto flipped = gold;
  flipped[2] = "turn_left";
  CHECK_FALSE(exact_match(flipped, gold));
  CHECK_FALSE(exact_match(gold, flipped));
}

TEST_CASE("percent formatting rounds half to even") {
  CHECK(format_percent(1000, 1000) == "100.00");
  CHECK(format_percent(999, 1000) == "99.90");
  CHECK(format_percent(0, 7) == "0.00");
  CHECK(format_percent(1, 3) == "33.33");
  CHECK(format_percent(2, 3) == "66.67");
  // 1/1600 = 0.0625% -> halfway between 0.06 and 0.07.
  CHECK(format_percent(1, 1600) == "0.06");
  // 3/1600 = 0.1875% -> halfway between 0.18 and 0.19.
  CHECK(format_percent(3, 1600) == "0.19");
  CHECK(format_percent(1, 8) == "12.50");
  CHECK(kind_of([] { format_percent(1, 0); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("gold predictions score 100") {
  const Dataset d = small_dataset(400);
  const auto gold = gold_predictions(d);
  const EvalReport r = evaluate(d, gold);
  REQUIRE(r.splits.size() == 2);
  for (const auto& [name, m] : r.splits) {
    CHECK(m.n == d.splits().at(name).test.size());
    CHECK(m.exact == m.n);
    CHECK(m.semantic == m.n);
    CHECK(r.to_json()["splits"][name]["exact_match_percent"] == "100.00");
  }
  CHECK(r.dataset_digest == "fixture");
  CHECK(EvalReport::from_json(r.to_json()) == r);
}

TEST_CASE("one corrupted record out of a thousand") {
  Dataset d = small_dataset(1000);
  for (auto& e : d.examples) e.split = {{"all", Partition::Test}};
  auto preds = gold_predictions(d);
  preds[17].prediction.push_back("stay");
  const EvalReport r = evaluate(d, preds, std::vector<std::string>{"all"});
  CHECK(r.splits.at("all").n == 1000);
  CHECK(r.splits.at("all").exact == 999);
  CHECK(r.to_json()["splits"]["all"]["exact_match_percent"] == "99.90");
}

TEST_CASE("semantic validity is weaker than exact match") {
  const Dataset d = small_dataset(300);
  std::size_t looser = 0;
  for (const auto& e : d.examples) {
    const auto gold = to_tokens(e.target);
    CHECK(semantically_valid(gold, e));
    auto padded = gold;
    padded.insert(padded.begin(), {"turn_left", "turn_right"});
    CHECK_FALSE(exact_match(padded, gold));
    looser += semantically_valid(padded, e);
    CHECK_FALSE(semantically_valid(Tokens{"hop"}, e));
  }
  CHECK(looser == d.examples.size());
}

TEST_CASE("coverage errors") {
  const Dataset d = small_dataset(200);
  auto gold = gold_predictions(d);
  CHECK(kind_of([&] { evaluate(d, std::vector<PredictionRecord>{}); }) == ErrorKind::MissingPrediction);
  auto dup = gold;
  dup.push_back(gold.front());
  CHECK(kind_of([&] { evaluate(d, dup); }) == ErrorKind::DuplicatePrediction);
  auto unknown = gold;
  unknown.push_back({99999, {}});
  CHECK(kind_of([&] { evaluate(d, unknown); }) == ErrorKind::UnknownIndex);
  CHECK(kind_of([&] { evaluate(d, gold, std::vector<std::string>{"nope"}); }) == ErrorKind::InvalidArgument);

  // Predictions outside the scored test sets are not required.
  const auto test = d.splits().at("cautiously_k1").test;
  std::vector<PredictionRecord> only_test;
  for (auto i : test) only_test.push_back(gold[i]);
  CHECK(evaluate(d, only_test, std::vector<std::string>{"cautiously_k1"}).splits.at("cautiously_k1").exact == test.size());
}

TEST_CASE("evaluation ignores prediction order and worker count") {
  const Dataset d = small_dataset(300);
  auto preds = gold_predictions(d);
  for (std::size_t i = 0; i < preds.size(); i += 7) preds[i].prediction.pop_back();
  const EvalReport a = evaluate(d, preds);
  std::reverse(preds.begin(), preds.end());
  Rng rng(5);
  rng.shuffle(std::span<PredictionRecord>(preds));
  CHECK(evaluate(d, preds) == a);
  CHECK(evaluate(d, preds, {}, 4) == a);
}

TEST_CASE("prediction files") {
  const fs::path path = fs::temp_directory_path() / "manner_predictions.ndrec";
  const std::vector<PredictionRecord> preds = {{0, {"walk"}}, {3, {}}, {1, {"turn_left", "push"}}};
  write_predictions(path, preds);
  CHECK(read_predictions(path) == preds);
  {
    std::ofstream out(path, std::ios::app);
    out << "{\"index\": \"x\"}\n";
  }
  try {
    read_predictions(path);
    FAIL("expected MalformedRecord");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MalformedRecord);
    CHECK(std::string(e.what()).find("line 4") != std::string::npos);
  }
  fs::remove(path);
}

TEST_CASE("aggregating runs") {
  EvalReport a, b;
  a.dataset_digest = b.dataset_digest = "d";
  a.splits["s"] = {4, 4, 4};
  b.splits["s"] = {4, 2, 3};
  const auto j = aggregate_reports(std::vector<EvalReport>{a, b});
  CHECK(j["runs"] == 2);
  CHECK(j["splits"]["s"]["exact_match"]["mean"] == "75.00");
  CHECK(j["splits"]["s"]["exact_match"]["std"] == "25.00");
  CHECK(j["splits"]["s"]["semantic_valid"]["mean"] == "87.50");
  b.dataset_digest = "other";
  CHECK(kind_of([&] { aggregate_reports(std::vector<EvalReport>{a, b}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { aggregate_reports({}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("stats mention every split") {
  const Dataset d = small_dataset(120);
  const std::string s = dataset_stats(d);
  CHECK(s.find("examples: 120") != std::string::npos);
  CHECK(s.find("random train") != std::string::npos);
  CHECK(s.find("cautiously_k1 train") != std::string::npos);
}
