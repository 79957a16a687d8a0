#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "manner/digest.hpp"
#include "manner/error.hpp"
#include "manner/forge.hpp"
#include "support.hpp"

using namespace manner;
using testing::obj;
using testing::seq;
using testing::world;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Io;
}

ForgeConfig small_config(std::size_t n, int extra) {
  ForgeConfig cfg;
  cfg.seed = 7;
  cfg.num_examples = n;
  cfg.extra_adverbs = extra;
  cfg.splits = {{"random", RandomSplit{0.2}},
                {"cautiously_k5", KShotAdverb{"cautiously", 5}},
                {"pull_while_spinning", VerbAdverbHoldout{Verb::Pull, "while spinning"}}};
  return cfg;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("manner_" + name)) {
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::size_t count(const std::vector<Example>& ex, auto&& pred) {
  return static_cast<std::size_t>(std::count_if(ex.begin(), ex.end(), pred));
}

}  // namespace

TEST_CASE("config json round-trips") {
  ForgeConfig cfg = small_config(50, 3);
  cfg.meta.type_weights = {0.2, 0.7, 0, 0.1};
  cfg.physics.heavy_min_size = 4;
  cfg.fixed_programs.push_back(parse_program(
      "name: guardedly\nmode: egocentric\nwalk -> turn_right turn_left turn_left turn_right walk\n"));
  cfg.splits.push_back({"no_cautious", TypeSubset{"cautiously_k5", {AdverbType::Spinning, AdverbType::Detour}, {"guardedly"}}});
  cfg.splits.push_back({"red_pull", PredicateSplit{"verb=pull, color=red"}});
  CHECK(config_from_json(config_to_json(cfg)) == cfg);
  CHECK(config_from_json(nlohmann::json::object()) == ForgeConfig{});
}

TEST_CASE("config validation") {
  using nlohmann::json;
  CHECK(kind_of([] { config_from_json(json{{"num_examples", 0}}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { config_from_json(json{{"extra_adverbs", -1}}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { config_from_json(json{{"splits", json::array({{{"name", "r"}, {"kind", "random"}, {"test_fraction", 1.0}}})}}); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([] { config_from_json(json{{"splits", json::array({{{"name", "k"}, {"kind", "kshot_adverb"}, {"adverb", "cautiously"}, {"k", 0}}})}}); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([] { config_from_json(json{{"splits", json::array({{{"name", "t"}, {"kind", "type_subset"}, {"base", "missing"}}})}}); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([] { config_from_json(json{{"splits", json::array({{{"name", "x"}, {"kind", "bogus"}}})}}); }) ==
        ErrorKind::InvalidArgument);
  CHECK(kind_of([] { config_from_json(json{{"meta", {{"weights", {{"zigzag", 1.0}}}}}}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([] { config_from_json(json{{"grid_size", "six"}}); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("without extra adverbs only the builtins appear") {
  ForgeConfig cfg = small_config(1000, 0);
  const auto registry = build_registry(cfg);
  CHECK(registry.empty());
  const auto examples = generate_examples(cfg, Lexicon(registry));
  REQUIRE(examples.size() == 1000);
  std::set<std::string> seen;
  for (const auto& e : examples) {
    if (e.adverb) {
      CHECK(find_builtin(e.adverb->surface) != nullptr);
      seen.insert(e.adverb->surface);
    }
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("examples are valid, indexed and labelled consistently") {
  const ForgeConfig cfg = small_config(600, 20);
  const Dataset d = forge_dataset(cfg);
  for (std::size_t i = 0; i < d.examples.size(); ++i) {
    const Example& e = d.examples[i];
    CHECK(e.index == i);
    CHECK(example_is_valid(e, cfg.physics));
    CHECK(e.adverb.has_value() == !e.command.adverb.empty());
    if (e.adverb) CHECK(e.adverb->surface == e.command.adverb_surface());
    CHECK(e.split.size() == 3);
    CHECK(resolve_target(e.command.object, e.world) == e.world.target_index);
  }
  const double plain = static_cast<double>(count(d.examples, [](const Example& e) { return !e.adverb; }));
  CHECK(plain / 600.0 == doctest::Approx(0.2).epsilon(0.3));
}

TEST_CASE("generation is deterministic across worker counts") {
  const ForgeConfig cfg = small_config(300, 15);
  const Lexicon lex(build_registry(cfg));
  const auto one = generate_examples(cfg, lex, 1);
  CHECK(one == generate_examples(cfg, lex, 1));
  CHECK(one == generate_examples(cfg, lex, 4));
  ForgeConfig other = cfg;
  other.seed = 8;
  CHECK(one != generate_examples(other, lex, 1));
}

TEST_CASE("a tiny grid exhausts the retries and names the adverb") {
  ForgeConfig cfg;
  cfg.grid_size = 2;
  cfg.max_distractors = 0;
  cfg.num_examples = 200;
  cfg.no_adverb_probability = 0;
  cfg.retry_bound = 3;
  cfg.extra_adverbs = 30;
  cfg.meta.type_weights = {0, 0, 0, 1};
  try {
    generate_examples(cfg, Lexicon(build_registry(cfg)));
    FAIL("expected RetryExhausted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RetryExhausted);
    CHECK(std::string(e.what()).find("adverb 'while") != std::string::npos);
  }
}

TEST_CASE("module records recompose the targets") {
  const ForgeConfig cfg = small_config(1000, 30);
  const Dataset d = forge_dataset(cfg);
  const Lexicon lex = d.lexicon();
  const auto& m = d.modules;
  REQUIRE(m.perception.size() == d.examples.size());
  for (std::size_t i = 0; i < d.examples.size(); ++i) {
    const Example& e = d.examples[i];
    CHECK(recompose(m.perception[i], m.navigation[i], m.interaction[i], m.transformation[i], lex) == e.target);
    CHECK(m.transformation[i].target == e.target);
    if (e.verb() == Verb::Walk) CHECK(m.interaction[i].target.empty());
  }
  NavigationRecord tampered = m.navigation[0];
  tampered.percept.agent_heading = turn_left(tampered.percept.agent_heading);
  CHECK(kind_of([&] { recompose(m.perception[0], tampered, m.interaction[0], m.transformation[0], lex); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("module records for a push cautiously example") {
  Example e;
  e.command = Command::parse(std::string_view("push a circle cautiously"));
  e.world = world(3, 2, Heading::East, {obj(Shape::Circle, Color::Red, 1, 1, 1)});
  e.adverb = AdverbMeta{"cautiously", AdverbType::Cautiously};
  const Lexicon lex;
  const auto m = emit_module_datasets(std::span<const Example>(&e, 1), lex);
  CHECK(m.perception[0].target == Percept{{3, 2}, Heading::East, {1, 1}});
  CHECK(m.navigation[0].target == Plan{Mode::Egocentric, seq("turn_left walk walk turn_left walk")});
  CHECK(m.navigation[0].adverb == "cautiously");
  CHECK(m.interaction[0].arrival_heading == Heading::West);
  CHECK(m.interaction[0].target == seq("push"));
  const std::string c = "turn_left turn_right turn_right turn_left";
  CHECK(join(m.transformation[0].target) ==
        "turn_left " + c + " walk " + c + " walk turn_left " + c + " walk " + c + " push");
}

TEST_CASE("random splits partition everything") {
  std::vector<Example> ex(101);
  for (std::size_t i = 0; i < ex.size(); ++i) ex[i].index = i;
  Rng rng(1);
  const std::vector<SplitSpec> specs = {{"r", RandomSplit{0.3}}};
  const auto s = build_splits(ex, specs, rng).at("r");
  CHECK(s.test.size() == 30);
  CHECK(s.train.size() == 71);
  std::set<std::size_t> all(s.train.begin(), s.train.end());
  for (auto i : s.test) CHECK(all.insert(i).second);
  CHECK(all.size() == 101);
}

TEST_CASE("k-shot and holdout split algebra") {
  const Dataset d = forge_dataset(small_config(2000, 0));
  const auto splits = d.splits();
  auto surface = [&](std::size_t i) { return d.examples[i].adverb ? d.examples[i].adverb->surface : ""; };

  const auto& k5 = splits.at("cautiously_k5");
  std::size_t train_matches = 0;
  for (auto i : k5.train) train_matches += surface(i) == "cautiously";
  CHECK(train_matches == 5);
  for (auto i : k5.test) CHECK(surface(i) == "cautiously");
  CHECK(k5.train.size() + k5.test.size() == 2000);

  const auto& pws = splits.at("pull_while_spinning");
  CHECK_FALSE(pws.test.empty());
  for (auto i : pws.train) CHECK_FALSE((d.examples[i].verb() == Verb::Pull && surface(i) == "while spinning"));
  for (auto i : pws.test) CHECK((d.examples[i].verb() == Verb::Pull && surface(i) == "while spinning"));

  for (const auto& [name, p] : splits) {
    std::set<std::size_t> train(p.train.begin(), p.train.end());
    for (auto i : p.test) CHECK_FALSE(train.contains(i));
  }

  Rng rng(2);
  const std::size_t matches = k5.test.size() + 5;
  const std::vector<SplitSpec> too_many = {{"k", KShotAdverb{"cautiously", static_cast<int>(matches)}}};
  CHECK(kind_of([&] { build_splits(d.examples, too_many, rng); }) == ErrorKind::InsufficientExamples);
  const std::vector<SplitSpec> just_enough = {{"k", KShotAdverb{"cautiously", static_cast<int>(matches - 1)}}};
  CHECK(build_splits(d.examples, just_enough, rng).at("k").test.size() == 1);
}

TEST_CASE("type subsets only thin out registry adverbs in train") {
  ForgeConfig cfg = small_config(1500, 30);
  cfg.splits.push_back({"no_cautiously", TypeSubset{"cautiously_k5", {AdverbType::Spinning, AdverbType::Zigzag, AdverbType::Detour}, {}}});
  cfg.splits.push_back({"no_extra", TypeSubset{"cautiously_k5", {}, {}}});
  const Dataset d = forge_dataset(cfg);
  const auto s = d.splits();
  const auto& base = s.at("cautiously_k5");
  for (const char* name : {"no_cautiously", "no_extra"}) {
    const auto& sub = s.at(name);
    CHECK(sub.test == base.test);
    CHECK(sub.train.size() + sub.unused.size() == base.train.size());
    CHECK(sub.train.size() + sub.unused.size() + sub.test.size() == d.examples.size());
  }
  for (auto i : s.at("no_cautiously").train) {
    const auto& a = d.examples[i].adverb;
    if (a && !find_builtin(a->surface)) CHECK(a->type != AdverbType::Cautiously);
  }
  for (auto i : s.at("no_cautiously").unused) CHECK(d.examples[i].adverb->type == AdverbType::Cautiously);
  for (auto i : s.at("no_extra").train) {
    const auto& a = d.examples[i].adverb;
    CHECK((!a || find_builtin(a->surface) != nullptr));
  }
}

TEST_CASE("predicate splits") {
  const Dataset d = forge_dataset(small_config(800, 0));
  Rng rng(3);
  const std::vector<SplitSpec> specs = {{"yellow_squares", PredicateSplit{"shape=square,color=yellow"}},
                                        {"plain_walk", PredicateSplit{"verb=walk, adverb=none"}}};
  const auto s = build_splits(d.examples, specs, rng);
  for (auto i : s.at("yellow_squares").test) {
    CHECK(d.examples[i].world.target().shape == Shape::Square);
    CHECK(d.examples[i].world.target().color == Color::Yellow);
  }
  for (auto i : s.at("plain_walk").train) {
    const auto& e = d.examples[i];
    CHECK_FALSE((e.verb() == Verb::Walk && !e.adverb));
  }
  CHECK_FALSE(s.at("plain_walk").test.empty());
  const std::vector<SplitSpec> bad = {{"b", PredicateSplit{"mood=happy"}}};
  CHECK(kind_of([&] { build_splits(d.examples, bad, rng); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("datasets round-trip through files") {
  TempDir dir("roundtrip");
  Dataset d = forge_dataset(small_config(100, 5));
  write_dataset(d, dir.path);
  const Dataset back = read_dataset(dir.path);
  CHECK(back.config == d.config);
  CHECK(back.registry == d.registry);
  CHECK(back.examples == d.examples);
  CHECK(back.modules == d.modules);
  CHECK(back.manifest == d.manifest);
  CHECK(back.manifest_digest == d.manifest_digest);
  CHECK(back.manifest.num_examples == 100);
  for (const auto& [name, counts] : back.manifest.split_counts) {
    CHECK(counts.at("train") + counts.at("test") + counts.at("unused") == 100);
  }

  const std::string first_line = slurp(dir.path / kExamplesFile).substr(0, 200);
  CHECK(first_line.starts_with("{\"adverb\":"));
  CHECK(first_line.find('.') == std::string::npos);
}

TEST_CASE("two writes of the same config are byte-identical") {
  TempDir a("same_a"), b("same_b");
  Dataset x = forge_dataset(small_config(150, 8));
  Dataset y = forge_dataset(small_config(150, 8), 3);
  write_dataset(x, a.path);
  write_dataset(y, b.path);
  CHECK(x.manifest.file_digests == y.manifest.file_digests);
  CHECK(x.manifest_digest == y.manifest_digest);
  for (const auto& [file, digest] : x.manifest.file_digests) CHECK(sha256_file(b.path / file) == digest);
}

TEST_CASE("integrity checks on read") {
  TempDir dir("tamper");
  ForgeConfig cfg = small_config(40, 2);
  cfg.splits.resize(1);
  Dataset d = forge_dataset(cfg);
  write_dataset(d, dir.path);

  SUBCASE("tampered record") {
    std::string text = slurp(dir.path / kExamplesFile);
    text[text.find("walk")] = 'W';
    spit(dir.path / kExamplesFile, text);
    CHECK(kind_of([&] { read_dataset(dir.path); }) == ErrorKind::DigestMismatch);
  }
  SUBCASE("schema version") {
    auto m = nlohmann::json::parse(slurp(dir.path / kManifestFile));
    m["schema_version"] = kSchemaVersion + 1;
    spit(dir.path / kManifestFile, m.dump(2));
    CHECK(kind_of([&] { read_dataset(dir.path); }) == ErrorKind::SchemaMismatch);
  }
  SUBCASE("malformed line with a matching digest") {
    std::string text = slurp(dir.path / kModuleFiles[1]);
    const auto second = text.find('\n') + 1;
    text.insert(second, "{not json}\n");
    spit(dir.path / kModuleFiles[1], text);
    auto m = nlohmann::json::parse(slurp(dir.path / kManifestFile));
    m["file_digests"][kModuleFiles[1]] = sha256_hex(text);
    spit(dir.path / kManifestFile, m.dump(2));
    try {
      read_dataset(dir.path);
      FAIL("expected MalformedRecord");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::MalformedRecord);
      CHECK(std::string(e.what()).find("navigation.ndrec line 2") != std::string::npos);
    }
  }
}

TEST_CASE("the full extra vocabulary shows up in the stream") {
  ForgeConfig cfg = small_config(12000, 150);
  cfg.splits.clear();
  const Lexicon lex(build_registry(cfg));
  std::set<std::string> surfaces;
  for (const auto& e : generate_examples(cfg, lex)) {
    if (e.adverb) surfaces.insert(e.adverb->surface);
  }
  CHECK(surfaces.size() == 154);
}
