#include <set>

#include "doctest.h"
#include "manner/error.hpp"
#include "manner/meta_grammar.hpp"
#include "support.hpp"

using namespace manner;
using testing::seq;

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

bool only_turns(std::span<const Action> s) {
  return std::all_of(s.begin(), s.end(), [](Action a) { return is_turn(a); });
}

}  // namespace

TEST_CASE("the detour exemplar is accepted") {
  CHECK(is_valid_detour_rule(Action::East, seq("North East South"), 5));
  CHECK(is_valid_detour_rule(Action::North, seq("West North East"), 3));
  CHECK_FALSE(is_valid_detour_rule(Action::East, seq("North East South"), 2));
  CHECK_FALSE(is_valid_detour_rule(Action::East, seq("East"), 5));
  CHECK_FALSE(is_valid_detour_rule(Action::East, seq("North East"), 5));
  CHECK_FALSE(is_valid_detour_rule(Action::East, seq("turn_left East turn_right"), 5));
  CHECK_FALSE(is_valid_detour_rule(Action::Walk, seq("walk walk"), 5));
}

TEST_CASE("classifying the builtins") {
  CHECK(classify_program(*find_builtin("while spinning")) == AdverbType::Spinning);
  CHECK(classify_program(*find_builtin("cautiously")) == AdverbType::Cautiously);
  CHECK(classify_program(*find_builtin("while zigzagging")) == AdverbType::Zigzag);
  CHECK(classify_program(*find_builtin("hesitantly")) == AdverbType::Cautiously);
}

TEST_CASE("classifying hand-written programs") {
  AdverbProgram detour;
  detour.name = {"while", "wandering"};
  detour.mode = Mode::Allocentric;
  detour.add_rule(Action::East, seq("North East South"));
  CHECK(classify_program(detour) == AdverbType::Detour);

  AdverbProgram guarded = parse_program(
      "name: guardedly\nmode: egocentric\nwalk -> turn_right turn_left turn_left turn_right walk\n");
  CHECK(classify_program(guarded) == AdverbType::Cautiously);

  AdverbProgram turning = parse_program("name: dizzily\nmode: egocentric\nwalk -> turn_left walk\n");
  CHECK(kind_of([&] { classify_program(turning); }) == ErrorKind::Unclassifiable);

  AdverbProgram stretched = detour;
  stretched.rules[Action::East] = seq("East East");
  CHECK(kind_of([&] { classify_program(stretched); }) == ErrorKind::Unclassifiable);
}

TEST_CASE("type names") {
  for (AdverbType t : kAdverbTypes) CHECK(parse_adverb_type(to_string(t)) == t);
  CHECK(parse_adverb_type("detour") == AdverbType::Detour);
  CHECK_FALSE(parse_adverb_type("wobbly").has_value());
}

TEST_CASE("sampled programs keep their type's structure") {
  const MetaGrammarConfig cfg;
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const AdverbProgram c = sample_program(rng, AdverbType::Cautiously, cfg);
    CHECK(c.mode == Mode::Egocentric);
    CHECK(classify_program(c) == AdverbType::Cautiously);
    for (const auto& [lhs, rhs] : c.rules) {
      CHECK(is_movement(lhs));
      CHECK(rhs.back() == lhs);
      const std::span<const Action> prefix(rhs.data(), rhs.size() - 1);
      CHECK(only_turns(prefix));
      CHECK(net_rotation(prefix) == 0);
      CHECK(prefix.size() >= 2);
      CHECK(prefix.size() <= 8);
    }

    const AdverbProgram s = sample_program(rng, AdverbType::Spinning, cfg);
    CHECK(s.mode == Mode::Allocentric);
    CHECK(classify_program(s) == AdverbType::Spinning);
    for (Action d : kAlloActions) REQUIRE(s.rule_for(d) != nullptr);
    const ActionSeq& north = *s.rule_for(Action::North);
    for (const auto& [lhs, rhs] : s.rules) {
      CHECK(rhs.back() == lhs);
      CHECK(std::equal(rhs.begin(), rhs.end() - 1, north.begin(), north.end() - 1));
    }

    const AdverbProgram d = sample_program(rng, AdverbType::Detour, cfg);
    CHECK(classify_program(d) == AdverbType::Detour);
    CHECK_FALSE(d.rules.empty());
    for (const auto& [lhs, rhs] : d.rules) CHECK(is_valid_detour_rule(lhs, rhs, cfg.detour_rhs_max));
  }
  CHECK(kind_of([&] { sample_program(rng, AdverbType::Zigzag, cfg); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("names follow the templates and never repeat") {
  Rng a(3), b(3);
  const auto allo = generate_name(a, Mode::Allocentric);
  CHECK(allo == generate_name(b, Mode::Allocentric));
  REQUIRE(allo.size() == 2);
  CHECK(allo[0] == "while");
  CHECK(allo[1].ends_with("ing"));
  const auto ego = generate_name(a, Mode::Egocentric);
  REQUIRE(ego.size() == 1);
  CHECK(ego[0].ends_with("ly"));

  NameGenerator names;
  std::set<std::string> seen;
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const auto n = names.next(rng, i % 2 ? Mode::Allocentric : Mode::Egocentric);
    std::string s;
    for (const auto& t : n) s += (s.empty() ? "" : " ") + t;
    CHECK(find_builtin(s) == nullptr);
    CHECK(seen.insert(s).second);
  }
}

TEST_CASE("registries") {
  const MetaGrammarConfig cfg;
  Rng empty_rng(1);
  CHECK(sample_registry(empty_rng, 0, cfg).empty());

  Rng r1(42), r2(42);
  const auto reg = sample_registry(r1, 150, cfg);
  CHECK(reg == sample_registry(r2, 150, cfg));
  REQUIRE(reg.size() == 150);
  std::map<AdverbType, int> counts;
  std::set<std::string> surfaces;
  for (std::size_t i = 0; i < reg.size(); ++i) {
    ++counts[reg[i].type];
    CHECK(classify_program(reg[i].program) == reg[i].type);
    CHECK(reg[i].program.name == reg[i].surface);
    CHECK(surfaces.insert(reg[i].surface_text()).second);
    for (const auto& b : builtin_adverbs()) CHECK_FALSE(programs_equal(reg[i].program, b));
    for (std::size_t j = 0; j < i; ++j) CHECK_FALSE(programs_equal(reg[i].program, reg[j].program));
  }
  CHECK(counts[AdverbType::Spinning] == 60);
  CHECK(counts[AdverbType::Cautiously] == 45);
  CHECK(counts[AdverbType::Detour] == 45);
  CHECK(counts[AdverbType::Zigzag] == 0);

  CHECK(parse_registry(serialize_registry(reg)) == reg);
  CHECK(serialize_registry(parse_registry(serialize_registry(reg))) == serialize_registry(reg));
}

TEST_CASE("fixed programs are never resampled") {
  const AdverbProgram guarded = parse_program(
      "name: guardedly\nmode: egocentric\nwalk -> turn_right turn_left turn_left turn_right walk\n"
      "push -> turn_right turn_left turn_left turn_right push\npull -> turn_right turn_left turn_left turn_right pull\n");
  const std::vector<LexiconEntry> fixed = {{guarded.name, guarded, AdverbType::Cautiously}};
  MetaGrammarConfig cfg;
  cfg.type_weights = {0, 1, 0, 0};
  cfg.prefix_min = cfg.prefix_max = 4;
  Rng rng(9);
  const auto reg = sample_registry(rng, 4, cfg, fixed);
  for (const auto& e : reg) {
    CHECK_FALSE(programs_equal(e.program, guarded));
    CHECK(e.surface_text() != "guardedly");
  }
}

TEST_CASE("an exhausted program space stops the sampler") {
  MetaGrammarConfig cfg;
  cfg.type_weights = {0, 1, 0, 0};
  cfg.prefix_min = cfg.prefix_max = 2;
  cfg.max_rejects = 50;
  Rng rng(4);
  // Only two net-zero prefixes of length two exist.
  CHECK(sample_registry(rng, 2, cfg).size() == 2);
  Rng again(4);
  CHECK(kind_of([&] { sample_registry(again, 3, cfg); }) == ErrorKind::RejectBudgetExceeded);
}

TEST_CASE("meta-grammar config validation") {
  MetaGrammarConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.type_weights = {0.5, 0.5, 0.1, 0};
  CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::InvalidArgument);
  cfg.type_weights = {0.5, 0.6, 0, 0};
  CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::InvalidArgument);
  cfg = {};
  cfg.prefix_min = cfg.prefix_max = 3;
  CHECK(kind_of([&] { cfg.validate(); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("the lexicon") {
  Rng rng(6);
  const auto reg = sample_registry(rng, 10, MetaGrammarConfig{});
  Lexicon lex(reg);
  CHECK(lex.entries().size() == 14);
  CHECK(lex.find("cautiously")->type == AdverbType::Cautiously);
  CHECK(lex.is_builtin("while spinning"));
  CHECK(lex.find(reg[3].surface_text())->program == reg[3].program);
  CHECK(lex.find("nonexistently") == nullptr);
  CHECK(kind_of([&] { lex.add(reg[0]); }) == ErrorKind::InvalidArgument);
}
