#include "manner/adverb_dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "manner/error.hpp"

namespace manner {

std::string_view to_string(Mode m) { return m == Mode::Allocentric ? "allocentric" : "egocentric"; }
std::string_view to_string(PlanShape s) { return s == PlanShape::Canonical ? "canonical" : "zigzag"; }

std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "allocentric") return Mode::Allocentric;
  if (s == "egocentric") return Mode::Egocentric;
  return std::nullopt;
}

std::optional<PlanShape> parse_plan_shape(std::string_view s) {
  if (s == "canonical") return PlanShape::Canonical;
  if (s == "zigzag") return PlanShape::Zigzag;
  return std::nullopt;
}

std::string AdverbProgram::surface() const {
  std::string out;
  for (std::size_t i = 0; i < name.size(); ++i) {
    if (i) out += ' ';
    out += name[i];
  }
  return out;
}

const ActionSeq* AdverbProgram::rule_for(Action lhs) const {
  auto it = rules.find(lhs);
  return it == rules.end() ? nullptr : &it->second;
}

void AdverbProgram::add_rule(Action lhs, ActionSeq rhs) {
  if (rules.contains(lhs)) {
    throw Error(ErrorKind::DuplicateLhs, "second rule for '" + std::string(to_string(lhs)) + "'");
  }
  rules.emplace(lhs, std::move(rhs));
}

void AdverbProgram::validate() const {
  auto fail = [&](const std::string& m) {
    throw Error(ErrorKind::InvalidProgram, "'" + surface() + "': " + m);
  };
  if (name.empty()) fail("program has no name");
  if (passes < 1) fail("passes must be at least 1");
  bool any_allo = false;
  for (const auto& [lhs, rhs] : rules) {
    if (rhs.empty()) fail("empty right-hand side for '" + std::string(to_string(lhs)) + "'");
    any_allo = any_allo || is_allocentric(lhs);
    if (mode == Mode::Egocentric && is_allocentric(lhs))
      fail("egocentric program rewrites allocentric '" + std::string(to_string(lhs)) + "'");
  }
  if (mode == Mode::Egocentric && plan_shape == PlanShape::Zigzag)
    fail("zigzag plans are allocentric");
  if (mode == Mode::Allocentric && plan_shape == PlanShape::Canonical && !any_allo)
    fail("allocentric program needs an allocentric rule or a zigzag plan");
}

ActionSeq apply_pass(const AdverbProgram& program, std::span<const Action> seq) {
  ActionSeq out;
  out.reserve(seq.size() * 2);
  for (Action a : seq) {
    if (const ActionSeq* rhs = program.rule_for(a)) {
      out.insert(out.end(), rhs->begin(), rhs->end());
    } else {
      out.push_back(a);
    }
  }
  return out;
}

ActionSeq apply_program(const AdverbProgram& program, std::span<const Action> seq, int max_depth) {
  if (max_depth < 1) throw Error(ErrorKind::InvalidArgument, "max_depth must be at least 1");
  if (program.passes > max_depth) {
    throw Error(ErrorKind::DepthExceeded, "'" + program.surface() + "' needs " +
                                              std::to_string(program.passes) +
                                              " passes, limit is " + std::to_string(max_depth));
  }
  ActionSeq current(seq.begin(), seq.end());
  for (int i = 0; i < program.passes; ++i) current = apply_pass(program, current);
  return current;
}

Grounded ground_tracked(std::span<const Action> seq, Heading start) {
  Grounded g{{}, start};
  g.actions.reserve(seq.size() * 2);
  for (Action a : seq) {
    if (!is_allocentric(a)) {
      g.actions.push_back(a);
      if (a == Action::TurnLeft) g.heading = turn_left(g.heading);
      if (a == Action::TurnRight) g.heading = turn_right(g.heading);
      continue;
    }
    const Heading want = direction_of(a);
    const int clockwise = (static_cast<int>(want) - static_cast<int>(g.heading) + 4) % 4;
    switch (clockwise) {
      case 1: g.actions.push_back(Action::TurnRight); break;
      case 2: g.actions.insert(g.actions.end(), {Action::TurnLeft, Action::TurnLeft}); break;
      case 3: g.actions.push_back(Action::TurnLeft); break;
      default: break;
    }
    g.actions.push_back(Action::Walk);
    g.heading = want;
  }
  return g;
}

namespace {

ActionSeq prefixed(const ActionSeq& prefix, Action self) {
  ActionSeq out = prefix;
  out.push_back(self);
  return out;
}

std::vector<AdverbProgram> make_builtins() {
  const ActionSeq spin(4, Action::TurnLeft);
  const ActionSeq look = {Action::TurnLeft, Action::TurnRight, Action::TurnRight, Action::TurnLeft};

  AdverbProgram spinning{{"while", "spinning"}, Mode::Allocentric, 1, PlanShape::Canonical, {}};
  for (Action d : kAlloActions) spinning.add_rule(d, prefixed(spin, d));
  spinning.add_rule(Action::Push, prefixed(spin, Action::Push));
  spinning.add_rule(Action::Pull, prefixed(spin, Action::Pull));

  AdverbProgram cautiously{{"cautiously"}, Mode::Egocentric, 1, PlanShape::Canonical, {}};
  for (Action m : {Action::Walk, Action::Push, Action::Pull}) cautiously.add_rule(m, prefixed(look, m));

  AdverbProgram zigzagging{{"while", "zigzagging"}, Mode::Allocentric, 1, PlanShape::Zigzag, {}};

  AdverbProgram hesitantly{{"hesitantly"}, Mode::Egocentric, 1, PlanShape::Canonical, {}};
  for (Action m : {Action::Walk, Action::Push, Action::Pull}) hesitantly.add_rule(m, {m, Action::Stay});

  return {spinning, cautiously, zigzagging, hesitantly};
}

}  // namespace

const std::vector<AdverbProgram>& builtin_adverbs() {
  static const std::vector<AdverbProgram> programs = make_builtins();
  return programs;
}

const AdverbProgram* find_builtin(std::string_view surface) {
  for (const auto& p : builtin_adverbs()) {
    if (p.surface() == surface) return &p;
  }
  return nullptr;
}

bool programs_equal(const AdverbProgram& a, const AdverbProgram& b) {
  return a.rules == b.rules && a.mode == b.mode && a.passes == b.passes &&
         a.plan_shape == b.plan_shape;
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

namespace {

struct Token {
  std::string_view text;
  std::size_t column;  // 1-based
};

std::vector<Token> tokenize(std::string_view line, std::size_t offset = 0) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back({line.substr(i, j - i), offset + i + 1});
    i = j;
  }
  return out;
}

}  // namespace

AdverbProgram parse_program(std::string_view text) {
  AdverbProgram program;
  bool seen_name = false, seen_mode = false, seen_passes = false, seen_shape = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;

  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    auto fail = [&](std::size_t col, const std::string& m) {
      throw ParseError(ErrorKind::ParseError, line_no, col, m);
    };

    auto tokens = tokenize(line);
    if (tokens.empty()) continue;

    if (auto arrow = line.find("->"); arrow != std::string_view::npos) {
      auto lhs = tokenize(line.substr(0, arrow));
      auto rhs = tokenize(line.substr(arrow + 2), arrow + 2);
      if (lhs.size() != 1) fail(lhs.empty() ? arrow + 1 : lhs[1].column, "a rule has exactly one lhs symbol");
      if (rhs.empty()) fail(arrow + 3, "empty right-hand side");
      auto lhs_sym = parse_action(lhs[0].text);
      if (!lhs_sym) fail(lhs[0].column, "unknown symbol '" + std::string(lhs[0].text) + "'");
      ActionSeq rhs_seq;
      for (const auto& t : rhs) {
        if (t.text == "->") fail(t.column, "more than one '->'");
        auto sym = parse_action(t.text);
        if (!sym) fail(t.column, "unknown symbol '" + std::string(t.text) + "'");
        rhs_seq.push_back(*sym);
      }
      if (program.rules.contains(*lhs_sym)) {
        throw ParseError(ErrorKind::DuplicateLhs, line_no, lhs[0].column,
                         "second rule for '" + std::string(lhs[0].text) + "'");
      }
      program.rules.emplace(*lhs_sym, std::move(rhs_seq));
      continue;
    }

    auto colon = line.find(':');
    if (colon == std::string_view::npos) fail(tokens[0].column, "expected 'key: value' or a rule");
    auto key_tokens = tokenize(line.substr(0, colon));
    auto values = tokenize(line.substr(colon + 1), colon + 1);
    if (key_tokens.size() != 1) fail(tokens[0].column, "malformed header key");
    const std::string_view key = key_tokens[0].text;
    const std::size_t key_col = key_tokens[0].column;
    if (values.empty()) fail(colon + 2, "missing value for '" + std::string(key) + "'");
    auto single = [&]() -> std::string_view {
      if (values.size() != 1) fail(values[1].column, "'" + std::string(key) + "' takes one value");
      return values[0].text;
    };
    auto once = [&](bool& seen) {
      if (seen) fail(key_col, "repeated header '" + std::string(key) + "'");
      seen = true;
    };

    if (key == "name") {
      once(seen_name);
      for (const auto& v : values) program.name.emplace_back(v.text);
    } else if (key == "mode") {
      once(seen_mode);
      auto m = parse_mode(single());
      if (!m) fail(values[0].column, "mode must be allocentric or egocentric");
      program.mode = *m;
    } else if (key == "passes") {
      once(seen_passes);
      auto v = single();
      int n = 0;
      auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
      if (ec != std::errc() || end != v.data() + v.size() || n < 1)
        fail(values[0].column, "passes must be a positive integer");
      program.passes = n;
    } else if (key == "plan_shape") {
      once(seen_shape);
      auto s = parse_plan_shape(single());
      if (!s) fail(values[0].column, "plan_shape must be canonical or zigzag");
      program.plan_shape = *s;
    } else {
      fail(key_col, "unknown header '" + std::string(key) + "'");
    }
  }

  if (!seen_name) throw ParseError(ErrorKind::ParseError, line_no, 1, "missing 'name:' header");
  if (!seen_mode) throw ParseError(ErrorKind::ParseError, line_no, 1, "missing 'mode:' header");
  program.validate();
  return program;
}

std::string serialize_program(const AdverbProgram& program) {
  std::string out;
  out += "name: " + program.surface() + "\n";
  out += "mode: " + std::string(to_string(program.mode)) + "\n";
  out += "passes: " + std::to_string(program.passes) + "\n";
  out += "plan_shape: " + std::string(to_string(program.plan_shape)) + "\n";

  std::vector<std::pair<std::string_view, const ActionSeq*>> sorted;
  for (const auto& [lhs, rhs] : program.rules) sorted.emplace_back(to_string(lhs), &rhs);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (const auto& [lhs, rhs] : sorted) {
    out += std::string(lhs) + " -> " + join(*rhs) + "\n";
  }
  return out;
}

}  // namespace manner
