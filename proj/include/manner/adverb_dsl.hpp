#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "manner/gridworld.hpp"

namespace manner {

/// Which vocabulary a program's plan-level rules target, and therefore which
/// kind of plan the navigation step must produce for it.
enum class Mode : std::uint8_t { Allocentric, Egocentric };
enum class PlanShape : std::uint8_t { Canonical, Zigzag };

std::string_view to_string(Mode m);
std::string_view to_string(PlanShape s);
std::optional<Mode> parse_mode(std::string_view s);
std::optional<PlanShape> parse_plan_shape(std::string_view s);

struct RewriteRule {
  Action lhs = Action::Walk;
  ActionSeq rhs;
  friend bool operator==(const RewriteRule&, const RewriteRule&) = default;
};

/// A named set of single-symbol rewrite rules: one adverb's manner.
///
/// Rules are keyed by their left-hand side, so rewriting is deterministic.
/// A program may carry rules over both vocabularies because the sequence it
/// rewrites is the plan followed by egocentric interactions.
struct AdverbProgram {
  std::vector<std::string> name;
  Mode mode = Mode::Egocentric;
  int passes = 1;
  PlanShape plan_shape = PlanShape::Canonical;
  std::map<Action, ActionSeq> rules;

  std::string surface() const;
  const ActionSeq* rule_for(Action lhs) const;

  /// Throws Error(DuplicateLhs) if lhs already has a rule.
  void add_rule(Action lhs, ActionSeq rhs);

  /// Throws Error(InvalidProgram) on an empty rhs, passes < 1, an empty name,
  /// an egocentric program with allocentric lhs or zigzag shape, or an
  /// allocentric canonical program without allocentric rules.
  void validate() const;

  friend bool operator==(const AdverbProgram&, const AdverbProgram&) = default;
};

/// One parallel L-system step: every symbol with a rule is replaced by its
/// rhs, all others are copied. Freshly produced symbols are not revisited.
ActionSeq apply_pass(const AdverbProgram& program, std::span<const Action> seq);

/// Runs program.passes parallel steps.
/// Throws Error(DepthExceeded) when program.passes > max_depth.
ActionSeq apply_program(const AdverbProgram& program, std::span<const Action> seq, int max_depth);

struct Grounded {
  ActionSeq actions;
  Heading heading = Heading::East;
};

/// Rewrites allocentric symbols into egocentric primitives while tracking
/// the heading: each direction becomes the shortest turn into it (a half
/// turn is two turn_left) followed by walk. Egocentric symbols pass through.
Grounded ground_tracked(std::span<const Action> seq, Heading start);

inline ActionSeq ground(std::span<const Action> seq, Heading start) {
  return ground_tracked(seq, start).actions;
}

/// The four manners of the original benchmark, in the order
/// "while spinning", "cautiously", "while zigzagging", "hesitantly".
const std::vector<AdverbProgram>& builtin_adverbs();
const AdverbProgram* find_builtin(std::string_view surface);

/// Equal rule sets, mode, passes and plan shape. Names are ignored.
bool programs_equal(const AdverbProgram& a, const AdverbProgram& b);

/// Text format:
///
///   # comment
///   name: while spinning
///   mode: allocentric
///   passes: 1
///   plan_shape: canonical
///   North -> turn_left turn_left turn_left turn_left North
///
/// `passes` and `plan_shape` default to 1 and canonical. Throws ParseError
/// (with location) for malformed text, ParseError of kind DuplicateLhs for a
/// repeated lhs, and Error(InvalidProgram) for invariant violations.
AdverbProgram parse_program(std::string_view text);

/// Canonical text: the four header lines in fixed order, then one rule per
/// line sorted by lhs symbol name.
std::string serialize_program(const AdverbProgram& program);

}  // namespace manner
