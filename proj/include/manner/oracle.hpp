#pragma once

#include "manner/adverb_dsl.hpp"
#include "manner/gridworld.hpp"
#include "manner/meta_grammar.hpp"

namespace manner {

/// Rule-based versions of the four modules: perception, navigation,
/// interaction and transformation. Composing them yields ground truth.

struct Percept {
  Position agent_position;
  Heading agent_heading = Heading::East;
  Position target_position;
  friend bool operator==(const Percept&, const Percept&) = default;
};

struct Plan {
  Mode mode = Mode::Egocentric;
  ActionSeq symbols;
  friend bool operator==(const Plan&, const Plan&) = default;
};

inline constexpr int kDefaultMaxDepth = 8;

/// Agent pose plus the position of the object the command refers to.
/// Propagates NoReferent / AmbiguousReferent.
Percept perceive(const Command& command, const WorldState& world);

/// Allocentric path from agent to target: all vertical moves then all
/// horizontal ones, or (zigzag) alternating axes starting vertically until
/// one runs out. Without an adverb, or for an egocentric one, the canonical
/// path is grounded from the agent heading.
Plan plan_navigation(const Percept& percept, const AdverbProgram* adverb);

/// Heading the agent has after following the plan from the percept's pose.
Heading arrival_heading(const Plan& plan, Heading start);

/// Push or pull the target until it meets a wall or another object. The
/// count is the number of free cells in the direction of motion, doubled for
/// heavy objects. walk needs no interaction.
ActionSeq plan_interaction(const Percept& percept, const WorldState& world, Verb verb,
                           Heading arrival, const Physics& physics = {});

/// Rewrites plan ++ interactions with the adverb program (if any) and grounds
/// the result from `start`. Propagates DepthExceeded.
ActionSeq transform(const Plan& plan, std::span<const Action> interactions,
                    const AdverbProgram* adverb, Heading start, int max_depth = kDefaultMaxDepth);

/// Every intermediate output of one oracle run.
struct SolveTrace {
  Percept percept;
  Plan plan;
  Heading arrival = Heading::East;
  ActionSeq interactions;
  ActionSeq output;
  const LexiconEntry* adverb = nullptr;
};

/// perceive -> plan_navigation -> plan_interaction -> transform.
/// Throws Error(UnknownAdverb) when the command's adverb is not in the lexicon.
SolveTrace solve_traced(const Command& command, const WorldState& world, const Lexicon& lexicon,
                        int max_depth = kDefaultMaxDepth, const Physics& physics = {});

inline ActionSeq solve(const Command& command, const WorldState& world, const Lexicon& lexicon,
                       int max_depth = kDefaultMaxDepth, const Physics& physics = {}) {
  return solve_traced(command, world, lexicon, max_depth, physics).output;
}

}  // namespace manner
