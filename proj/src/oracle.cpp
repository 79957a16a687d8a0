#include "manner/oracle.hpp"

#include <cstdlib>

#include "manner/error.hpp"

namespace manner {

Percept perceive(const Command& command, const WorldState& world) {
  const std::size_t target = resolve_target(command.object, world);
  return {world.agent_position, world.agent_heading, world.objects[target].position};
}

Plan plan_navigation(const Percept& percept, const AdverbProgram* adverb) {
  const int drow = percept.target_position.row - percept.agent_position.row;
  const int dcol = percept.target_position.col - percept.agent_position.col;
  const Action vertical = drow < 0 ? Action::North : Action::South;
  const Action horizontal = dcol < 0 ? Action::West : Action::East;
  int v = std::abs(drow);
  int h = std::abs(dcol);

  ActionSeq allo;
  allo.reserve(static_cast<std::size_t>(v + h));
  if (adverb && adverb->plan_shape == PlanShape::Zigzag) {
    while (v > 0 && h > 0) {
      allo.push_back(vertical);
      allo.push_back(horizontal);
      --v;
      --h;
    }
  }
  allo.insert(allo.end(), static_cast<std::size_t>(v), vertical);
  allo.insert(allo.end(), static_cast<std::size_t>(h), horizontal);

  if (adverb && adverb->mode == Mode::Allocentric) return {Mode::Allocentric, std::move(allo)};
  return {Mode::Egocentric, ground(allo, percept.agent_heading)};
}

Heading arrival_heading(const Plan& plan, Heading start) {
  return ground_tracked(plan.symbols, start).heading;
}

ActionSeq plan_interaction(const Percept& percept, const WorldState& world, Verb verb,
                           Heading arrival, const Physics& physics) {
  if (verb == Verb::Walk) return {};
  auto target = world.object_at(percept.target_position);
  if (!target) {
    throw Error(ErrorKind::IllegalInteraction, "no object at the perceived target position");
  }
  const Heading dir = verb == Verb::Push ? arrival : opposite(arrival);
  int free_cells = 0;
  for (Position p = percept.target_position + step(dir);
       world.in_bounds(p) && !world.object_at(p).has_value(); p = p + step(dir)) {
    ++free_cells;
  }
  const int per_cell = physics.is_heavy(world.objects[*target].size) ? 2 : 1;
  return ActionSeq(static_cast<std::size_t>(free_cells * per_cell),
                   verb == Verb::Push ? Action::Push : Action::Pull);
}

ActionSeq transform(const Plan& plan, std::span<const Action> interactions,
                    const AdverbProgram* adverb, Heading start, int max_depth) {
  for (Action a : interactions) {
    if (is_allocentric(a)) {
      throw Error(ErrorKind::AlloSymbolPresent, "interactions must be egocentric");
    }
  }
  ActionSeq seq = plan.symbols;
  seq.insert(seq.end(), interactions.begin(), interactions.end());
  if (adverb) seq = apply_program(*adverb, seq, max_depth);
  return ground(seq, start);
}

SolveTrace solve_traced(const Command& command, const WorldState& world, const Lexicon& lexicon,
                        int max_depth, const Physics& physics) {
  SolveTrace t;
  if (!command.adverb.empty()) {
    t.adverb = lexicon.find(command.adverb_surface());
    if (!t.adverb) {
      throw Error(ErrorKind::UnknownAdverb, "'" + command.adverb_surface() + "'");
    }
  }
  const AdverbProgram* program = t.adverb ? &t.adverb->program : nullptr;
  t.percept = perceive(command, world);
  t.plan = plan_navigation(t.percept, program);
  t.arrival = arrival_heading(t.plan, t.percept.agent_heading);
  t.interactions = plan_interaction(t.percept, world, command.verb, t.arrival, physics);
  t.output = transform(t.plan, t.interactions, program, t.percept.agent_heading, max_depth);
  return t;
}

}  // namespace manner
