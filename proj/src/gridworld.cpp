#include "manner/gridworld.hpp"

#include <algorithm>
#include <cctype>
#include <array>
#include <sstream>

#include "manner/error.hpp"

namespace manner {

namespace {

constexpr std::array<std::string_view, 10> kActionNames = {
    "walk", "push", "pull", "stay", "turn_left", "turn_right", "North", "South", "East", "West"};

std::vector<std::string> split_ws(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

}  // namespace

std::string_view to_string(Action a) { return kActionNames[static_cast<std::size_t>(a)]; }

std::optional<Action> parse_action(std::string_view token) {
  for (std::size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == token) return static_cast<Action>(i);
  }
  return std::nullopt;
}

ActionSeq parse_actions(std::string_view text) {
  ActionSeq out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) {
      auto token = text.substr(i, j - i);
      auto a = parse_action(token);
      if (!a) {
        throw ParseError(ErrorKind::ParseError, 1, i + 1,
                         "unknown action symbol '" + std::string(token) + "'");
      }
      out.push_back(*a);
    }
    i = j;
  }
  return out;
}

ActionSeq parse_actions(std::span<const std::string> tokens) {
  ActionSeq out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto a = parse_action(tokens[i]);
    if (!a) {
      throw ParseError(ErrorKind::ParseError, 1, i + 1,
                       "unknown action symbol '" + tokens[i] + "'");
    }
    out.push_back(*a);
  }
  return out;
}

std::string join(std::span<const Action> seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out += ' ';
    out += to_string(seq[i]);
  }
  return out;
}

std::vector<std::string> to_tokens(std::span<const Action> seq) {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (Action a : seq) out.emplace_back(to_string(a));
  return out;
}

std::string_view to_string(Heading h) {
  switch (h) {
    case Heading::North: return "north";
    case Heading::East: return "east";
    case Heading::South: return "south";
    case Heading::West: return "west";
  }
  return "?";
}

Heading parse_heading(std::string_view name) {
  for (Heading h : {Heading::North, Heading::East, Heading::South, Heading::West}) {
    if (to_string(h) == name) return h;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown heading '" + std::string(name) + "'");
}

Heading direction_of(Action a) {
  switch (a) {
    case Action::North: return Heading::North;
    case Action::South: return Heading::South;
    case Action::East: return Heading::East;
    case Action::West: return Heading::West;
    default: break;
  }
  throw Error(ErrorKind::InvalidArgument, "'" + std::string(to_string(a)) + "' has no direction");
}

Action allocentric_symbol(Heading h) {
  switch (h) {
    case Heading::North: return Action::North;
    case Heading::East: return Action::East;
    case Heading::South: return Action::South;
    case Heading::West: return Action::West;
  }
  return Action::North;
}

Offset allocentric_displacement(std::span<const Action> seq) {
  Offset total;
  for (Action a : seq) {
    if (!is_allocentric(a)) continue;
    Offset o = step(direction_of(a));
    total.drow += o.drow;
    total.dcol += o.dcol;
  }
  return total;
}

int net_rotation(std::span<const Action> seq) {
  int r = 0;
  for (Action a : seq) {
    if (a == Action::TurnRight) r += 1;
    if (a == Action::TurnLeft) r += 3;
  }
  return r % 4;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::Circle: return "circle";
    case Shape::Square: return "square";
    case Shape::Cylinder: return "cylinder";
  }
  return "?";
}

std::string_view to_string(Color c) {
  switch (c) {
    case Color::Red: return "red";
    case Color::Blue: return "blue";
    case Color::Green: return "green";
    case Color::Yellow: return "yellow";
  }
  return "?";
}

std::string_view to_string(SizeAdjective s) { return s == SizeAdjective::Small ? "small" : "big"; }

std::string_view to_string(Verb v) {
  switch (v) {
    case Verb::Walk: return "walk";
    case Verb::Push: return "push";
    case Verb::Pull: return "pull";
  }
  return "?";
}

std::optional<Shape> parse_shape(std::string_view s) {
  for (Shape x : kShapes)
    if (to_string(x) == s) return x;
  return std::nullopt;
}

std::optional<Color> parse_color(std::string_view s) {
  for (Color x : kColors)
    if (to_string(x) == s) return x;
  return std::nullopt;
}

std::optional<SizeAdjective> parse_size_adjective(std::string_view s) {
  if (s == "small") return SizeAdjective::Small;
  if (s == "big") return SizeAdjective::Big;
  return std::nullopt;
}

std::optional<Verb> parse_verb(std::string_view s) {
  for (Verb x : kVerbs)
    if (to_string(x) == s) return x;
  return std::nullopt;
}

std::optional<std::size_t> WorldState::object_at(Position p) const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].position == p) return i;
  }
  return std::nullopt;
}

void WorldState::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidArgument, m); };
  if (grid_size < 2) fail("grid_size must be at least 2");
  if (!in_bounds(agent_position)) fail("agent position out of bounds");
  if (target_index >= objects.size()) fail("target_index does not name an object");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    if (!in_bounds(o.position)) fail("object " + std::to_string(i) + " out of bounds");
    if (o.size < kMinObjectSize || o.size > kMaxObjectSize)
      fail("object " + std::to_string(i) + " has size outside 1..4");
    for (std::size_t j = 0; j < i; ++j) {
      if (objects[j].position == o.position)
        fail("objects " + std::to_string(j) + " and " + std::to_string(i) + " share a cell");
    }
  }
}

std::vector<std::string> NounPhrase::tokens() const {
  std::vector<std::string> out{"a"};
  if (size) out.emplace_back(to_string(*size));
  if (color) out.emplace_back(to_string(*color));
  out.emplace_back(to_string(shape));
  return out;
}

std::vector<std::string> Command::tokens() const {
  std::vector<std::string> out{std::string(to_string(verb))};
  if (verb == Verb::Walk) out.emplace_back("to");
  for (auto& t : object.tokens()) out.push_back(std::move(t));
  out.insert(out.end(), adverb.begin(), adverb.end());
  return out;
}

std::string Command::adverb_surface() const {
  std::string out;
  for (std::size_t i = 0; i < adverb.size(); ++i) {
    if (i) out += ' ';
    out += adverb[i];
  }
  return out;
}

Command Command::parse(std::span<const std::string> tokens) {
  std::size_t i = 0;
  auto fail = [&](const std::string& what) -> Command {
    throw ParseError(ErrorKind::ParseError, 1, i + 1, what);
  };
  auto at = [&](std::size_t k) -> std::string_view {
    return k < tokens.size() ? std::string_view(tokens[k]) : std::string_view();
  };

  Command cmd;
  auto verb = parse_verb(at(i));
  if (!verb) return fail("expected a verb (walk, push, pull)");
  cmd.verb = *verb;
  ++i;
  if (cmd.verb == Verb::Walk) {
    if (at(i) != "to") return fail("expected 'to' after 'walk'");
    ++i;
  }
  if (at(i) != "a") return fail("expected 'a'");
  ++i;
  if (auto s = parse_size_adjective(at(i))) {
    cmd.object.size = s;
    ++i;
  }
  if (auto c = parse_color(at(i))) {
    cmd.object.color = c;
    ++i;
  }
  auto shape = parse_shape(at(i));
  if (!shape) return fail("expected a shape (circle, square, cylinder)");
  cmd.object.shape = *shape;
  ++i;
  cmd.adverb.assign(tokens.begin() + static_cast<std::ptrdiff_t>(i), tokens.end());
  return cmd;
}

Command Command::parse(std::string_view text) {
  auto tokens = split_ws(text);
  for (auto& t : tokens) {
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    while (!t.empty() && (t.back() == '.' || t.back() == ',')) t.pop_back();
  }
  std::erase_if(tokens, [](const std::string& t) { return t.empty(); });
  return parse(std::span<const std::string>(tokens));
}

// ---------------------------------------------------------------------------

Trajectory execute(const WorldState& world, std::span<const Action> actions,
                   const Physics& physics) {
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (is_allocentric(actions[i])) {
      throw Error(ErrorKind::AlloSymbolPresent, "allocentric symbol '" +
                                                    std::string(to_string(actions[i])) +
                                                    "' at position " + std::to_string(i));
    }
  }

  Trajectory traj{{world.agent_position}, world, actions.size()};
  WorldState& w = traj.final_world;

  struct Pending {
    bool active = false;
    Action verb = Action::Push;
    Heading heading = Heading::North;
  } pending;

  for (std::size_t i = 0; i < actions.size(); ++i) {
    const Action a = actions[i];
    const std::string where = " (action " + std::to_string(i) + ")";
    switch (a) {
      case Action::Walk: {
        Position next = w.agent_position + step(w.agent_heading);
        if (!w.in_bounds(next)) throw Error(ErrorKind::OutOfBounds, "walk leaves the grid" + where);
        w.agent_position = next;
        pending.active = false;
        break;
      }
      case Action::TurnLeft: w.agent_heading = turn_left(w.agent_heading); break;
      case Action::TurnRight: w.agent_heading = turn_right(w.agent_heading); break;
      case Action::Stay: break;
      case Action::Push:
      case Action::Pull: {
        GridObject& target = w.objects.at(w.target_index);
        if (w.agent_position != target.position) {
          throw Error(ErrorKind::IllegalInteraction,
                      std::string(to_string(a)) + " while not on the target cell" + where);
        }
        if (physics.is_heavy(target.size)) {
          const bool completes =
              pending.active && pending.verb == a && pending.heading == w.agent_heading;
          if (!completes) {
            pending = {true, a, w.agent_heading};
            break;
          }
          pending.active = false;
        }
        const Heading dir = a == Action::Push ? w.agent_heading : opposite(w.agent_heading);
        const Position dest = target.position + step(dir);
        if (!w.in_bounds(dest)) {
          throw Error(ErrorKind::OutOfBounds, std::string(to_string(a)) + " leaves the grid" + where);
        }
        if (auto other = w.object_at(dest); other && *other != w.target_index) {
          throw Error(ErrorKind::Blocked, std::string(to_string(a)) + " into an occupied cell" + where);
        }
        target.position = dest;
        w.agent_position = dest;
        break;
      }
      default: break;
    }
    if (w.agent_position != traj.visited_cells.back()) traj.visited_cells.push_back(w.agent_position);
  }
  return traj;
}

bool goal_satisfied(Verb verb, const WorldState& w) {
  const GridObject& target = w.target();
  if (w.agent_position != target.position) return false;
  if (verb == Verb::Walk) return true;
  const Heading dir = verb == Verb::Push ? w.agent_heading : opposite(w.agent_heading);
  const Position beyond = target.position + step(dir);
  return !w.in_bounds(beyond) || w.object_at(beyond).has_value();
}

std::size_t resolve_target(const NounPhrase& phrase, const WorldState& world) {
  std::vector<std::size_t> matches;
  for (std::size_t i = 0; i < world.objects.size(); ++i) {
    const auto& o = world.objects[i];
    if (o.shape != phrase.shape) continue;
    if (phrase.color && o.color != *phrase.color) continue;
    matches.push_back(i);
  }
  const auto describe = [&] {
    std::string s;
    for (const auto& t : phrase.tokens()) s += (s.empty() ? "" : " ") + t;
    return s;
  };
  if (matches.empty()) throw Error(ErrorKind::NoReferent, "nothing matches '" + describe() + "'");
  if (phrase.size) {
    int extreme = world.objects[matches.front()].size;
    for (auto i : matches) {
      int s = world.objects[i].size;
      extreme = *phrase.size == SizeAdjective::Small ? std::min(extreme, s) : std::max(extreme, s);
    }
    std::erase_if(matches, [&](std::size_t i) { return world.objects[i].size != extreme; });
  }
  if (matches.size() > 1) {
    throw Error(ErrorKind::AmbiguousReferent,
                std::to_string(matches.size()) + " objects match '" + describe() + "'");
  }
  return matches.front();
}

namespace {

bool resolves_to(const NounPhrase& phrase, const WorldState& world, std::size_t index) {
  try {
    return resolve_target(phrase, world) == index;
  } catch (const Error&) {
    return false;
  }
}

std::vector<NounPhrase> unique_descriptions(const WorldState& world) {
  const GridObject& t = world.target();
  std::vector<NounPhrase> forms;
  forms.push_back({std::nullopt, std::nullopt, t.shape});
  forms.push_back({std::nullopt, t.color, t.shape});
  for (auto adj : {SizeAdjective::Small, SizeAdjective::Big}) {
    forms.push_back({adj, std::nullopt, t.shape});
    forms.push_back({adj, t.color, t.shape});
  }
  std::vector<NounPhrase> valid;
  for (const auto& f : forms) {
    if (resolves_to(f, world, world.target_index)) valid.push_back(f);
  }
  return valid;
}

GridObject random_object(Rng& rng, Position p) {
  GridObject o;
  o.shape = kShapes[rng.index(std::size(kShapes))];
  o.color = kColors[rng.index(std::size(kColors))];
  o.size = static_cast<int>(rng.uniform(kMinObjectSize, kMaxObjectSize));
  o.position = p;
  return o;
}

}  // namespace

Situation sample_situation(Rng& rng, const SituationConfig& cfg) {
  if (cfg.grid_size < 2) throw Error(ErrorKind::InvalidArgument, "grid_size must be at least 2");
  if (cfg.min_distractors < 0 || cfg.max_distractors < cfg.min_distractors) {
    throw Error(ErrorKind::InvalidArgument, "invalid distractor range");
  }
  const int cells = cfg.grid_size * cfg.grid_size;

  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    WorldState w;
    w.grid_size = cfg.grid_size;
    auto random_cell = [&] {
      return Position{static_cast<int>(rng.uniform(0, cfg.grid_size - 1)),
                      static_cast<int>(rng.uniform(0, cfg.grid_size - 1))};
    };
    w.agent_position = random_cell();
    w.agent_heading = static_cast<Heading>(rng.uniform(0, 3));

    const int distractors = static_cast<int>(rng.uniform(cfg.min_distractors, cfg.max_distractors));
    if (distractors + 2 > cells) continue;

    std::vector<Position> free;
    for (int r = 0; r < cfg.grid_size; ++r)
      for (int c = 0; c < cfg.grid_size; ++c)
        if (Position{r, c} != w.agent_position) free.push_back({r, c});

    Position target_cell = w.agent_position;
    if (!cfg.allow_agent_on_target || !rng.bernoulli(1.0 / cells)) {
      std::size_t k = rng.index(free.size());
      target_cell = free[k];
      free.erase(free.begin() + static_cast<std::ptrdiff_t>(k));
    }
    w.objects.push_back(random_object(rng, target_cell));
    for (int d = 0; d < distractors; ++d) {
      std::size_t k = rng.index(free.size());
      w.objects.push_back(random_object(rng, free[k]));
      free.erase(free.begin() + static_cast<std::ptrdiff_t>(k));
    }
    // Move the target to a random slot so its index carries no information.
    std::size_t slot = rng.index(w.objects.size());
    std::swap(w.objects[0], w.objects[slot]);
    w.target_index = slot;

    auto valid = unique_descriptions(w);
    if (valid.empty()) continue;
    std::size_t shortest = valid.front().tokens().size();
    for (const auto& v : valid) shortest = std::min(shortest, v.tokens().size());
    std::erase_if(valid, [&](const NounPhrase& v) { return v.tokens().size() != shortest; });
    return {std::move(w), valid[rng.index(valid.size())]};
  }
  throw Error(ErrorKind::ExhaustedRetries,
              "no uniquely describable target after " + std::to_string(cfg.max_attempts) + " attempts");
}

std::string render_ascii(const WorldState& world) {
  constexpr std::string_view kShapeLetters = "csy";
  constexpr std::string_view kColorLetters = "RBGY";
  std::ostringstream out;
  std::string rule = "+";
  for (int c = 0; c < world.grid_size; ++c) rule += "-----+";
  out << rule << '\n';
  for (int r = 0; r < world.grid_size; ++r) {
    out << '|';
    for (int c = 0; c < world.grid_size; ++c) {
      std::string cell = "     ";
      if (world.agent_position == Position{r, c}) {
        constexpr std::string_view arrows = "^>v<";
        cell[0] = arrows[static_cast<std::size_t>(world.agent_heading)];
      }
      if (auto i = world.object_at({r, c})) {
        const auto& o = world.objects[*i];
        cell[1] = kColorLetters[static_cast<std::size_t>(o.color)];
        cell[2] = kShapeLetters[static_cast<std::size_t>(o.shape)];
        cell[3] = static_cast<char>('0' + o.size);
        if (*i == world.target_index) cell[4] = '*';
      }
      out << cell << '|';
    }
    out << '\n' << rule << '\n';
  }
  return out.str();
}

}  // namespace manner
