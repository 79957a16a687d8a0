#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "manner/rng.hpp"

namespace manner {

// ---------------------------------------------------------------------------
// Action vocabulary
// ---------------------------------------------------------------------------

/// Egocentric primitives are lowercase when serialized, allocentric
/// directions are capitalized; the two vocabularies never overlap.
enum class Action : std::uint8_t {
  Walk,
  Push,
  Pull,
  Stay,
  TurnLeft,
  TurnRight,
  North,
  South,
  East,
  West,
};

using ActionSeq = std::vector<Action>;

inline constexpr Action kAllActions[] = {Action::Walk,     Action::Push,      Action::Pull,
                                         Action::Stay,     Action::TurnLeft,  Action::TurnRight,
                                         Action::North,    Action::South,     Action::East,
                                         Action::West};
inline constexpr Action kAlloActions[] = {Action::North, Action::South, Action::East, Action::West};

constexpr bool is_allocentric(Action a) { return a >= Action::North; }
constexpr bool is_turn(Action a) { return a == Action::TurnLeft || a == Action::TurnRight; }
constexpr bool is_movement(Action a) {
  return a == Action::Walk || a == Action::Push || a == Action::Pull;
}

std::string_view to_string(Action a);
std::optional<Action> parse_action(std::string_view token);

/// Whitespace-separated symbols. Throws ParseError (line 1) on unknown tokens.
ActionSeq parse_actions(std::string_view text);
ActionSeq parse_actions(std::span<const std::string> tokens);
std::string join(std::span<const Action> seq);
std::vector<std::string> to_tokens(std::span<const Action> seq);

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

enum class Heading : std::uint8_t { North, East, South, West };

constexpr Heading turn_left(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 3) % 4); }
constexpr Heading turn_right(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 1) % 4); }
constexpr Heading opposite(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 2) % 4); }

std::string_view to_string(Heading h);
/// Accepts lowercase names ("east"). Throws Error(InvalidArgument).
Heading parse_heading(std::string_view name);

/// Heading that an allocentric symbol points to. `a` must be allocentric.
Heading direction_of(Action a);
Action allocentric_symbol(Heading h);

struct Offset {
  int drow = 0;
  int dcol = 0;
  friend bool operator==(const Offset&, const Offset&) = default;
};

/// Row 0 is the north edge: North is row-1, East is col+1.
constexpr Offset step(Heading h) {
  switch (h) {
    case Heading::North: return {-1, 0};
    case Heading::East: return {0, 1};
    case Heading::South: return {1, 0};
    case Heading::West: return {0, -1};
  }
  return {};
}

/// Net displacement of the allocentric symbols in a sequence; egocentric
/// symbols are ignored.
Offset allocentric_displacement(std::span<const Action> seq);

/// Net quarter-turn rotation of the turn symbols in a sequence, in [0, 4).
int net_rotation(std::span<const Action> seq);

struct Position {
  int row = 0;
  int col = 0;
  friend auto operator<=>(const Position&, const Position&) = default;
  Position operator+(Offset o) const { return {row + o.drow, col + o.dcol}; }
  Position operator-(Offset o) const { return {row - o.drow, col - o.dcol}; }
};

// ---------------------------------------------------------------------------
// World model
// ---------------------------------------------------------------------------

enum class Shape : std::uint8_t { Circle, Square, Cylinder };
enum class Color : std::uint8_t { Red, Blue, Green, Yellow };
enum class SizeAdjective : std::uint8_t { Small, Big };
enum class Verb : std::uint8_t { Walk, Push, Pull };

inline constexpr Shape kShapes[] = {Shape::Circle, Shape::Square, Shape::Cylinder};
inline constexpr Color kColors[] = {Color::Red, Color::Blue, Color::Green, Color::Yellow};
inline constexpr Verb kVerbs[] = {Verb::Walk, Verb::Push, Verb::Pull};
inline constexpr int kMinObjectSize = 1;
inline constexpr int kMaxObjectSize = 4;

std::string_view to_string(Shape s);
std::string_view to_string(Color c);
std::string_view to_string(SizeAdjective s);
std::string_view to_string(Verb v);
std::optional<Shape> parse_shape(std::string_view s);
std::optional<Color> parse_color(std::string_view s);
std::optional<SizeAdjective> parse_size_adjective(std::string_view s);
std::optional<Verb> parse_verb(std::string_view s);

struct GridObject {
  Shape shape = Shape::Circle;
  Color color = Color::Red;
  int size = 1;
  Position position;
  friend bool operator==(const GridObject&, const GridObject&) = default;
};

/// Weight classes for push/pull. Heavy objects need two consecutive
/// interactions per cell moved.
struct Physics {
  bool heavy_objects = true;
  int heavy_min_size = 3;

  bool is_heavy(int size) const { return heavy_objects && size >= heavy_min_size; }
  friend bool operator==(const Physics&, const Physics&) = default;
};

struct WorldState {
  int grid_size = 6;
  Position agent_position;
  Heading agent_heading = Heading::East;
  std::vector<GridObject> objects;
  std::size_t target_index = 0;

  bool in_bounds(Position p) const {
    return p.row >= 0 && p.col >= 0 && p.row < grid_size && p.col < grid_size;
  }
  const GridObject& target() const { return objects.at(target_index); }
  std::optional<std::size_t> object_at(Position p) const;

  /// Throws Error(InvalidArgument) when any invariant is broken.
  void validate() const;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct NounPhrase {
  std::optional<SizeAdjective> size;
  std::optional<Color> color;
  Shape shape = Shape::Circle;

  /// "a [size] [color] shape"
  std::vector<std::string> tokens() const;
  friend bool operator==(const NounPhrase&, const NounPhrase&) = default;
};

struct Command {
  Verb verb = Verb::Walk;
  NounPhrase object;
  std::vector<std::string> adverb;

  /// "walk to a ..." or "<verb> a ...", adverb tokens last.
  std::vector<std::string> tokens() const;
  std::string adverb_surface() const;

  static Command parse(std::span<const std::string> tokens);
  static Command parse(std::string_view text);

  friend bool operator==(const Command&, const Command&) = default;
};

struct Trajectory {
  /// Agent cells with consecutive duplicates collapsed; starts at the
  /// initial agent position.
  std::vector<Position> visited_cells;
  WorldState final_world;
  std::size_t length = 0;
};

/// Simulates an egocentric action sequence.
///
/// walk moves the agent along its heading (objects do not block walking);
/// push moves agent and target one cell along the heading, pull one cell
/// against it. A heavy object only moves on the second of each pair of
/// same-direction interactions; turns and stays between the two halves keep
/// the pending half-step, a walk or a different interaction drops it.
///
/// Throws Error with OutOfBounds, Blocked, IllegalInteraction or
/// AlloSymbolPresent.
Trajectory execute(const WorldState& world, std::span<const Action> actions,
                   const Physics& physics = {});

/// walk: agent stands on the target. push/pull: agent stands on the target
/// and the next cell in the direction of movement is a wall or an object.
bool goal_satisfied(Verb verb, const WorldState& final_world);

/// Index of the unique object the phrase denotes. small/big pick the
/// minimum/maximum size among the objects matching shape and color.
/// Throws Error(NoReferent) or Error(AmbiguousReferent).
std::size_t resolve_target(const NounPhrase& phrase, const WorldState& world);

struct SituationConfig {
  int grid_size = 6;
  int min_distractors = 0;
  int max_distractors = 4;
  bool allow_agent_on_target = false;
  int max_attempts = 100;
};

struct Situation {
  WorldState world;
  NounPhrase phrase;
};

/// Random world plus the shortest noun phrase that uniquely picks out its
/// target (ties between equally short phrases broken by the stream).
/// Throws Error(ExhaustedRetries).
Situation sample_situation(Rng& rng, const SituationConfig& config);

/// Multi-line ASCII rendering: one 4-character cell per column. The agent is
/// drawn as an arrow, objects as <color><shape><size>, the target starred.
std::string render_ascii(const WorldState& world);

}  // namespace manner
