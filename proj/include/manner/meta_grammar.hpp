#pragma once

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "manner/adverb_dsl.hpp"
#include "manner/rng.hpp"

namespace manner {

enum class AdverbType : std::uint8_t { Spinning, Cautiously, Zigzag, Detour };

inline constexpr AdverbType kAdverbTypes[] = {AdverbType::Spinning, AdverbType::Cautiously,
                                              AdverbType::Zigzag, AdverbType::Detour};

/// "spinning_type", "cautiously_type", "zigzag_type", "detour_type"
std::string_view to_string(AdverbType t);
/// Accepts the full name or the short form ("spinning").
std::optional<AdverbType> parse_adverb_type(std::string_view s);

struct MetaGrammarConfig {
  /// Indexed by AdverbType. Zigzag programs are never sampled.
  std::array<double, 4> type_weights = {0.40, 0.30, 0.0, 0.30};
  int prefix_min = 2;
  int prefix_max = 8;
  int detour_rhs_max = 5;
  int max_rejects = 1000;

  double weight(AdverbType t) const { return type_weights[static_cast<std::size_t>(t)]; }
  /// Throws Error(InvalidArgument).
  void validate() const;
  friend bool operator==(const MetaGrammarConfig&, const MetaGrammarConfig&) = default;
};

struct LexiconEntry {
  std::vector<std::string> surface;
  AdverbProgram program;
  AdverbType type = AdverbType::Spinning;

  std::string surface_text() const;
  friend bool operator==(const LexiconEntry&, const LexiconEntry&) = default;
};

/// True when replacing `lhs` by `rhs` is a legal detour: both allocentric,
/// 1 < |rhs| <= max_len, and the rhs has the same net displacement.
bool is_valid_detour_rule(Action lhs, std::span<const Action> rhs, int max_len);

/// Samples a program of the given type. The returned program has an empty
/// name. Throws Error(InvalidArgument) for zigzag_type.
///
/// spinning_type and cautiously_type share one turn-only prefix with net
/// rotation zero, so wrapped interactions still face the arrival heading.
/// Detour right-hand sides are cancelling direction pairs in random order
/// followed by the lhs itself, so the agent arrives facing the same way.
AdverbProgram sample_program(Rng& rng, AdverbType type, const MetaGrammarConfig& config);

/// The unique taxonomy type of a program. Throws Error(Unclassifiable).
AdverbType classify_program(const AdverbProgram& program);

/// Pseudoword adverb names: allocentric "while <word>ing", egocentric
/// "<word>ly". Remembers every name it produced (and the builtins, plus any
/// names registered with reserve()) and never repeats one.
class NameGenerator {
 public:
  NameGenerator();
  void reserve(const std::string& surface) { used_.insert(surface); }
  std::vector<std::string> next(Rng& rng, Mode mode);

 private:
  std::set<std::string> used_;
};

/// One-off name draw; collision-free only against the builtins.
std::vector<std::string> generate_name(Rng& rng, Mode mode);

/// Samples exactly `count` entries. Type quotas follow the configured weights
/// (largest-remainder rounding) and are shuffled across slots. A program equal
/// to a builtin, to a fixed program or to an earlier entry is rejected and
/// redrawn. Fixed programs are not part of the result.
/// Throws Error(RejectBudgetExceeded) after config.max_rejects consecutive
/// rejections.
std::vector<LexiconEntry> sample_registry(Rng& rng, int count, const MetaGrammarConfig& config,
                                          std::span<const LexiconEntry> fixed = {});

/// Registry file: program texts separated by lines containing only "---",
/// in slot order.
std::string serialize_registry(std::span<const LexiconEntry> entries);
std::vector<LexiconEntry> parse_registry(std::string_view text);

/// Builtins plus registry entries, looked up by surface text.
class Lexicon {
 public:
  Lexicon();
  explicit Lexicon(std::span<const LexiconEntry> registry);

  void add(LexiconEntry entry);
  const LexiconEntry* find(std::string_view surface) const;
  const std::vector<LexiconEntry>& entries() const { return entries_; }
  bool is_builtin(std::string_view surface) const { return find_builtin(surface) != nullptr; }

 private:
  std::vector<LexiconEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

}  // namespace manner
