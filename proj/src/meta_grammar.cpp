#include "manner/meta_grammar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "manner/error.hpp"

namespace manner {

std::string_view to_string(AdverbType t) {
  switch (t) {
    case AdverbType::Spinning: return "spinning_type";
    case AdverbType::Cautiously: return "cautiously_type";
    case AdverbType::Zigzag: return "zigzag_type";
    case AdverbType::Detour: return "detour_type";
  }
  return "?";
}

std::optional<AdverbType> parse_adverb_type(std::string_view s) {
  for (AdverbType t : kAdverbTypes) {
    std::string_view full = to_string(t);
    if (s == full || s == full.substr(0, full.size() - 5)) return t;
  }
  return std::nullopt;
}

void MetaGrammarConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::InvalidArgument, m); };
  double sum = 0;
  for (double w : type_weights) {
    if (!(w >= 0)) fail("type weights must be nonnegative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail("type weights must sum to 1");
  if (weight(AdverbType::Zigzag) != 0) fail("zigzag_type cannot be sampled; its weight must be 0");
  if (prefix_min < 1 || prefix_max < prefix_min) fail("invalid prefix length range");
  if (prefix_max < 2 || (prefix_min == prefix_max && prefix_min % 2 != 0))
    fail("prefix length range must contain an even length (net-zero turn sequences)");
  if (detour_rhs_max < 3) fail("detour_rhs_max must be at least 3");
  if (max_rejects < 1) fail("max_rejects must be positive");
}

std::string LexiconEntry::surface_text() const {
  std::string out;
  for (std::size_t i = 0; i < surface.size(); ++i) {
    if (i) out += ' ';
    out += surface[i];
  }
  return out;
}

bool is_valid_detour_rule(Action lhs, std::span<const Action> rhs, int max_len) {
  if (!is_allocentric(lhs)) return false;
  if (rhs.size() <= 1 || rhs.size() > static_cast<std::size_t>(max_len)) return false;
  if (!std::all_of(rhs.begin(), rhs.end(), is_allocentric)) return false;
  const Action self[] = {lhs};
  return allocentric_displacement(rhs) == allocentric_displacement(self);
}

namespace {

ActionSeq sample_net_zero_turns(Rng& rng, const MetaGrammarConfig& cfg) {
  std::vector<int> lengths;
  for (int n = std::max(cfg.prefix_min, 2); n <= cfg.prefix_max; ++n)
    if (n % 2 == 0) lengths.push_back(n);
  const int len = lengths[rng.index(lengths.size())];
  ActionSeq turns(static_cast<std::size_t>(len));
  for (int attempt = 0; attempt < 64; ++attempt) {
    for (auto& t : turns) t = rng.bernoulli(0.5) ? Action::TurnLeft : Action::TurnRight;
    if (net_rotation(turns) == 0) return turns;
  }
  for (std::size_t i = 0; i < turns.size(); ++i)
    turns[i] = i % 2 == 0 ? Action::TurnLeft : Action::TurnRight;
  return turns;
}

ActionSeq with_self(const ActionSeq& prefix, Action self) {
  ActionSeq out = prefix;
  out.push_back(self);
  return out;
}

bool is_in_place(Action a) { return is_turn(a) || a == Action::Stay; }

// rhs = before + lhs + after with before/after in-place and rotation-neutral.
bool is_wrapped_in_place(Action lhs, const ActionSeq& rhs) {
  auto it = std::find(rhs.begin(), rhs.end(), lhs);
  if (it == rhs.end()) return false;
  std::span<const Action> before(rhs.begin(), it);
  std::span<const Action> after(it + 1, rhs.end());
  auto ok = [](std::span<const Action> part) {
    return std::all_of(part.begin(), part.end(), is_in_place) && net_rotation(part) == 0;
  };
  return ok(before) && ok(after);
}

// rhs = turns + lhs
bool is_turn_prefixed(Action lhs, const ActionSeq& rhs) {
  if (rhs.size() < 2 || rhs.back() != lhs) return false;
  return std::all_of(rhs.begin(), rhs.end() - 1, is_turn);
}

}  // namespace

AdverbProgram sample_program(Rng& rng, AdverbType type, const MetaGrammarConfig& cfg) {
  AdverbProgram p;
  switch (type) {
    case AdverbType::Spinning: {
      p.mode = Mode::Allocentric;
      const ActionSeq prefix = sample_net_zero_turns(rng, cfg);
      for (Action d : kAlloActions) p.add_rule(d, with_self(prefix, d));
      p.add_rule(Action::Push, with_self(prefix, Action::Push));
      p.add_rule(Action::Pull, with_self(prefix, Action::Pull));
      break;
    }
    case AdverbType::Cautiously: {
      p.mode = Mode::Egocentric;
      const ActionSeq prefix = sample_net_zero_turns(rng, cfg);
      for (Action m : {Action::Walk, Action::Push, Action::Pull}) p.add_rule(m, with_self(prefix, m));
      break;
    }
    case AdverbType::Detour: {
      p.mode = Mode::Allocentric;
      std::vector<Action> chosen;
      while (chosen.empty()) {
        for (Action d : kAlloActions)
          if (rng.bernoulli(0.5)) chosen.push_back(d);
      }
      const int max_pairs = (cfg.detour_rhs_max - 1) / 2;
      for (Action d : chosen) {
        const int pairs = static_cast<int>(rng.uniform(1, max_pairs));
        ActionSeq rhs;
        for (int i = 0; i < pairs; ++i) {
          const Action x = kAlloActions[rng.index(4)];
          rhs.push_back(x);
          rhs.push_back(allocentric_symbol(opposite(direction_of(x))));
        }
        rng.shuffle(std::span<Action>(rhs));
        rhs.push_back(d);
        p.add_rule(d, std::move(rhs));
      }
      break;
    }
    case AdverbType::Zigzag:
      throw Error(ErrorKind::InvalidArgument, "zigzag_type programs are not sampled");
  }
  return p;
}

AdverbType classify_program(const AdverbProgram& p) {
  auto fail = [&](const std::string& why) -> AdverbType {
    throw Error(ErrorKind::Unclassifiable, "'" + p.surface() + "': " + why);
  };
  if (p.plan_shape == PlanShape::Zigzag) return AdverbType::Zigzag;
  if (p.rules.empty()) return fail("no rules");

  if (p.mode == Mode::Egocentric) {
    bool changes = false;
    for (const auto& [lhs, rhs] : p.rules) {
      if (!is_movement(lhs) || !is_wrapped_in_place(lhs, rhs))
        return fail("egocentric rule for '" + std::string(to_string(lhs)) +
                    "' is not an in-place wrapper of a movement");
      changes = changes || rhs.size() > 1;
    }
    if (!changes) return fail("rules are identities");
    return AdverbType::Cautiously;
  }

  bool spinning = true;
  bool detour = true;
  for (const auto& [lhs, rhs] : p.rules) {
    if (is_allocentric(lhs)) {
      spinning = spinning && is_turn_prefixed(lhs, rhs);
      detour = detour && is_valid_detour_rule(lhs, rhs, static_cast<int>(rhs.size()));
    } else {
      detour = false;
      const bool interaction = lhs == Action::Push || lhs == Action::Pull;
      spinning = spinning && interaction && rhs.back() == lhs &&
                 std::all_of(rhs.begin(), rhs.end() - 1, is_turn) && net_rotation(rhs) == 0;
    }
  }
  if (spinning) return AdverbType::Spinning;
  if (detour) return AdverbType::Detour;
  return fail("allocentric rules are neither turn prefixes nor displacement-preserving detours");
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kConsonants = "bdfgklmnprstvz";
constexpr std::string_view kVowels = "aeiou";

std::string pseudoword(Rng& rng) {
  std::string w;
  const int syllables = static_cast<int>(rng.uniform(2, 3));
  for (int i = 0; i < syllables; ++i) {
    w += kConsonants[rng.index(kConsonants.size())];
    w += kVowels[rng.index(kVowels.size())];
  }
  w += kConsonants[rng.index(kConsonants.size())];
  return w;
}

std::vector<std::string> name_for(const std::string& word, Mode mode) {
  if (mode == Mode::Allocentric) return {"while", word + "ing"};
  return {word + "ly"};
}

std::string joined(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) out += (out.empty() ? "" : " ") + t;
  return out;
}

}  // namespace

NameGenerator::NameGenerator() {
  for (const auto& p : builtin_adverbs()) used_.insert(p.surface());
}

std::vector<std::string> NameGenerator::next(Rng& rng, Mode mode) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    auto name = name_for(pseudoword(rng), mode);
    if (used_.insert(joined(name)).second) return name;
  }
  throw Error(ErrorKind::ExhaustedRetries, "pseudoword space exhausted");
}

std::vector<std::string> generate_name(Rng& rng, Mode mode) {
  NameGenerator gen;
  return gen.next(rng, mode);
}

std::vector<LexiconEntry> sample_registry(Rng& rng, int count, const MetaGrammarConfig& cfg,
                                          std::span<const LexiconEntry> fixed) {
  if (count < 0) throw Error(ErrorKind::InvalidArgument, "registry size must be nonnegative");
  cfg.validate();

  // Largest-remainder quotas.
  std::vector<AdverbType> slots;
  {
    std::array<int, 4> quota{};
    std::array<double, 4> remainder{};
    int assigned = 0;
    for (std::size_t t = 0; t < 4; ++t) {
      const double exact = cfg.type_weights[t] * count;
      quota[t] = static_cast<int>(std::floor(exact));
      remainder[t] = exact - quota[t];
      assigned += quota[t];
    }
    std::array<std::size_t, 4> order{0, 1, 2, 3};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < count; k = (k + 1) % 4) {
      if (cfg.type_weights[order[k]] > 0) {
        ++quota[order[k]];
        ++assigned;
      }
    }
    for (std::size_t t = 0; t < 4; ++t) slots.insert(slots.end(), quota[t], kAdverbTypes[t]);
    rng.shuffle(std::span<AdverbType>(slots));
  }

  NameGenerator names;
  for (const auto& f : fixed) names.reserve(f.surface_text());

  auto duplicate = [&](const AdverbProgram& p, const std::vector<LexiconEntry>& so_far) {
    for (const auto& b : builtin_adverbs())
      if (programs_equal(p, b)) return true;
    for (const auto& f : fixed)
      if (programs_equal(p, f.program)) return true;
    for (const auto& e : so_far)
      if (programs_equal(p, e.program)) return true;
    return false;
  };

  std::vector<LexiconEntry> out;
  out.reserve(slots.size());
  for (AdverbType type : slots) {
    int rejects = 0;
    AdverbProgram p = sample_program(rng, type, cfg);
    while (duplicate(p, out)) {
      if (++rejects >= cfg.max_rejects) {
        throw Error(ErrorKind::RejectBudgetExceeded,
                    std::to_string(rejects) + " consecutive duplicate " + std::string(to_string(type)) +
                        " programs while filling slot " + std::to_string(out.size()));
      }
      p = sample_program(rng, type, cfg);
    }
    p.name = names.next(rng, p.mode);
    out.push_back({p.name, std::move(p), type});
  }
  return out;
}

std::string serialize_registry(std::span<const LexiconEntry> entries) {
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i) out += "---\n";
    AdverbProgram p = entries[i].program;
    p.name = entries[i].surface;
    out += serialize_program(p);
  }
  return out;
}

std::vector<LexiconEntry> parse_registry(std::string_view text) {
  std::vector<LexiconEntry> out;
  std::size_t pos = 0;
  std::string chunk;
  std::size_t chunk_first_line = 1, line_no = 0;
  auto flush = [&] {
    bool blank = std::all_of(chunk.begin(), chunk.end(),
                             [](unsigned char c) { return std::isspace(c); });
    if (!blank) {
      AdverbProgram p;
      try {
        p = parse_program(chunk);
      } catch (const ParseError& e) {
        throw ParseError(e.kind(), chunk_first_line + e.line() - 1, e.column(),
                         "in registry entry " + std::to_string(out.size()));
      }
      out.push_back({p.name, p, classify_program(p)});
    }
    chunk.clear();
    chunk_first_line = line_no + 1;
  };
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    std::string_view trimmed = line;
    while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
      trimmed.remove_suffix(1);
    if (trimmed == "---") {
      flush();
      continue;
    }
    chunk.append(line);
    chunk += '\n';
  }
  flush();
  return out;
}

Lexicon::Lexicon() {
  for (const auto& p : builtin_adverbs()) add({p.name, p, classify_program(p)});
}

Lexicon::Lexicon(std::span<const LexiconEntry> registry) : Lexicon() {
  for (const auto& e : registry) add(e);
}

void Lexicon::add(LexiconEntry entry) {
  auto surface = entry.surface_text();
  if (index_.contains(surface)) {
    throw Error(ErrorKind::InvalidArgument, "adverb '" + surface + "' defined twice");
  }
  index_.emplace(std::move(surface), entries_.size());
  entries_.push_back(std::move(entry));
}

const LexiconEntry* Lexicon::find(std::string_view surface) const {
  auto it = index_.find(surface);
  return it == index_.end() ? nullptr : &entries_[it->second];
}

}  // namespace manner
