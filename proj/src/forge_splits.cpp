#include <algorithm>
#include <charconv>
#include <cmath>

#include "manner/error.hpp"
#include "manner/forge.hpp"

namespace manner {

namespace {

using Positions = std::vector<std::size_t>;

std::string surface_of(const Example& e) { return e.adverb ? e.adverb->surface : std::string(); }

SplitPartition random_split(std::size_t n, const RandomSplit& spec, Rng& rng) {
  Positions order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  auto test_count = static_cast<std::size_t>(std::llround(spec.test_fraction * static_cast<double>(n)));
  if (n >= 2) test_count = std::clamp<std::size_t>(test_count, 1, n - 1);
  SplitPartition p;
  p.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_count));
  p.train.assign(order.begin() + static_cast<std::ptrdiff_t>(test_count), order.end());
  std::ranges::sort(p.train);
  std::ranges::sort(p.test);
  return p;
}

SplitPartition kshot_split(std::span<const Example> examples, const KShotAdverb& spec, Rng& rng) {
  Positions matches;
  SplitPartition p;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (surface_of(examples[i]) == spec.adverb) {
      matches.push_back(i);
    } else {
      p.train.push_back(i);
    }
  }
  const auto k = static_cast<std::size_t>(spec.k);
  if (matches.size() <= k) {
    throw Error(ErrorKind::InsufficientExamples,
                std::to_string(matches.size()) + " examples with '" + spec.adverb + "', need more than " +
                    std::to_string(k));
  }
  rng.shuffle(std::span<std::size_t>(matches));
  p.train.insert(p.train.end(), matches.begin(), matches.begin() + static_cast<std::ptrdiff_t>(k));
  p.test.assign(matches.begin() + static_cast<std::ptrdiff_t>(k), matches.end());
  std::ranges::sort(p.train);
  std::ranges::sort(p.test);
  return p;
}

template <typename Pred>
SplitPartition holdout(std::span<const Example> examples, Pred&& in_test) {
  SplitPartition p;
  for (std::size_t i = 0; i < examples.size(); ++i) (in_test(examples[i]) ? p.test : p.train).push_back(i);
  return p;
}

SplitPartition type_subset(std::span<const Example> examples, const TypeSubset& spec,
                           const SplitMap& done) {
  auto base = done.find(spec.base);
  if (base == done.end()) {
    throw Error(ErrorKind::InvalidArgument, "type subset needs the earlier split '" + spec.base + "'");
  }
  SplitPartition p = base->second;
  Positions kept;
  for (std::size_t i : p.train) {
    const auto& a = examples[i].adverb;
    const bool allowed = !a || find_builtin(a->surface) ||
                         std::ranges::find(spec.types, a->type) != spec.types.end() ||
                         std::ranges::find(spec.adverbs, a->surface) != spec.adverbs.end();
    (allowed ? kept : p.unused).push_back(i);
  }
  p.train = std::move(kept);
  std::ranges::sort(p.unused);
  return p;
}

struct Clause {
  std::string key;
  std::string value;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<Clause> parse_predicate(std::string_view text) {
  std::vector<Clause> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view part = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view() : text.substr(comma + 1);
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::InvalidArgument, "predicate clause '" + trim(part) + "' lacks '='");
    }
    Clause c{trim(part.substr(0, eq)), trim(part.substr(eq + 1))};
    static constexpr std::string_view kKeys[] = {"verb", "adverb", "adverb_type", "shape", "color", "size"};
    if (std::ranges::find(kKeys, c.key) == std::end(kKeys)) {
      throw Error(ErrorKind::InvalidArgument, "unknown predicate key '" + c.key + "'");
    }
    if (c.key == "verb" && !parse_verb(c.value)) throw Error(ErrorKind::InvalidArgument, "bad verb " + c.value);
    if (c.key == "adverb_type" && !parse_adverb_type(c.value))
      throw Error(ErrorKind::InvalidArgument, "bad adverb type " + c.value);
    if (c.key == "shape" && !parse_shape(c.value)) throw Error(ErrorKind::InvalidArgument, "bad shape " + c.value);
    if (c.key == "color" && !parse_color(c.value)) throw Error(ErrorKind::InvalidArgument, "bad color " + c.value);
    if (c.key == "size") {
      int size = 0;
      auto [ptr, ec] = std::from_chars(c.value.data(), c.value.data() + c.value.size(), size);
      if (ec != std::errc() || ptr != c.value.data() + c.value.size())
        throw Error(ErrorKind::InvalidArgument, "bad size " + c.value);
    }
    out.push_back(std::move(c));
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "empty predicate");
  return out;
}

bool matches(const Example& e, const Clause& c) {
  const GridObject& target = e.world.target();
  if (c.key == "verb") return to_string(e.verb()) == c.value;
  if (c.key == "adverb") return c.value == "none" ? !e.adverb : surface_of(e) == c.value;
  if (c.key == "adverb_type") return e.adverb && e.adverb->type == *parse_adverb_type(c.value);
  if (c.key == "shape") return to_string(target.shape) == c.value;
  if (c.key == "color") return to_string(target.color) == c.value;
  return std::to_string(target.size) == c.value;
}

}  // namespace

SplitMap build_splits(std::span<const Example> examples, std::span<const SplitSpec> specs, Rng& rng) {
  SplitMap out;
  for (const auto& spec : specs) {
    if (out.contains(spec.name)) throw Error(ErrorKind::InvalidArgument, "duplicate split '" + spec.name + "'");
    SplitPartition p = std::visit(
        [&](const auto& r) -> SplitPartition {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, RandomSplit>) {
            if (!(r.test_fraction > 0 && r.test_fraction < 1))
              throw Error(ErrorKind::InvalidArgument, "test_fraction must lie in (0, 1)");
            return random_split(examples.size(), r, rng);
          } else if constexpr (std::is_same_v<T, KShotAdverb>) {
            if (r.k < 1) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
            return kshot_split(examples, r, rng);
          } else if constexpr (std::is_same_v<T, VerbAdverbHoldout>) {
            return holdout(examples, [&](const Example& e) {
              return e.verb() == r.verb && surface_of(e) == r.adverb;
            });
          } else if constexpr (std::is_same_v<T, TypeSubset>) {
            return type_subset(examples, r, out);
          } else {
            auto clauses = parse_predicate(r.predicate);
            return holdout(examples, [&](const Example& e) {
              return std::ranges::all_of(clauses, [&](const Clause& c) { return matches(e, c); });
            });
          }
        },
        spec.rule);
    out.emplace(spec.name, std::move(p));
  }
  return out;
}

void label_splits(std::span<Example> examples, const SplitMap& splits) {
  for (auto& e : examples) e.split.clear();
  for (const auto& [name, p] : splits) {
    for (std::size_t i : p.train) examples[i].split[name] = Partition::Train;
    for (std::size_t i : p.test) examples[i].split[name] = Partition::Test;
    for (std::size_t i : p.unused) examples[i].split[name] = Partition::Unused;
  }
}

SplitMap collect_splits(std::span<const Example> examples) {
  SplitMap out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    for (const auto& [name, part] : examples[i].split) {
      auto& p = out[name];
      switch (part) {
        case Partition::Train: p.train.push_back(i); break;
        case Partition::Test: p.test.push_back(i); break;
        case Partition::Unused: p.unused.push_back(i); break;
      }
    }
  }
  return out;
}

}  // namespace manner
