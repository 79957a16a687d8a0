#include <exception>
#include <mutex>
#include <thread>

#include "manner/error.hpp"
#include "manner/forge.hpp"

namespace manner {

namespace {

constexpr std::uint64_t kExampleStream = 0x6578616d706c65;  // "example"

bool recoverable(ErrorKind k) {
  return k == ErrorKind::OutOfBounds || k == ErrorKind::Blocked || k == ErrorKind::IllegalInteraction ||
         k == ErrorKind::ExhaustedRetries;
}

Example generate_one(const ForgeConfig& cfg, const Lexicon& lexicon, std::size_t index) {
  Rng rng = Rng::derive(cfg.seed, index, kExampleStream);
  const Verb verb = kVerbs[rng.index(std::size(kVerbs))];
  const LexiconEntry* adverb = nullptr;
  if (!rng.bernoulli(cfg.no_adverb_probability)) {
    adverb = &lexicon.entries()[rng.index(lexicon.entries().size())];
  }

  SituationConfig sc;
  sc.grid_size = cfg.grid_size;
  sc.min_distractors = cfg.min_distractors;
  sc.max_distractors = cfg.max_distractors;

  for (int attempt = 0; attempt < cfg.retry_bound; ++attempt) {
    try {
      Situation s = sample_situation(rng, sc);
      Example e;
      e.index = index;
      e.command.verb = verb;
      e.command.object = s.phrase;
      if (adverb) {
        e.command.adverb = adverb->surface;
        e.adverb = AdverbMeta{adverb->surface_text(), adverb->type};
      }
      e.world = std::move(s.world);
      e.target = solve(e.command, e.world, lexicon, cfg.max_depth, cfg.physics);
      const Trajectory t = execute(e.world, e.target, cfg.physics);
      if (goal_satisfied(verb, t.final_world)) return e;
    } catch (const Error& err) {
      if (!recoverable(err.kind())) throw;
    }
  }
  throw Error(ErrorKind::RetryExhausted,
              "example " + std::to_string(index) + " (" + std::string(to_string(verb)) + ", adverb '" +
                  (adverb ? adverb->surface_text() : std::string("none")) + "') after " +
                  std::to_string(cfg.retry_bound) + " situations");
}

}  // namespace

std::vector<LexiconEntry> build_registry(const ForgeConfig& cfg) {
  std::vector<LexiconEntry> fixed;
  for (const auto& p : cfg.fixed_programs) fixed.push_back({p.name, p, classify_program(p)});
  Rng rng = Rng::derive(cfg.seed, "registry");
  auto sampled = sample_registry(rng, cfg.extra_adverbs, cfg.meta, fixed);
  fixed.insert(fixed.end(), std::make_move_iterator(sampled.begin()), std::make_move_iterator(sampled.end()));
  return fixed;
}

std::vector<Example> generate_examples(const ForgeConfig& cfg, const Lexicon& lexicon, unsigned jobs) {
  const std::size_t n = cfg.num_examples;
  std::vector<Example> out(n);
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(n, 1))));

  // The lowest failing index wins so the reported error does not depend on
  // thread scheduling.
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;

  auto work = [&](unsigned worker) {
    for (std::size_t i = worker; i < n; i += jobs) {
      {
        std::lock_guard lock(mu);
        if (i > failed_at) return;
      }
      try {
        out[i] = generate_one(cfg, lexicon, i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
        return;
      }
    }
  };

  if (jobs == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

ModuleRecords emit_module_datasets(std::span<const Example> examples, const Lexicon& lexicon, int max_depth,
                                   const Physics& physics) {
  ModuleRecords m;
  m.perception.reserve(examples.size());
  m.navigation.reserve(examples.size());
  m.interaction.reserve(examples.size());
  m.transformation.reserve(examples.size());
  for (const auto& e : examples) {
    const SolveTrace t = solve_traced(e.command, e.world, lexicon, max_depth, physics);
    std::optional<std::string> adverb;
    if (t.adverb) adverb = t.adverb->surface_text();
    m.perception.push_back({e.index, e.command, e.world, t.percept});
    m.navigation.push_back({e.index, e.command, t.percept, adverb, t.plan});
    m.interaction.push_back({e.index, e.command, t.percept, e.world, e.command.verb, t.arrival, t.interactions});
    m.transformation.push_back(
        {e.index, e.command, t.plan, t.interactions, adverb, t.percept.agent_heading, t.output});
  }
  return m;
}

ActionSeq recompose(const PerceptionRecord& perception, const NavigationRecord& navigation,
                    const InteractionRecord& interaction, const TransformationRecord& transformation,
                    const Lexicon& lexicon, int max_depth) {
  const std::size_t index = perception.index;
  if (navigation.index != index || interaction.index != index || transformation.index != index) {
    throw Error(ErrorKind::InvalidArgument, "module records belong to different examples");
  }
  const Percept& percept = perception.target;
  if (navigation.percept != percept || interaction.percept != percept) {
    throw Error(ErrorKind::InvalidArgument, "percepts disagree for example " + std::to_string(index));
  }
  if (interaction.arrival_heading != arrival_heading(navigation.target, percept.agent_heading)) {
    throw Error(ErrorKind::InvalidArgument, "arrival heading disagrees for example " + std::to_string(index));
  }
  if (navigation.adverb != transformation.adverb) {
    throw Error(ErrorKind::InvalidArgument, "adverbs disagree for example " + std::to_string(index));
  }
  const AdverbProgram* program = nullptr;
  if (navigation.adverb) {
    const LexiconEntry* entry = lexicon.find(*navigation.adverb);
    if (!entry) throw Error(ErrorKind::UnknownAdverb, "'" + *navigation.adverb + "'");
    program = &entry->program;
  }
  return transform(navigation.target, interaction.target, program, percept.agent_heading, max_depth);
}

bool example_is_valid(const Example& example, const Physics& physics) {
  try {
    const Trajectory t = execute(example.world, example.target, physics);
    return goal_satisfied(example.verb(), t.final_world);
  } catch (const Error&) {
    return false;
  }
}

Dataset forge_dataset(const ForgeConfig& cfg, unsigned jobs) {
  cfg.validate();
  Dataset d;
  d.config = cfg;
  d.registry = build_registry(cfg);
  const Lexicon lexicon(d.registry);
  d.examples = generate_examples(cfg, lexicon, jobs);
  Rng rng = Rng::derive(cfg.seed, "splits");
  label_splits(d.examples, build_splits(d.examples, cfg.splits, rng));
  d.modules = emit_module_datasets(d.examples, lexicon, cfg.max_depth, cfg.physics);
  return d;
}

}  // namespace manner
