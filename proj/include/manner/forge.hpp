#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "manner/meta_grammar.hpp"
#include "manner/oracle.hpp"

namespace manner {

inline constexpr int kSchemaVersion = 1;

// ---------------------------------------------------------------------------
// Examples and module records
// ---------------------------------------------------------------------------

enum class Partition : std::uint8_t { Train, Test, Unused };
std::string_view to_string(Partition p);
std::optional<Partition> parse_partition(std::string_view s);

struct AdverbMeta {
  std::string surface;
  AdverbType type = AdverbType::Spinning;
  friend bool operator==(const AdverbMeta&, const AdverbMeta&) = default;
};

struct Example {
  std::size_t index = 0;
  Command command;
  WorldState world;
  ActionSeq target;
  std::optional<AdverbMeta> adverb;
  /// Partition of this example in every split, keyed by split name.
  std::map<std::string, Partition> split;

  Verb verb() const { return command.verb; }
  friend bool operator==(const Example&, const Example&) = default;
};

struct PerceptionRecord {
  std::size_t index = 0;
  Command command;
  WorldState world;
  Percept target;
  friend bool operator==(const PerceptionRecord&, const PerceptionRecord&) = default;
};

struct NavigationRecord {
  std::size_t index = 0;
  Command command;
  Percept percept;
  std::optional<std::string> adverb;
  Plan target;
  friend bool operator==(const NavigationRecord&, const NavigationRecord&) = default;
};

struct InteractionRecord {
  std::size_t index = 0;
  Command command;
  Percept percept;
  WorldState world;
  Verb verb = Verb::Walk;
  Heading arrival_heading = Heading::East;
  ActionSeq target;
  friend bool operator==(const InteractionRecord&, const InteractionRecord&) = default;
};

struct TransformationRecord {
  std::size_t index = 0;
  Command command;
  Plan plan;
  ActionSeq interactions;
  std::optional<std::string> adverb;
  Heading start_heading = Heading::East;
  ActionSeq target;
  friend bool operator==(const TransformationRecord&, const TransformationRecord&) = default;
};

struct ModuleRecords {
  std::vector<PerceptionRecord> perception;
  std::vector<NavigationRecord> navigation;
  std::vector<InteractionRecord> interaction;
  std::vector<TransformationRecord> transformation;
  friend bool operator==(const ModuleRecords&, const ModuleRecords&) = default;
};

// ---------------------------------------------------------------------------
// Splits
// ---------------------------------------------------------------------------

struct RandomSplit {
  double test_fraction = 0.1;
  friend bool operator==(const RandomSplit&, const RandomSplit&) = default;
};

/// Exactly k examples with the adverb in train, the rest of them in test.
struct KShotAdverb {
  std::string adverb;
  int k = 5;
  friend bool operator==(const KShotAdverb&, const KShotAdverb&) = default;
};

/// Every (verb, adverb) example in test, nothing else.
struct VerbAdverbHoldout {
  Verb verb = Verb::Pull;
  std::string adverb;
  friend bool operator==(const VerbAdverbHoldout&, const VerbAdverbHoldout&) = default;
};

/// Takes the partition of an earlier split and drops registry-adverb train
/// examples whose type and surface are not allowed. Builtin and plain
/// examples stay; test sets are untouched.
struct TypeSubset {
  std::string base;
  std::vector<AdverbType> types;
  std::vector<std::string> adverbs;
  friend bool operator==(const TypeSubset&, const TypeSubset&) = default;
};

/// Examples matching every `key=value` clause go to test. Keys: verb, adverb
/// ("none" for plain commands), adverb_type, shape, color, size.
struct PredicateSplit {
  std::string predicate;
  friend bool operator==(const PredicateSplit&, const PredicateSplit&) = default;
};

struct SplitSpec {
  std::string name;
  std::variant<RandomSplit, KShotAdverb, VerbAdverbHoldout, TypeSubset, PredicateSplit> rule;
  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

struct SplitPartition {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
  std::vector<std::size_t> unused;
  friend bool operator==(const SplitPartition&, const SplitPartition&) = default;
};

using SplitMap = std::map<std::string, SplitPartition>;

/// Partitions example positions (indices into `examples`) for each spec, in
/// order; a TypeSubset must follow its base. Throws
/// Error(InsufficientExamples) when a k-shot split would leave no test
/// examples, Error(InvalidArgument) for malformed specs.
SplitMap build_splits(std::span<const Example> examples, std::span<const SplitSpec> specs, Rng& rng);

/// Writes each example's `split` labels from a split map.
void label_splits(std::span<Example> examples, const SplitMap& splits);

/// Rebuilds the split map from the labels stored on examples.
SplitMap collect_splits(std::span<const Example> examples);

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct ForgeConfig {
  std::uint64_t seed = 0;
  int grid_size = 6;
  std::size_t num_examples = 1000;
  int extra_adverbs = 0;
  double no_adverb_probability = 0.2;
  int min_distractors = 0;
  int max_distractors = 4;
  int max_depth = kDefaultMaxDepth;
  int retry_bound = 200;
  Physics physics;
  MetaGrammarConfig meta;
  /// Programs always added to the registry ahead of the sampled ones.
  std::vector<AdverbProgram> fixed_programs;
  std::vector<SplitSpec> splits;

  /// Throws Error(InvalidArgument).
  void validate() const;
  friend bool operator==(const ForgeConfig&, const ForgeConfig&) = default;
};

/// Missing keys keep their defaults. Throws Error(InvalidArgument).
ForgeConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ForgeConfig& cfg);
ForgeConfig load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

/// Fixed programs followed by `extra_adverbs` sampled ones.
std::vector<LexiconEntry> build_registry(const ForgeConfig& cfg);

/// One example per index, each from its own stream derived from (seed,
/// index). Situations are resampled until the oracle output executes and
/// reaches the goal. Throws Error(RetryExhausted) naming the adverb.
std::vector<Example> generate_examples(const ForgeConfig& cfg, const Lexicon& lexicon,
                                       unsigned jobs = 1);

/// Re-runs the oracle on each example and records every module's
/// ground-truth inputs and targets.
ModuleRecords emit_module_datasets(std::span<const Example> examples, const Lexicon& lexicon,
                                   int max_depth = kDefaultMaxDepth, const Physics& physics = {});

/// Composes the module targets for one example back into a final sequence.
/// Throws Error(InvalidArgument) if the records disagree with each other.
ActionSeq recompose(const PerceptionRecord& perception, const NavigationRecord& navigation,
                    const InteractionRecord& interaction, const TransformationRecord& transformation,
                    const Lexicon& lexicon, int max_depth = kDefaultMaxDepth);

/// Executes the target and checks the verb goal.
bool example_is_valid(const Example& example, const Physics& physics = {});

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

struct DatasetManifest {
  int schema_version = kSchemaVersion;
  nlohmann::json config;
  std::string registry_digest;
  std::size_t num_examples = 0;
  std::map<std::string, std::map<std::string, std::size_t>> split_counts;
  std::map<std::string, std::size_t> adverb_counts;
  std::map<std::string, std::string> file_digests;

  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j);
  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

struct Dataset {
  ForgeConfig config;
  std::vector<LexiconEntry> registry;
  std::vector<Example> examples;
  ModuleRecords modules;
  DatasetManifest manifest;
  /// SHA-256 of the manifest file as written or read.
  std::string manifest_digest;

  Lexicon lexicon() const { return Lexicon(registry); }
  SplitMap splits() const { return collect_splits(examples); }
};

/// Registry, examples, splits and module records for a config.
Dataset forge_dataset(const ForgeConfig& cfg, unsigned jobs = 1);

inline constexpr const char* kExamplesFile = "examples.ndrec";
inline constexpr const char* kRegistryFile = "registry.txt";
inline constexpr const char* kManifestFile = "manifest";
inline constexpr const char* kModuleFiles[] = {"perception.ndrec", "navigation.ndrec",
                                               "interaction.ndrec", "transformation.ndrec"};

/// Writes one-record-per-line files plus the manifest and fills in
/// `dataset.manifest` (counts, digests) and `manifest_digest`.
void write_dataset(Dataset& dataset, const std::filesystem::path& out_dir);

/// Throws Error(SchemaMismatch), Error(DigestMismatch) or
/// Error(MalformedRecord) naming the file and line.
Dataset read_dataset(const std::filesystem::path& dir);

// JSON codecs shared with the CLI and the harness.
nlohmann::json world_to_json(const WorldState& w);
WorldState world_from_json(const nlohmann::json& j);
nlohmann::json example_to_json(const Example& e);
Example example_from_json(const nlohmann::json& j);
std::vector<std::string> tokens_from_json(const nlohmann::json& j);

}  // namespace manner
