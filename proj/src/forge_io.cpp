#include <fstream>
#include <set>
#include <sstream>

#include "manner/digest.hpp"
#include "manner/error.hpp"
#include "manner/forge.hpp"

namespace manner {

using nlohmann::json;

std::string_view to_string(Partition p) {
  switch (p) {
    case Partition::Train: return "train";
    case Partition::Test: return "test";
    case Partition::Unused: return "unused";
  }
  return "?";
}

std::optional<Partition> parse_partition(std::string_view s) {
  if (s == "train") return Partition::Train;
  if (s == "test") return Partition::Test;
  if (s == "unused") return Partition::Unused;
  return std::nullopt;
}

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::InvalidArgument, what); }

template <typename T, typename Parse>
T parse_enum(const json& j, Parse parse, const char* what) {
  auto v = parse(j.get<std::string>());
  if (!v) bad(std::string("unknown ") + what + " '" + j.get<std::string>() + "'");
  return *v;
}

json pose_to_json(Position p, Heading h) {
  return {{"row", p.row}, {"col", p.col}, {"heading", std::string(to_string(h))}};
}

json cell_to_json(Position p) { return {{"row", p.row}, {"col", p.col}}; }
Position cell_from_json(const json& j) { return {j.at("row").get<int>(), j.at("col").get<int>()}; }

json percept_to_json(const Percept& p) {
  return {{"agent", pose_to_json(p.agent_position, p.agent_heading)},
          {"target", cell_to_json(p.target_position)}};
}

Percept percept_from_json(const json& j) {
  return {cell_from_json(j.at("agent")), parse_heading(j.at("agent").at("heading").get<std::string>()),
          cell_from_json(j.at("target"))};
}

json plan_to_json(const Plan& p) {
  return {{"mode", std::string(to_string(p.mode))}, {"symbols", to_tokens(p.symbols)}};
}

Plan plan_from_json(const json& j) {
  return {parse_enum<Mode>(j.at("mode"), parse_mode, "mode"),
          parse_actions(tokens_from_json(j.at("symbols")))};
}

json optional_string(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }
std::optional<std::string> optional_string(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<std::string>();
}

Command command_from_json(const json& j) {
  auto tokens = tokens_from_json(j);
  return Command::parse(std::span<const std::string>(tokens));
}

}  // namespace

std::vector<std::string> tokens_from_json(const json& j) {
  if (!j.is_array()) bad("expected an array of tokens");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& t : j) out.push_back(t.get<std::string>());
  return out;
}

json world_to_json(const WorldState& w) {
  json objects = json::array();
  for (const auto& o : w.objects) {
    objects.push_back({{"shape", std::string(to_string(o.shape))},
                       {"color", std::string(to_string(o.color))},
                       {"size", o.size},
                       {"row", o.position.row},
                       {"col", o.position.col}});
  }
  return {{"grid_size", w.grid_size},
          {"agent", pose_to_json(w.agent_position, w.agent_heading)},
          {"objects", std::move(objects)},
          {"target_index", w.target_index}};
}

WorldState world_from_json(const json& j) {
  WorldState w;
  w.grid_size = j.at("grid_size").get<int>();
  w.agent_position = cell_from_json(j.at("agent"));
  w.agent_heading = parse_heading(j.at("agent").at("heading").get<std::string>());
  for (const auto& o : j.at("objects")) {
    GridObject g;
    g.shape = parse_enum<Shape>(o.at("shape"), parse_shape, "shape");
    g.color = parse_enum<Color>(o.at("color"), parse_color, "color");
    g.size = o.at("size").get<int>();
    g.position = cell_from_json(o);
    w.objects.push_back(g);
  }
  w.target_index = j.value("target_index", std::size_t{0});
  w.validate();
  return w;
}

json example_to_json(const Example& e) {
  json split = json::object();
  for (const auto& [name, part] : e.split) split[name] = std::string(to_string(part));
  json adverb = nullptr;
  if (e.adverb) adverb = {{"surface", e.adverb->surface}, {"type", std::string(to_string(e.adverb->type))}};
  return {{"index", e.index},
          {"split", std::move(split)},
          {"command", e.command.tokens()},
          {"target", to_tokens(e.target)},
          {"situation", world_to_json(e.world)},
          {"adverb", std::move(adverb)},
          {"verb", std::string(to_string(e.command.verb))}};
}

Example example_from_json(const json& j) {
  Example e;
  e.index = j.at("index").get<std::size_t>();
  e.command = command_from_json(j.at("command"));
  e.target = parse_actions(tokens_from_json(j.at("target")));
  e.world = world_from_json(j.at("situation"));
  if (const auto& a = j.at("adverb"); !a.is_null()) {
    e.adverb = AdverbMeta{a.at("surface").get<std::string>(),
                          parse_enum<AdverbType>(a.at("type"), parse_adverb_type, "adverb type")};
    if (e.adverb->surface != e.command.adverb_surface()) bad("adverb does not match the command");
  } else if (!e.command.adverb.empty()) {
    bad("command has an adverb but the record does not");
  }
  if (to_string(e.command.verb) != j.at("verb").get<std::string>()) bad("verb does not match the command");
  for (const auto& [name, part] : j.at("split").items()) {
    e.split[name] = parse_enum<Partition>(part, parse_partition, "partition");
  }
  return e;
}

// ---------------------------------------------------------------------------
// Module records
// ---------------------------------------------------------------------------

namespace {

json to_json(const PerceptionRecord& r) {
  return {{"index", r.index},
          {"module", "perception"},
          {"inputs", {{"command", r.command.tokens()}, {"situation", world_to_json(r.world)}}},
          {"target", percept_to_json(r.target)}};
}

json to_json(const NavigationRecord& r) {
  return {{"index", r.index},
          {"module", "navigation"},
          {"inputs",
           {{"command", r.command.tokens()},
            {"percept", percept_to_json(r.percept)},
            {"adverb", optional_string(r.adverb)}}},
          {"target", plan_to_json(r.target)}};
}

json to_json(const InteractionRecord& r) {
  return {{"index", r.index},
          {"module", "interaction"},
          {"inputs",
           {{"command", r.command.tokens()},
            {"percept", percept_to_json(r.percept)},
            {"situation", world_to_json(r.world)},
            {"verb", std::string(to_string(r.verb))},
            {"arrival_heading", std::string(to_string(r.arrival_heading))}}},
          {"target", to_tokens(r.target)}};
}

json to_json(const TransformationRecord& r) {
  return {{"index", r.index},
          {"module", "transformation"},
          {"inputs",
           {{"command", r.command.tokens()},
            {"plan", plan_to_json(r.plan)},
            {"interactions", to_tokens(r.interactions)},
            {"adverb", optional_string(r.adverb)},
            {"start_heading", std::string(to_string(r.start_heading))}}},
          {"target", to_tokens(r.target)}};
}

void from_json(const json& j, PerceptionRecord& r) {
  const auto& in = j.at("inputs");
  r.index = j.at("index").get<std::size_t>();
  r.command = command_from_json(in.at("command"));
  r.world = world_from_json(in.at("situation"));
  r.target = percept_from_json(j.at("target"));
}

void from_json(const json& j, NavigationRecord& r) {
  const auto& in = j.at("inputs");
  r.index = j.at("index").get<std::size_t>();
  r.command = command_from_json(in.at("command"));
  r.percept = percept_from_json(in.at("percept"));
  r.adverb = optional_string(in.at("adverb"));
  r.target = plan_from_json(j.at("target"));
}

void from_json(const json& j, InteractionRecord& r) {
  const auto& in = j.at("inputs");
  r.index = j.at("index").get<std::size_t>();
  r.command = command_from_json(in.at("command"));
  r.percept = percept_from_json(in.at("percept"));
  r.world = world_from_json(in.at("situation"));
  r.verb = parse_enum<Verb>(in.at("verb"), parse_verb, "verb");
  r.arrival_heading = parse_heading(in.at("arrival_heading").get<std::string>());
  r.target = parse_actions(tokens_from_json(j.at("target")));
}

void from_json(const json& j, TransformationRecord& r) {
  const auto& in = j.at("inputs");
  r.index = j.at("index").get<std::size_t>();
  r.command = command_from_json(in.at("command"));
  r.plan = plan_from_json(in.at("plan"));
  r.interactions = parse_actions(tokens_from_json(in.at("interactions")));
  r.adverb = optional_string(in.at("adverb"));
  r.start_heading = parse_heading(in.at("start_heading").get<std::string>());
  r.target = parse_actions(tokens_from_json(j.at("target")));
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

void ForgeConfig::validate() const {
  if (grid_size < 2) bad("grid_size must be at least 2");
  if (num_examples < 1) bad("num_examples must be at least 1");
  if (extra_adverbs < 0) bad("extra_adverbs must be nonnegative");
  if (!(no_adverb_probability >= 0 && no_adverb_probability <= 1))
    bad("no_adverb_probability must lie in [0, 1]");
  if (min_distractors < 0 || max_distractors < min_distractors) bad("invalid distractor range");
  if (max_distractors + 2 > grid_size * grid_size) bad("too many distractors for the grid");
  if (max_depth < 1) bad("max_depth must be at least 1");
  if (retry_bound < 1) bad("retry_bound must be at least 1");
  meta.validate();
  for (const auto& p : fixed_programs) p.validate();
  std::set<std::string> names;
  for (const auto& s : splits) {
    if (s.name.empty()) bad("split without a name");
    if (!names.insert(s.name).second) bad("duplicate split name '" + s.name + "'");
    if (auto* r = std::get_if<RandomSplit>(&s.rule)) {
      if (!(r->test_fraction > 0 && r->test_fraction < 1)) bad("test_fraction must lie in (0, 1)");
    } else if (auto* k = std::get_if<KShotAdverb>(&s.rule)) {
      if (k->k < 1) bad("k must be at least 1");
    } else if (auto* t = std::get_if<TypeSubset>(&s.rule)) {
      if (!names.contains(t->base) || t->base == s.name)
        bad("type subset '" + s.name + "' must follow its base split '" + t->base + "'");
    }
  }
}

namespace {

json split_to_json(const SplitSpec& s) {
  json j = {{"name", s.name}};
  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, RandomSplit>) {
          j["kind"] = "random";
          j["test_fraction"] = r.test_fraction;
        } else if constexpr (std::is_same_v<T, KShotAdverb>) {
          j["kind"] = "kshot_adverb";
          j["adverb"] = r.adverb;
          j["k"] = r.k;
        } else if constexpr (std::is_same_v<T, VerbAdverbHoldout>) {
          j["kind"] = "verb_adverb_holdout";
          j["verb"] = std::string(to_string(r.verb));
          j["adverb"] = r.adverb;
        } else if constexpr (std::is_same_v<T, TypeSubset>) {
          j["kind"] = "type_subset";
          j["base"] = r.base;
          json types = json::array();
          for (auto t : r.types) types.push_back(std::string(to_string(t)));
          j["types"] = std::move(types);
          j["adverbs"] = r.adverbs;
        } else {
          j["kind"] = "predicate";
          j["predicate"] = r.predicate;
        }
      },
      s.rule);
  return j;
}

SplitSpec split_from_json(const json& j) {
  SplitSpec s;
  s.name = j.at("name").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "random") {
    s.rule = RandomSplit{j.value("test_fraction", 0.1)};
  } else if (kind == "kshot_adverb") {
    s.rule = KShotAdverb{j.at("adverb").get<std::string>(), j.at("k").get<int>()};
  } else if (kind == "verb_adverb_holdout") {
    s.rule = VerbAdverbHoldout{parse_enum<Verb>(j.at("verb"), parse_verb, "verb"),
                               j.at("adverb").get<std::string>()};
  } else if (kind == "type_subset") {
    TypeSubset t;
    t.base = j.at("base").get<std::string>();
    for (const auto& x : j.value("types", json::array()))
      t.types.push_back(parse_enum<AdverbType>(x, parse_adverb_type, "adverb type"));
    for (const auto& x : j.value("adverbs", json::array())) t.adverbs.push_back(x.get<std::string>());
    s.rule = std::move(t);
  } else if (kind == "predicate") {
    s.rule = PredicateSplit{j.at("predicate").get<std::string>()};
  } else {
    bad("unknown split kind '" + kind + "'");
  }
  return s;
}

}  // namespace

ForgeConfig config_from_json(const json& j) {
  ForgeConfig c;
  try {
    if (!j.is_object()) bad("config must be a JSON object");
    c.seed = j.value("seed", c.seed);
    c.grid_size = j.value("grid_size", c.grid_size);
    c.num_examples = j.value("num_examples", c.num_examples);
    c.extra_adverbs = j.value("extra_adverbs", c.extra_adverbs);
    c.no_adverb_probability = j.value("no_adverb_probability", c.no_adverb_probability);
    if (j.contains("distractors")) {
      c.min_distractors = j.at("distractors").at(0).get<int>();
      c.max_distractors = j.at("distractors").at(1).get<int>();
    }
    c.max_depth = j.value("max_depth", c.max_depth);
    c.retry_bound = j.value("retry_bound", c.retry_bound);
    if (j.contains("physics")) {
      const auto& p = j.at("physics");
      c.physics.heavy_objects = p.value("heavy_objects", c.physics.heavy_objects);
      c.physics.heavy_min_size = p.value("heavy_min_size", c.physics.heavy_min_size);
    }
    if (j.contains("meta")) {
      const auto& m = j.at("meta");
      if (m.contains("weights")) {
        c.meta.type_weights = {0, 0, 0, 0};
        for (const auto& [key, value] : m.at("weights").items()) {
          auto t = parse_adverb_type(key);
          if (!t) bad("unknown adverb type '" + key + "' in weights");
          c.meta.type_weights[static_cast<std::size_t>(*t)] = value.get<double>();
        }
      }
      if (m.contains("prefix_len")) {
        c.meta.prefix_min = m.at("prefix_len").at(0).get<int>();
        c.meta.prefix_max = m.at("prefix_len").at(1).get<int>();
      }
      c.meta.detour_rhs_max = m.value("detour_rhs_max", c.meta.detour_rhs_max);
      c.meta.max_rejects = m.value("max_rejects", c.meta.max_rejects);
    }
    for (const auto& p : j.value("fixed_programs", json::array()))
      c.fixed_programs.push_back(parse_program(p.get<std::string>()));
    for (const auto& s : j.value("splits", json::array())) c.splits.push_back(split_from_json(s));
  } catch (const json::exception& e) {
    bad(std::string("malformed config: ") + e.what());
  }
  c.validate();
  return c;
}

json config_to_json(const ForgeConfig& c) {
  json weights = json::object();
  for (AdverbType t : kAdverbTypes) {
    if (t == AdverbType::Zigzag) continue;
    std::string_view full = to_string(t);
    weights[std::string(full.substr(0, full.size() - 5))] = c.meta.weight(t);
  }
  json fixed = json::array();
  for (const auto& p : c.fixed_programs) fixed.push_back(serialize_program(p));
  json splits = json::array();
  for (const auto& s : c.splits) splits.push_back(split_to_json(s));
  return {{"seed", c.seed},
          {"grid_size", c.grid_size},
          {"num_examples", c.num_examples},
          {"extra_adverbs", c.extra_adverbs},
          {"no_adverb_probability", c.no_adverb_probability},
          {"distractors", {c.min_distractors, c.max_distractors}},
          {"max_depth", c.max_depth},
          {"retry_bound", c.retry_bound},
          {"physics", {{"heavy_objects", c.physics.heavy_objects}, {"heavy_min_size", c.physics.heavy_min_size}}},
          {"meta",
           {{"weights", std::move(weights)},
            {"prefix_len", {c.meta.prefix_min, c.meta.prefix_max}},
            {"detour_rhs_max", c.meta.detour_rhs_max},
            {"max_rejects", c.meta.max_rejects}}},
          {"fixed_programs", std::move(fixed)},
          {"splits", std::move(splits)}};
}

ForgeConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    bad("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Manifest and persistence
// ---------------------------------------------------------------------------

json DatasetManifest::to_json() const {
  return {{"schema_version", schema_version},
          {"config", config},
          {"registry_digest", registry_digest},
          {"num_examples", num_examples},
          {"split_counts", split_counts},
          {"adverb_counts", adverb_counts},
          {"file_digests", file_digests}};
}

DatasetManifest DatasetManifest::from_json(const json& j) {
  DatasetManifest m;
  m.schema_version = j.at("schema_version").get<int>();
  m.config = j.at("config");
  m.registry_digest = j.at("registry_digest").get<std::string>();
  m.num_examples = j.at("num_examples").get<std::size_t>();
  m.split_counts = j.at("split_counts").get<decltype(m.split_counts)>();
  m.adverb_counts = j.at("adverb_counts").get<decltype(m.adverb_counts)>();
  m.file_digests = j.at("file_digests").get<decltype(m.file_digests)>();
  return m;
}

namespace {

class RecordWriter {
 public:
  explicit RecordWriter(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw Error(ErrorKind::Io, "cannot write " + path.string());
  }

  void write(const json& record) {
    std::string line = record.dump();
    line += '\n';
    out_.write(line.data(), static_cast<std::streamsize>(line.size()));
    hash_.update(line);
  }

  std::string finish() {
    out_.close();
    if (!out_) throw Error(ErrorKind::Io, "error writing " + path_.string());
    return hash_.hex();
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  Sha256 hash_;
};

template <typename Record>
std::string write_records(const std::filesystem::path& path, const std::vector<Record>& records) {
  RecordWriter w(path);
  for (const auto& r : records) w.write(to_json(r));
  return w.finish();
}

template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      fn(json::parse(line));
    } catch (const std::exception& e) {
      throw Error(ErrorKind::MalformedRecord,
                  path.filename().string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

void write_dataset(Dataset& d, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

  DatasetManifest& m = d.manifest;
  m = DatasetManifest{};
  m.config = config_to_json(d.config);
  m.num_examples = d.examples.size();

  const std::string registry_text = serialize_registry(d.registry);
  {
    std::ofstream out(dir / kRegistryFile, std::ios::binary);
    out << registry_text;
    if (!out) throw Error(ErrorKind::Io, "cannot write registry");
  }
  m.registry_digest = sha256_hex(registry_text);
  m.file_digests[kRegistryFile] = m.registry_digest;

  {
    RecordWriter w(dir / kExamplesFile);
    for (const auto& e : d.examples) w.write(example_to_json(e));
    m.file_digests[kExamplesFile] = w.finish();
  }
  m.file_digests[kModuleFiles[0]] = write_records(dir / kModuleFiles[0], d.modules.perception);
  m.file_digests[kModuleFiles[1]] = write_records(dir / kModuleFiles[1], d.modules.navigation);
  m.file_digests[kModuleFiles[2]] = write_records(dir / kModuleFiles[2], d.modules.interaction);
  m.file_digests[kModuleFiles[3]] = write_records(dir / kModuleFiles[3], d.modules.transformation);

  for (const auto& [name, part] : d.splits()) {
    m.split_counts[name] = {{"train", part.train.size()},
                            {"test", part.test.size()},
                            {"unused", part.unused.size()}};
  }
  for (const auto& e : d.examples) ++m.adverb_counts[e.adverb ? e.adverb->surface : "(none)"];

  const std::string manifest_text = m.to_json().dump(2) + "\n";
  std::ofstream out(dir / kManifestFile, std::ios::binary);
  out << manifest_text;
  if (!out) throw Error(ErrorKind::Io, "cannot write manifest");
  d.manifest_digest = sha256_hex(manifest_text);
}

Dataset read_dataset(const std::filesystem::path& dir) {
  Dataset d;
  const std::string manifest_text = read_text(dir / kManifestFile);
  d.manifest_digest = sha256_hex(manifest_text);
  try {
    auto j = json::parse(manifest_text);
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
      throw Error(ErrorKind::SchemaMismatch, "dataset schema " + std::to_string(version) +
                                                 ", expected " + std::to_string(kSchemaVersion));
    }
    d.manifest = DatasetManifest::from_json(j);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, std::string("manifest: ") + e.what());
  }

  std::vector<std::string> required = {kExamplesFile, kRegistryFile};
  required.insert(required.end(), std::begin(kModuleFiles), std::end(kModuleFiles));
  for (const auto& f : required) {
    auto it = d.manifest.file_digests.find(f);
    if (it == d.manifest.file_digests.end())
      throw Error(ErrorKind::SchemaMismatch, "manifest lists no digest for " + f);
    if (sha256_file(dir / f) != it->second) throw Error(ErrorKind::DigestMismatch, f);
  }

  d.config = config_from_json(d.manifest.config);
  d.registry = parse_registry(read_text(dir / kRegistryFile));
  if (sha256_hex(serialize_registry(d.registry)) != d.manifest.registry_digest)
    throw Error(ErrorKind::DigestMismatch, "registry is not in canonical form");

  for_each_record(dir / kExamplesFile, [&](const json& j) { d.examples.push_back(example_from_json(j)); });
  auto load = [&](const char* file, auto& out) {
    for_each_record(dir / file, [&](const json& j) {
      typename std::decay_t<decltype(out)>::value_type r;
      from_json(j, r);
      out.push_back(std::move(r));
    });
  };
  load(kModuleFiles[0], d.modules.perception);
  load(kModuleFiles[1], d.modules.navigation);
  load(kModuleFiles[2], d.modules.interaction);
  load(kModuleFiles[3], d.modules.transformation);

  if (d.examples.size() != d.manifest.num_examples)
    throw Error(ErrorKind::SchemaMismatch, "example count differs from the manifest");
  return d;
}

}  // namespace manner
