#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "manner/error.hpp"
#include "manner/forge.hpp"
#include "manner/harness.hpp"
#include "manner/oracle.hpp"

namespace py = pybind11;
using namespace manner;

namespace {

using Tokens = std::vector<std::string>;

// A bare name selects a builtin adverb; anything with a newline is program text.
AdverbProgram resolve_program(const std::string& program) {
  if (program.find('\n') != std::string::npos) return parse_program(program);
  if (const AdverbProgram* b = find_builtin(program)) return *b;
  throw Error(ErrorKind::UnknownAdverb, "'" + program + "' is not a builtin adverb");
}

ActionSeq actions(const Tokens& tokens) { return parse_actions(std::span<const std::string>(tokens)); }

MetaGrammarConfig meta_with_weights(const std::map<std::string, double>& weights) {
  MetaGrammarConfig cfg;
  if (weights.empty()) return cfg;
  cfg.type_weights = {0, 0, 0, 0};
  for (const auto& [name, w] : weights) {
    const auto type = parse_adverb_type(name);
    if (!type) throw Error(ErrorKind::InvalidArgument, "unknown adverb type '" + name + "'");
    cfg.type_weights[static_cast<std::size_t>(*type)] = w;
  }
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gridworld oracle, adverb programs, dataset generation and scoring";

  static py::exception<Error> error(m, "MannerError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::handle(error.ptr())(e.what());
      inst.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  m.def("ground", [](const Tokens& symbols, const std::string& heading) {
    return to_tokens(ground(actions(symbols), parse_heading(heading)));
  }, py::arg("symbols"), py::arg("heading"));

  m.def("apply_program", [](const std::string& program, const Tokens& symbols, int max_depth) {
    return to_tokens(apply_program(resolve_program(program), actions(symbols), max_depth));
  }, py::arg("program"), py::arg("symbols"), py::arg("max_depth") = kDefaultMaxDepth);

  m.def("transform", [](const std::string& program, const Tokens& symbols, const std::string& heading,
                        int max_depth) {
    const AdverbProgram p = resolve_program(program);
    return to_tokens(ground(apply_program(p, actions(symbols), max_depth), parse_heading(heading)));
  }, py::arg("program"), py::arg("symbols"), py::arg("heading"), py::arg("max_depth") = kDefaultMaxDepth);

  m.def("parse_program", [](const std::string& text) { return serialize_program(parse_program(text)); },
        py::arg("text"));

  m.def("builtin_adverbs", [] {
    std::vector<std::string> out;
    for (const auto& b : builtin_adverbs()) out.push_back(b.surface());
    return out;
  });

  m.def("sample_registry", [](int n, std::uint64_t seed, const std::map<std::string, double>& weights) {
    Rng rng = Rng::derive(seed, "registry");
    return serialize_registry(sample_registry(rng, n, meta_with_weights(weights)));
  }, py::arg("n"), py::arg("seed") = 0, py::arg("weights") = std::map<std::string, double>{});

  m.def("solve", [](const std::string& world_json, const std::string& command, const std::string& registry) {
    const auto j = nlohmann::json::parse(world_json);
    const WorldState world = world_from_json(j.contains("situation") ? j.at("situation") : j);
    const auto entries = registry.empty() ? std::vector<LexiconEntry>{} : parse_registry(registry);
    py::gil_scoped_release release;
    return to_tokens(solve(Command::parse(std::string_view(command)), world, Lexicon(entries)));
  }, py::arg("world_json"), py::arg("command"), py::arg("registry") = "");

  m.def("execute", [](const std::string& world_json, const Tokens& tokens) {
    const Trajectory t = execute(world_from_json(nlohmann::json::parse(world_json)), actions(tokens));
    return world_to_json(t.final_world).dump();
  }, py::arg("world_json"), py::arg("actions"));

  m.def("generate", [](const std::string& config_json, const std::filesystem::path& out_dir, unsigned jobs) {
    const ForgeConfig cfg = config_from_json(nlohmann::json::parse(config_json));
    py::gil_scoped_release release;
    Dataset d = forge_dataset(cfg, jobs);
    write_dataset(d, out_dir);
    return d.manifest.to_json().dump();
  }, py::arg("config_json"), py::arg("out_dir"), py::arg("jobs") = 1);

  m.def("read_examples", [](const std::filesystem::path& dir) {
    const Dataset d = read_dataset(dir);
    std::vector<std::string> out;
    out.reserve(d.examples.size());
    for (const auto& e : d.examples) out.push_back(example_to_json(e).dump());
    return out;
  }, py::arg("dataset_dir"));

  m.def("stats", [](const std::filesystem::path& dir) { return dataset_stats(read_dataset(dir)); },
        py::arg("dataset_dir"));

  m.def("evaluate", [](const std::filesystem::path& dir, const std::vector<std::pair<std::size_t, Tokens>>& preds,
                       const std::vector<std::string>& splits, unsigned jobs) {
    std::vector<PredictionRecord> records;
    records.reserve(preds.size());
    for (const auto& [i, tokens] : preds) records.push_back({i, tokens});
    py::gil_scoped_release release;
    return evaluate(read_dataset(dir), records, splits, jobs).to_json().dump();
  }, py::arg("dataset_dir"), py::arg("predictions"), py::arg("splits") = std::vector<std::string>{},
     py::arg("jobs") = 1);

  m.def("exact_match", [](const Tokens& prediction, const Tokens& target) { return exact_match(prediction, target); },
        py::arg("prediction"), py::arg("target"));
  m.def("format_percent", &format_percent, py::arg("num"), py::arg("den"));
}
