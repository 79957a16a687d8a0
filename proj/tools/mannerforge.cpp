#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "manner/digest.hpp"
#include "manner/error.hpp"
#include "manner/forge.hpp"
#include "manner/harness.hpp"

using namespace manner;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

json read_json(const std::filesystem::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, path.string() + ": " + e.what());
  }
}

std::uint64_t parse_seed(const std::string& text, const char* origin) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error(ErrorKind::InvalidArgument, std::string(origin) + " is not an unsigned integer: " + text);
  return v;
}

MetaGrammarConfig parse_weights(const std::string& spec, MetaGrammarConfig cfg) {
  cfg.type_weights = {0, 0, 0, 0};
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    auto type = parse_adverb_type(item.substr(0, eq));
    if (eq == std::string::npos || !type)
      throw Error(ErrorKind::InvalidArgument, "bad weight '" + item + "'");
    try {
      cfg.type_weights[static_cast<std::size_t>(*type)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "bad weight '" + item + "'");
    }
  }
  cfg.validate();
  return cfg;
}

AdverbProgram load_program(const std::string& name_or_path) {
  if (std::filesystem::is_regular_file(name_or_path)) return parse_program(read_file(name_or_path));
  if (const AdverbProgram* p = find_builtin(name_or_path)) return *p;
  throw Error(ErrorKind::UnknownAdverb, "'" + name_or_path + "' is neither a program file nor a builtin adverb");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adverb-augmented gridworld dataset forge"};
  app.require_subcommand(1);
  unsigned jobs = 1;
  app.add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a dataset from a config");
  std::string gen_config, gen_out, gen_seed;
  std::optional<int> gen_extra;
  std::optional<std::size_t> gen_n;
  gen->add_option("--config", gen_config, "Config JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--seed", gen_seed, "Seed (overrides FORGE_SEED and the config)");
  gen->add_option("--extra-adverbs,-X", gen_extra, "Number of sampled extra adverbs");
  gen->add_option("--num-examples,-n", gen_n, "Number of examples");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // sample-adverbs
  auto* sam = app.add_subcommand("sample-adverbs", "Sample an adverb registry");
  int sam_n = 0;
  std::string sam_weights, sam_out, sam_seed;
  sam->add_option("--n", sam_n, "Number of programs")->required()->check(CLI::NonNegativeNumber);
  sam->add_option("--weights", sam_weights, "spinning=..,cautiously=..,detour=..");
  sam->add_option("--seed", sam_seed, "Seed");
  sam->add_option("--out", sam_out, "Registry file")->required();

  // transform
  auto* tra = app.add_subcommand("transform", "Rewrite a symbol sequence with a program and ground it");
  std::string tra_program, tra_input, tra_heading;
  int tra_depth = kDefaultMaxDepth;
  tra->add_option("--program", tra_program, "Program file or builtin adverb")->required();
  tra->add_option("--input", tra_input, "Symbols")->required();
  tra->add_option("--heading", tra_heading, "Start heading")->required();
  tra->add_option("--max-depth", tra_depth, "Maximum rewrite passes")->check(CLI::PositiveNumber);

  // ground
  auto* gro = app.add_subcommand("ground", "Ground allocentric symbols from a heading");
  std::string gro_input, gro_heading;
  gro->add_option("--input", gro_input, "Symbols")->required();
  gro->add_option("--heading", gro_heading, "Start heading")->required();

  // solve
  auto* sol = app.add_subcommand("solve", "Run the oracle on a world and a command");
  std::string sol_world, sol_command, sol_registry;
  bool sol_trace = false;
  sol->add_option("--world", sol_world, "World JSON")->required()->check(CLI::ExistingFile);
  sol->add_option("--command", sol_command, "Command text")->required();
  sol->add_option("--registry", sol_registry, "Registry of extra adverbs")->check(CLI::ExistingFile);
  sol->add_flag("--trace", sol_trace, "Print every module's output");

  // evaluate
  auto* eva = app.add_subcommand("evaluate", "Score predictions against a dataset");
  std::string eva_dataset, eva_predictions, eva_report;
  std::vector<std::string> eva_splits;
  eva->add_option("--dataset", eva_dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  eva->add_option("--split", eva_splits, "Split name (repeatable; default all)");
  eva->add_option("--predictions", eva_predictions, "Predictions file")->required()->check(CLI::ExistingFile);
  eva->add_option("--report", eva_report, "Report output file")->required();
  eva->add_option("--jobs,-j", jobs, "Worker threads")->check(CLI::PositiveNumber);

  // stats
  auto* sta = app.add_subcommand("stats", "Summarize a dataset");
  std::string sta_dataset;
  sta->add_option("--dataset", sta_dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);

  // inspect
  auto* ins = app.add_subcommand("inspect", "Show one example");
  std::string ins_dataset;
  std::size_t ins_index = 0;
  ins->add_option("--dataset", ins_dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  ins->add_option("--index", ins_index, "Example index")->required();

  // aggregate
  auto* agg = app.add_subcommand("aggregate", "Mean and deviation over several reports");
  std::vector<std::string> agg_reports;
  std::string agg_out;
  agg->add_option("--reports", agg_reports, "Report files")->required()->check(CLI::ExistingFile);
  agg->add_option("--out", agg_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) {
      ForgeConfig cfg = load_config(gen_config);
      if (!gen_seed.empty()) {
        cfg.seed = parse_seed(gen_seed, "--seed");
      } else if (const char* env = std::getenv("FORGE_SEED"); env && *env) {
        cfg.seed = parse_seed(env, "FORGE_SEED");
      }
      if (gen_extra) cfg.extra_adverbs = *gen_extra;
      if (gen_n) cfg.num_examples = *gen_n;
      cfg.validate();
      Dataset d = forge_dataset(cfg, jobs);
      write_dataset(d, gen_out);
      std::cout << "wrote " << d.examples.size() << " examples with " << d.registry.size() + 4
                << " adverbs to " << gen_out << "\nmanifest " << d.manifest_digest << '\n';
    } else if (*sam) {
      std::uint64_t seed = 0;
      if (!sam_seed.empty()) {
        seed = parse_seed(sam_seed, "--seed");
      } else if (const char* env = std::getenv("FORGE_SEED"); env && *env) {
        seed = parse_seed(env, "FORGE_SEED");
      }
      MetaGrammarConfig meta;
      if (!sam_weights.empty()) meta = parse_weights(sam_weights, meta);
      Rng rng = Rng::derive(seed, "registry");
      const auto registry = sample_registry(rng, sam_n, meta);
      write_file(sam_out, serialize_registry(registry));
      std::cout << "wrote " << registry.size() << " programs to " << sam_out << '\n';
    } else if (*tra) {
      const AdverbProgram program = load_program(tra_program);
      const ActionSeq rewritten = apply_program(program, parse_actions(tra_input), tra_depth);
      std::cout << join(ground(rewritten, parse_heading(tra_heading))) << '\n';
    } else if (*gro) {
      std::cout << join(ground(parse_actions(gro_input), parse_heading(gro_heading))) << '\n';
    } else if (*sol) {
      json w = read_json(sol_world);
      const WorldState world = world_from_json(w.contains("situation") ? w.at("situation") : w);
      std::vector<LexiconEntry> registry;
      if (!sol_registry.empty()) registry = parse_registry(read_file(sol_registry));
      const Lexicon lexicon(registry);
      const SolveTrace t = solve_traced(Command::parse(std::string_view(sol_command)), world, lexicon);
      if (sol_trace) {
        std::cout << "percept: agent (" << t.percept.agent_position.row << ", " << t.percept.agent_position.col
                  << ") " << to_string(t.percept.agent_heading) << ", target (" << t.percept.target_position.row
                  << ", " << t.percept.target_position.col << ")\n"
                  << "plan (" << to_string(t.plan.mode) << "): " << join(t.plan.symbols) << '\n'
                  << "arrival: " << to_string(t.arrival) << '\n'
                  << "interactions: " << join(t.interactions) << '\n'
                  << "output: ";
      }
      std::cout << join(t.output) << '\n';
    } else if (*eva) {
      const Dataset d = read_dataset(eva_dataset);
      const auto predictions = read_predictions(eva_predictions);
      const EvalReport report = evaluate(d, predictions, eva_splits, jobs);
      const json j = report.to_json();
      write_file(eva_report, j.dump(2) + "\n");
      for (const auto& [name, m] : j.at("splits").items()) {
        std::cout << name << ": exact match " << (m["exact_match_percent"].is_null() ? "n/a" : m["exact_match_percent"].get<std::string>())
                  << "% semantic " << (m["semantic_valid_percent"].is_null() ? "n/a" : m["semantic_valid_percent"].get<std::string>())
                  << "% (n=" << m["n"].get<std::size_t>() << ")\n";
      }
    } else if (*sta) {
      std::cout << dataset_stats(read_dataset(sta_dataset));
    } else if (*ins) {
      const Dataset d = read_dataset(ins_dataset);
      auto it = std::ranges::find(d.examples, ins_index, &Example::index);
      if (it == d.examples.end()) throw Error(ErrorKind::UnknownIndex, std::to_string(ins_index));
      std::cout << render_ascii(it->world);
      std::string command;
      for (const auto& t : it->command.tokens()) command += (command.empty() ? "" : " ") + t;
      std::cout << "command: " << command << '\n'
                << "adverb type: " << (it->adverb ? to_string(it->adverb->type) : "none") << '\n'
                << "target: " << join(it->target) << '\n';
      for (const auto& [name, part] : it->split) std::cout << "split " << name << ": " << to_string(part) << '\n';
    } else if (*agg) {
      std::vector<EvalReport> reports;
      for (const auto& f : agg_reports) reports.push_back(EvalReport::from_json(read_json(f)));
      const std::string text = aggregate_reports(reports).dump(2) + "\n";
      if (agg_out.empty()) {
        std::cout << text;
      } else {
        write_file(agg_out, text);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
