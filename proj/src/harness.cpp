#include "manner/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "manner/digest.hpp"
#include "manner/error.hpp"

namespace manner {

using nlohmann::json;

bool exact_match(std::span<const std::string> prediction, std::span<const std::string> target) {
  return std::ranges::equal(prediction, target);
}

std::string format_percent(std::size_t num, std::size_t den) {
  if (den == 0) throw Error(ErrorKind::InvalidArgument, "percentage of an empty set");
  const unsigned long long scaled = 10000ULL * num;
  unsigned long long q = scaled / den;
  const unsigned long long r = scaled % den;
  if (2 * r > den || (2 * r == den && q % 2 == 1)) ++q;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%llu.%02llu", q / 100, q % 100);
  return buf;
}

bool semantically_valid(std::span<const std::string> prediction, const Example& example,
                        const Physics& physics) {
  try {
    const Trajectory t = execute(example.world, parse_actions(prediction), physics);
    return goal_satisfied(example.verb(), t.final_world);
  } catch (const Error&) {
    return false;
  }
}

json EvalReport::to_json() const {
  json per_split = json::object();
  for (const auto& [name, m] : splits) {
    json percent = m.n ? json(format_percent(m.exact, m.n)) : json(nullptr);
    json semantic = m.n ? json(format_percent(m.semantic, m.n)) : json(nullptr);
    per_split[name] = {{"n", m.n},
                       {"exact_match", m.exact},
                       {"semantic_valid", m.semantic},
                       {"exact_match_percent", percent},
                       {"semantic_valid_percent", semantic}};
  }
  return {{"dataset_digest", dataset_digest},
          {"config_digest", config_digest},
          {"predictions_digest", predictions_digest},
          {"splits", std::move(per_split)}};
}

EvalReport EvalReport::from_json(const json& j) {
  EvalReport r;
  try {
    r.dataset_digest = j.at("dataset_digest").get<std::string>();
    r.config_digest = j.at("config_digest").get<std::string>();
    r.predictions_digest = j.at("predictions_digest").get<std::string>();
    for (const auto& [name, m] : j.at("splits").items()) {
      r.splits[name] = {m.at("n").get<std::size_t>(), m.at("exact_match").get<std::size_t>(),
                        m.at("semantic_valid").get<std::size_t>()};
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, std::string("report: ") + e.what());
  }
  return r;
}

namespace {

json prediction_to_json(const PredictionRecord& p) { return {{"index", p.index}, {"prediction", p.prediction}}; }

struct Score {
  bool exact = false;
  bool semantic = false;
};

}  // namespace

EvalReport evaluate(const Dataset& dataset, std::span<const PredictionRecord> predictions,
                    std::span<const std::string> splits, unsigned jobs) {
  std::unordered_map<std::size_t, std::size_t> position;
  for (std::size_t i = 0; i < dataset.examples.size(); ++i) position.emplace(dataset.examples[i].index, i);

  // Position of the example -> position of its prediction.
  std::unordered_map<std::size_t, std::size_t> predicted;
  for (std::size_t p = 0; p < predictions.size(); ++p) {
    auto it = position.find(predictions[p].index);
    if (it == position.end()) throw Error(ErrorKind::UnknownIndex, std::to_string(predictions[p].index));
    if (!predicted.emplace(it->second, p).second)
      throw Error(ErrorKind::DuplicatePrediction, std::to_string(predictions[p].index));
  }

  const SplitMap all = dataset.splits();
  std::vector<std::string> names(splits.begin(), splits.end());
  if (names.empty()) {
    for (const auto& [name, _] : all) names.push_back(name);
  }

  std::vector<std::size_t> needed;
  for (const auto& name : names) {
    auto it = all.find(name);
    if (it == all.end()) throw Error(ErrorKind::InvalidArgument, "dataset has no split '" + name + "'");
    for (std::size_t i : it->second.test) {
      if (!predicted.contains(i))
        throw Error(ErrorKind::MissingPrediction, std::to_string(dataset.examples[i].index));
      needed.push_back(i);
    }
  }
  std::ranges::sort(needed);
  needed.erase(std::unique(needed.begin(), needed.end()), needed.end());

  std::vector<Score> scores(needed.size());
  auto work = [&](std::size_t begin, std::size_t stride) {
    for (std::size_t k = begin; k < needed.size(); k += stride) {
      const Example& e = dataset.examples[needed[k]];
      const auto& pred = predictions[predicted.at(needed[k])].prediction;
      const auto gold = to_tokens(e.target);
      scores[k] = {exact_match(pred, gold), semantically_valid(pred, e, dataset.config.physics)};
    }
  };
  jobs = std::max(1u, jobs);
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w, jobs);
  }

  EvalReport report;
  report.dataset_digest = dataset.manifest_digest;
  report.config_digest = sha256_hex(config_to_json(dataset.config).dump());

  std::vector<const PredictionRecord*> sorted;
  for (const auto& p : predictions) sorted.push_back(&p);
  std::ranges::sort(sorted, {}, &PredictionRecord::index);
  Sha256 h;
  for (const auto* p : sorted) h.update(prediction_to_json(*p).dump() + "\n");
  report.predictions_digest = h.hex();

  for (const auto& name : names) {
    SplitMetrics m;
    for (std::size_t i : all.at(name).test) {
      const Score& s = scores[static_cast<std::size_t>(std::ranges::lower_bound(needed, i) - needed.begin())];
      ++m.n;
      m.exact += s.exact;
      m.semantic += s.semantic;
    }
    report.splits[name] = m;
  }
  return report;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      PredictionRecord r;
      r.index = j.at("index").get<std::size_t>();
      r.prediction = tokens_from_json(j.at("prediction"));
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw Error(ErrorKind::MalformedRecord,
                  path.filename().string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_predictions(const std::filesystem::path& path, std::span<const PredictionRecord> predictions) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& p : predictions) out << prediction_to_json(p).dump() << '\n';
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
}

std::vector<PredictionRecord> gold_predictions(const Dataset& dataset) {
  std::vector<PredictionRecord> out;
  out.reserve(dataset.examples.size());
  for (const auto& e : dataset.examples) out.push_back({e.index, to_tokens(e.target)});
  return out;
}

json aggregate_reports(std::span<const EvalReport> reports) {
  if (reports.empty()) throw Error(ErrorKind::InvalidArgument, "no reports to aggregate");
  for (const auto& r : reports) {
    if (r.dataset_digest != reports[0].dataset_digest)
      throw Error(ErrorKind::InvalidArgument, "reports refer to different datasets");
    if (r.splits.size() != reports[0].splits.size())
      throw Error(ErrorKind::InvalidArgument, "reports cover different splits");
  }
  auto fixed2 = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return std::string(buf);
  };
  json splits = json::object();
  for (const auto& [name, first] : reports[0].splits) {
    if (first.n == 0) continue;
    std::vector<double> exact, semantic;
    for (const auto& r : reports) {
      auto it = r.splits.find(name);
      if (it == r.splits.end() || it->second.n != first.n)
        throw Error(ErrorKind::InvalidArgument, "reports disagree on split '" + name + "'");
      exact.push_back(100.0 * static_cast<double>(it->second.exact) / static_cast<double>(first.n));
      semantic.push_back(100.0 * static_cast<double>(it->second.semantic) / static_cast<double>(first.n));
    }
    auto summarize = [&](const std::vector<double>& xs) {
      double mean = 0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double var = 0;
      for (double x : xs) var += (x - mean) * (x - mean);
      var /= static_cast<double>(xs.size());
      return json{{"mean", fixed2(mean)}, {"std", fixed2(std::sqrt(var))}};
    };
    splits[name] = {{"n", first.n}, {"exact_match", summarize(exact)}, {"semantic_valid", summarize(semantic)}};
  }
  return {{"runs", reports.size()}, {"dataset_digest", reports[0].dataset_digest}, {"splits", std::move(splits)}};
}

std::string dataset_stats(const Dataset& dataset) {
  std::ostringstream out;
  const auto& ex = dataset.examples;
  out << "examples: " << ex.size() << '\n';
  out << "adverbs: " << Lexicon(dataset.registry).entries().size() << " (" << dataset.registry.size()
      << " extra)\n";

  std::map<std::string, std::size_t> verbs, types, adverbs;
  std::size_t total_length = 0, max_length = 0;
  for (const auto& e : ex) {
    ++verbs[std::string(to_string(e.verb()))];
    ++types[e.adverb ? std::string(to_string(e.adverb->type)) : "(none)"];
    ++adverbs[e.adverb ? e.adverb->surface : "(none)"];
    total_length += e.target.size();
    max_length = std::max(max_length, e.target.size());
  }
  if (!ex.empty()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", static_cast<double>(total_length) / static_cast<double>(ex.size()));
    out << "target length: mean " << buf << ", max " << max_length << '\n';
  }
  out << "verbs:\n";
  for (const auto& [k, v] : verbs) out << "  " << k << ' ' << v << '\n';
  out << "adverb types:\n";
  for (const auto& [k, v] : types) out << "  " << k << ' ' << v << '\n';
  out << "splits:\n";
  for (const auto& [name, p] : dataset.splits()) {
    out << "  " << name << " train " << p.train.size() << " test " << p.test.size();
    if (!p.unused.empty()) out << " unused " << p.unused.size();
    out << '\n';
  }
  out << "most frequent adverbs:\n";
  std::vector<std::pair<std::string, std::size_t>> ranked(adverbs.begin(), adverbs.end());
  std::ranges::stable_sort(ranked, [](const auto& a, const auto& b) { return a.second > b.second; });
  for (std::size_t i = 0; i < ranked.size() && i < 10; ++i)
    out << "  " << ranked[i].first << ' ' << ranked[i].second << '\n';
  return out.str();
}

}  // namespace manner
