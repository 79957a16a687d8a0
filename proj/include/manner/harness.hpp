#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "manner/forge.hpp"

namespace manner {

struct PredictionRecord {
  std::size_t index = 0;
  std::vector<std::string> prediction;
  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

bool exact_match(std::span<const std::string> prediction, std::span<const std::string> target);

/// 100 * num / den with two decimals, rounded half to even using integer
/// arithmetic only. den must be positive.
std::string format_percent(std::size_t num, std::size_t den);

/// Prediction tokens parse, execute without error and reach the verb goal.
bool semantically_valid(std::span<const std::string> prediction, const Example& example,
                        const Physics& physics = {});

struct SplitMetrics {
  std::size_t n = 0;
  std::size_t exact = 0;
  std::size_t semantic = 0;
  friend bool operator==(const SplitMetrics&, const SplitMetrics&) = default;
};

struct EvalReport {
  std::string dataset_digest;
  std::string config_digest;
  std::string predictions_digest;
  std::map<std::string, SplitMetrics> splits;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Scores the test partition of each named split (all splits when `splits`
/// is empty). Predictions for indices outside those test sets are ignored.
/// Throws Error with UnknownIndex, DuplicatePrediction or MissingPrediction.
EvalReport evaluate(const Dataset& dataset, std::span<const PredictionRecord> predictions,
                    std::span<const std::string> splits = {}, unsigned jobs = 1);

/// One `{"index": i, "prediction": [tokens]}` per line. Throws
/// Error(MalformedRecord) with the line number.
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
void write_predictions(const std::filesystem::path& path, std::span<const PredictionRecord> predictions);

/// Gold targets as predictions, in index order.
std::vector<PredictionRecord> gold_predictions(const Dataset& dataset);

/// Mean and population standard deviation of the per-split percentages over
/// several reports of the same dataset. Throws Error(InvalidArgument).
nlohmann::json aggregate_reports(std::span<const EvalReport> reports);

/// Human-readable counts: splits, verbs, adverb types, adverbs, lengths.
std::string dataset_stats(const Dataset& dataset);

}  // namespace manner
