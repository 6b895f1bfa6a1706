#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtbreak/benchmark.h"

namespace mtbreak {

inline constexpr int kHistogramBins = 10;
inline constexpr int kGridEdges = kHistogramBins + 1;

struct ScoredLabel {
  double score = 0.0;
  BreakdownLabel label = BreakdownLabel::kBreakdown;
};

struct ScoredInstance {
  std::string instance_id;
  double score = 0.0;
};

struct ThresholdModel {
  std::string metric;
  std::string task;
  std::string test_language;
  std::string task_language;
  // Edges of the ten-bin histogram over dev scores: min + k (max - min) / 10.
  std::array<double, kGridEdges> candidate_grid{};
  double chosen_threshold = 0.0;
  double dev_macro_f1 = 0.0;
  // All dev scores equal: the grid collapses onto that value.
  bool degenerate = false;
  // Which end of the winning histogram interval became the threshold.
  std::string edge_rule = "lower";
};

struct Prediction {
  std::string instance_id;
  BreakdownLabel predicted = BreakdownLabel::kBreakdown;
  double score = 0.0;

  bool operator==(const Prediction&) const = default;
};

// score >= threshold -> NoBreakdown.
inline BreakdownLabel decide(double score, double threshold) {
  return score >= threshold ? BreakdownLabel::kNoBreakdown : BreakdownLabel::kBreakdown;
}

std::array<double, kGridEdges> histogram_edges(double min, double max);

// Evaluates dev macro-F1 at every grid edge and keeps the best, preferring the
// smallest edge on ties. Throws kEmptyDev / kNonFiniteScore. Identification
// fields of the returned model are left for the caller.
ThresholdModel fit_threshold(std::span<const ScoredLabel> dev);

std::vector<Prediction> classify(const ThresholdModel& model,
                                 std::span<const ScoredInstance> scored);

// Pairs each benchmark instance with its min-over-segments score.
std::vector<ScoredInstance> score_instances(std::span<const BreakdownInstance> bench,
                                            const MetricScoreSet& scores);
std::vector<ScoredLabel> scored_labels(std::span<const BreakdownInstance> bench,
                                       const MetricScoreSet& scores);

std::string serialize_model_json(const ThresholdModel& model);
ThresholdModel parse_model_json(std::string_view text);

std::string serialize_predictions_tsv(std::span<const Prediction> predictions);
std::vector<Prediction> parse_predictions_tsv(std::string_view text);

}  // namespace mtbreak
