#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mtbreak/benchmark.h"
#include "mtbreak/classifier.h"

namespace mtbreak {

// Positive class = NoBreakdown.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

// Predictions and labels are matched by instance id; both sides must cover
// the same ids exactly once. Throws kIdMismatch.
ConfusionMatrix confusion(std::span<const Prediction> predictions,
                          std::span<const BreakdownInstance> labels);

// Mean of the per-class F1 scores. Any 0/0 is taken as 0. Throws kEmptyMatrix.
double macro_f1(const ConfusionMatrix& cm);
// Matthews correlation; 0 when a marginal is empty. Throws kEmptyMatrix.
double mcc(const ConfusionMatrix& cm);

// Fair coin per instance, drawn from a hash of (seed, instance id) so the
// draw for an instance does not depend on its position.
std::vector<Prediction> random_baseline(std::span<const BreakdownInstance> labels,
                                        std::uint64_t seed);

// Two-of-three majority. Lists must carry the same ids in the same order;
// throws kMisalignment otherwise. The score of an ensemble prediction is the
// fraction of NoBreakdown votes.
std::vector<Prediction> ensemble_vote(std::span<const Prediction> a, std::span<const Prediction> b,
                                      std::span<const Prediction> c);

struct MetricCandidate {
  std::string metric;
  double dev_macro_f1 = 0.0;
};

// The three best metrics by dev macro-F1, ties broken by name. Names in
// `pinned` (exactly three) override the ranking.
std::vector<std::string> select_top_three(std::span<const MetricCandidate> candidates,
                                          std::span<const std::string> pinned = {});

struct PairResult {
  std::string task;
  std::string metric;
  std::string test_language;
  std::string task_language;
  std::optional<double> threshold;  // absent for baselines and ensembles
  ConfusionMatrix cm;
  double macro_f1 = 0.0;
  double mcc = 0.0;
  ClassCounts counts;  // test-set class counts

  std::string language_pair() const { return test_language + "-" + task_language; }
};

PairResult evaluate_pair(std::string task, std::string metric, std::span<const Prediction> preds,
                         std::span<const BreakdownInstance> labels,
                         std::optional<double> threshold = std::nullopt);

struct EvaluationReport {
  std::string task;
  std::string metric;
  std::vector<PairResult> rows;  // sorted by language pair
  double mean_macro_f1 = 0.0;
  double mean_mcc = 0.0;
};

// Unweighted mean over language pairs. Rows are put in canonical order before
// summing so the result does not depend on input order. Throws kMixedMetrics.
EvaluationReport aggregate(std::vector<PairResult> rows);

struct ThresholdDispersion {
  double mean = 0.0;
  double stddev = 0.0;             // sample (n - 1)
  double population_stddev = 0.0;  // n
  std::size_t count = 0;
};

// Throws kTooFewModels below two models and kMixedMetrics across metrics/tasks.
ThresholdDispersion threshold_dispersion(std::span<const ThresholdModel> models);

}  // namespace mtbreak
