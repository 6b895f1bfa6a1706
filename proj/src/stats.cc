#include "mtbreak/stats.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <tuple>
#include <unordered_map>

#include "mtbreak/error.h"

namespace mtbreak {

namespace {

bool is_positive(BreakdownLabel label) { return label == BreakdownLabel::kNoBreakdown; }

double safe_ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double f1(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  const double precision = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
  const double recall = safe_ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
  return safe_ratio(2.0 * precision * recall, precision + recall);
}

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

ConfusionMatrix confusion(std::span<const Prediction> predictions,
                          std::span<const BreakdownInstance> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::kIdMismatch, std::to_string(predictions.size()) + " predictions for " +
                                            std::to_string(labels.size()) + " labels");
  }
  std::unordered_map<std::string_view, BreakdownLabel> predicted;
  predicted.reserve(predictions.size());
  for (const auto& p : predictions) {
    if (!predicted.emplace(p.instance_id, p.predicted).second) {
      throw Error(ErrorCode::kIdMismatch, "duplicate prediction for '" + p.instance_id + "'");
    }
  }
  ConfusionMatrix cm;
  for (const auto& l : labels) {
    auto it = predicted.find(l.id());
    if (it == predicted.end()) throw Error(ErrorCode::kIdMismatch, "no prediction for '" + l.id() + "'");
    const bool p = is_positive(it->second);
    const bool a = is_positive(l.label);
    if (p && a) ++cm.tp;
    else if (p) ++cm.fp;
    else if (a) ++cm.fn;
    else ++cm.tn;
    predicted.erase(it);  // a duplicated label id will now miss
  }
  return cm;
}

double macro_f1(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorCode::kEmptyMatrix, "confusion matrix is empty");
  // the negative class swaps the roles of tp/tn and fp/fn
  return 0.5 * (f1(cm.tp, cm.fp, cm.fn) + f1(cm.tn, cm.fn, cm.fp));
}

double mcc(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw Error(ErrorCode::kEmptyMatrix, "confusion matrix is empty");
  using wide = long double;
  const wide tp = cm.tp, fp = cm.fp, fn = cm.fn, tn = cm.tn;
  const wide a = tp + fp, b = tp + fn, c = tn + fp, d = tn + fn;
  if (a == 0 || b == 0 || c == 0 || d == 0) return 0.0;
  const wide numerator = tp * tn - fp * fn;
  // multiply the marginals in sorted order so relabelings give bitwise-equal
  // denominators
  std::array<wide, 4> m{a, b, c, d};
  std::sort(m.begin(), m.end());
  const wide denominator = std::sqrt(m[0] * m[1] * m[2] * m[3]);
  const double value = static_cast<double>(numerator / denominator);
  return std::clamp(value, -1.0, 1.0);
}

std::vector<Prediction> random_baseline(std::span<const BreakdownInstance> labels,
                                        std::uint64_t seed) {
  std::vector<Prediction> out;
  out.reserve(labels.size());
  const std::uint64_t stream = mix64(seed);
  for (const auto& l : labels) {
    const std::uint64_t draw = mix64(stream ^ mix64(fnv1a(l.id())));
    const bool positive = (draw >> 63) != 0;
    out.push_back({l.id(), positive ? BreakdownLabel::kNoBreakdown : BreakdownLabel::kBreakdown,
                   positive ? 1.0 : 0.0});
  }
  return out;
}

std::vector<Prediction> ensemble_vote(std::span<const Prediction> a, std::span<const Prediction> b,
                                      std::span<const Prediction> c) {
  if (a.size() != b.size() || a.size() != c.size()) {
    throw Error(ErrorCode::kMisalignment, "prediction lists differ in length");
  }
  std::vector<Prediction> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].instance_id != b[i].instance_id || a[i].instance_id != c[i].instance_id) {
      throw Error(ErrorCode::kMisalignment, "row " + std::to_string(i) + " ids differ: '" +
                                                a[i].instance_id + "', '" + b[i].instance_id +
                                                "', '" + c[i].instance_id + "'");
    }
    const int votes = is_positive(a[i].predicted) + is_positive(b[i].predicted) +
                      is_positive(c[i].predicted);
    out.push_back({a[i].instance_id,
                   votes >= 2 ? BreakdownLabel::kNoBreakdown : BreakdownLabel::kBreakdown,
                   votes / 3.0});
  }
  return out;
}

std::vector<std::string> select_top_three(std::span<const MetricCandidate> candidates,
                                          std::span<const std::string> pinned) {
  if (!pinned.empty()) {
    if (pinned.size() != 3) {
      throw Error(ErrorCode::kInvalidConfig, "exactly three ensemble metrics must be pinned");
    }
    for (const auto& name : pinned) {
      const bool known = std::any_of(candidates.begin(), candidates.end(),
                                     [&](const MetricCandidate& c) { return c.metric == name; });
      if (!known) throw Error(ErrorCode::kInvalidConfig, "pinned metric '" + name + "' not evaluated");
    }
    return {pinned.begin(), pinned.end()};
  }
  if (candidates.size() < 3) {
    throw Error(ErrorCode::kInvalidConfig, "ensemble needs at least three metrics");
  }
  std::vector<MetricCandidate> ranked(candidates.begin(), candidates.end());
  std::sort(ranked.begin(), ranked.end(), [](const MetricCandidate& x, const MetricCandidate& y) {
    if (x.dev_macro_f1 != y.dev_macro_f1) return x.dev_macro_f1 > y.dev_macro_f1;
    return x.metric < y.metric;
  });
  return {ranked[0].metric, ranked[1].metric, ranked[2].metric};
}

PairResult evaluate_pair(std::string task, std::string metric, std::span<const Prediction> preds,
                         std::span<const BreakdownInstance> labels,
                         std::optional<double> threshold) {
  if (labels.empty()) throw Error(ErrorCode::kEmptyMatrix, "no test instances");
  PairResult row;
  row.task = std::move(task);
  row.metric = std::move(metric);
  row.test_language = labels.front().base.test_language;
  row.task_language = labels.front().base.task_language;
  row.threshold = threshold;
  row.cm = confusion(preds, labels);
  row.macro_f1 = macro_f1(row.cm);
  row.mcc = mcc(row.cm);
  row.counts = count_classes(labels);
  return row;
}

EvaluationReport aggregate(std::vector<PairResult> rows) {
  if (rows.empty()) throw Error(ErrorCode::kMixedMetrics, "no rows to aggregate");
  for (const auto& r : rows) {
    if (r.task != rows.front().task || r.metric != rows.front().metric) {
      throw Error(ErrorCode::kMixedMetrics, "rows mix " + rows.front().task + "/" +
                                                rows.front().metric + " with " + r.task + "/" +
                                                r.metric);
    }
  }
  std::sort(rows.begin(), rows.end(), [](const PairResult& x, const PairResult& y) {
    return std::tie(x.test_language, x.task_language, x.macro_f1, x.mcc) <
           std::tie(y.test_language, y.task_language, y.macro_f1, y.mcc);
  });
  EvaluationReport report;
  report.task = rows.front().task;
  report.metric = rows.front().metric;
  double f1_sum = 0.0;
  double mcc_sum = 0.0;
  for (const auto& r : rows) {
    f1_sum += r.macro_f1;
    mcc_sum += r.mcc;
  }
  report.mean_macro_f1 = f1_sum / static_cast<double>(rows.size());
  report.mean_mcc = mcc_sum / static_cast<double>(rows.size());
  report.rows = std::move(rows);
  return report;
}

ThresholdDispersion threshold_dispersion(std::span<const ThresholdModel> models) {
  if (models.size() < 2) {
    throw Error(ErrorCode::kTooFewModels, "need at least two models, got " + std::to_string(models.size()));
  }
  for (const auto& m : models) {
    if (m.metric != models.front().metric || m.task != models.front().task) {
      throw Error(ErrorCode::kMixedMetrics, "threshold models mix metrics or tasks");
    }
  }
  // canonical order keeps the floating-point sums order-independent
  std::vector<double> values;
  values.reserve(models.size());
  for (const auto& m : models) values.push_back(m.chosen_threshold);
  std::sort(values.begin(), values.end());

  ThresholdDispersion d;
  d.count = values.size();
  const double n = static_cast<double>(values.size());
  d.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - d.mean) * (v - d.mean);
  d.stddev = std::sqrt(ss / (n - 1.0));
  d.population_stddev = std::sqrt(ss / n);
  return d;
}

}  // namespace mtbreak
