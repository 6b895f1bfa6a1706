#include "mtbreak/classifier.h"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "mtbreak/error.h"
#include "mtbreak/stats.h"

namespace mtbreak {

using nlohmann::json;

std::array<double, kGridEdges> histogram_edges(double min, double max) {
  std::array<double, kGridEdges> edges{};
  const double width = max - min;
  for (int k = 0; k < kGridEdges; ++k) edges[k] = min + k * width / kHistogramBins;
  // pin the outer edges so the extreme scores sit exactly on them
  edges.front() = min;
  edges.back() = max;
  return edges;
}

namespace {

double dev_macro_f1_at(std::span<const ScoredLabel> dev, double threshold) {
  ConfusionMatrix cm;
  for (const auto& d : dev) {
    const bool predicted_pos = decide(d.score, threshold) == BreakdownLabel::kNoBreakdown;
    const bool actual_pos = d.label == BreakdownLabel::kNoBreakdown;
    if (predicted_pos && actual_pos) ++cm.tp;
    else if (predicted_pos) ++cm.fp;
    else if (actual_pos) ++cm.fn;
    else ++cm.tn;
  }
  return macro_f1(cm);
}

}  // namespace

ThresholdModel fit_threshold(std::span<const ScoredLabel> dev) {
  if (dev.empty()) throw Error(ErrorCode::kEmptyDev, "no dev instances");
  double lo = dev.front().score;
  double hi = dev.front().score;
  for (const auto& d : dev) {
    if (!std::isfinite(d.score)) throw Error(ErrorCode::kNonFiniteScore, "non-finite dev score");
    lo = std::min(lo, d.score);
    hi = std::max(hi, d.score);
  }

  ThresholdModel model;
  model.candidate_grid = histogram_edges(lo, hi);
  model.degenerate = lo == hi;
  model.chosen_threshold = model.candidate_grid.front();
  model.dev_macro_f1 = dev_macro_f1_at(dev, model.chosen_threshold);
  for (int k = 1; k < kGridEdges; ++k) {
    const double f1 = dev_macro_f1_at(dev, model.candidate_grid[k]);
    if (f1 > model.dev_macro_f1) {
      model.dev_macro_f1 = f1;
      model.chosen_threshold = model.candidate_grid[k];
    }
  }
  return model;
}

std::vector<Prediction> classify(const ThresholdModel& model,
                                 std::span<const ScoredInstance> scored) {
  std::vector<Prediction> out;
  out.reserve(scored.size());
  for (const auto& s : scored) {
    out.push_back({s.instance_id, decide(s.score, model.chosen_threshold), s.score});
  }
  return out;
}

std::vector<ScoredInstance> score_instances(std::span<const BreakdownInstance> bench,
                                            const MetricScoreSet& scores) {
  std::vector<ScoredInstance> out;
  out.reserve(bench.size());
  for (const auto& b : bench) out.push_back({b.id(), instance_score(b, scores)});
  return out;
}

std::vector<ScoredLabel> scored_labels(std::span<const BreakdownInstance> bench,
                                       const MetricScoreSet& scores) {
  std::vector<ScoredLabel> out;
  out.reserve(bench.size());
  for (const auto& b : bench) out.push_back({instance_score(b, scores), b.label});
  return out;
}

std::string serialize_model_json(const ThresholdModel& model) {
  json j = {{"metric", model.metric},
            {"task", model.task},
            {"test_language", model.test_language},
            {"task_language", model.task_language},
            {"candidate_grid", model.candidate_grid},
            {"chosen_threshold", model.chosen_threshold},
            {"dev_macro_f1", model.dev_macro_f1},
            {"degenerate", model.degenerate},
            {"edge_rule", model.edge_rule}};
  return j.dump(2) + "\n";
}

ThresholdModel parse_model_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    ThresholdModel model;
    model.metric = j.at("metric").get<std::string>();
    model.task = j.at("task").get<std::string>();
    model.test_language = j.at("test_language").get<std::string>();
    model.task_language = j.at("task_language").get<std::string>();
    const auto grid = j.at("candidate_grid").get<std::vector<double>>();
    if (grid.size() != kGridEdges) {
      throw Error(ErrorCode::kMalformedRecord, "model grid must have 11 edges");
    }
    std::copy(grid.begin(), grid.end(), model.candidate_grid.begin());
    model.chosen_threshold = j.at("chosen_threshold").get<double>();
    model.dev_macro_f1 = j.at("dev_macro_f1").get<double>();
    model.degenerate = j.value("degenerate", false);
    model.edge_rule = j.value("edge_rule", std::string("lower"));
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("model file: ") + e.what());
  }
}

std::string serialize_predictions_tsv(std::span<const Prediction> predictions) {
  std::string out = "instance_id\tpredicted\tscore\n";
  for (const auto& p : predictions) {
    out += p.instance_id;
    out.push_back('\t');
    out += to_string(p.predicted);
    out.push_back('\t');
    out += format_double(p.score);
    out.push_back('\n');
  }
  return out;
}

std::vector<Prediction> parse_predictions_tsv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front() != "instance_id\tpredicted\tscore") {
    throw Error(ErrorCode::kMalformedRecord, "line 1: expected header instance_id<TAB>predicted<TAB>score");
  }
  std::vector<Prediction> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_tabs(lines[i]);
    if (f.size() != 3) {
      throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(i + 1) + ": expected 3 columns");
    }
    out.push_back({std::string(f[0]), parse_label(f[1]), parse_double(f[2])});
  }
  return out;
}

}  // namespace mtbreak
