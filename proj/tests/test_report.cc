#include <gtest/gtest.h>

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtbreak/error.h"
#include "mtbreak/report.h"
#include "test_util.h"

namespace mtbreak {
namespace {

PairResult row(std::string task, std::string metric, std::string lang, double f1, double m,
               ClassCounts counts = {}) {
  PairResult r;
  r.task = std::move(task);
  r.metric = std::move(metric);
  r.test_language = std::move(lang);
  r.task_language = "en";
  r.macro_f1 = f1;
  r.mcc = m;
  r.counts = counts;
  r.cm = {1, 2, 3, 4};
  return r;
}

ReportSet dst_set() {
  ReportSet set;
  set.reports.push_back(aggregate({row("DST", "comet_da", "zh", 0.61, 0.248, {1465, 1796}),
                                   row("DST", "comet_da", "de", 0.6, 0.181, {1500, 1200})}));
  set.reports.push_back(aggregate({row("DST", "random", "zh", 0.5, -0.01, {1465, 1796}),
                                   row("DST", "random", "de", 0.49, 0.02, {1500, 1200})}));
  set.dispersions[{"DST", "comet_da"}] = {0.1, 0.05, 0.04, 2};
  return set;
}

TEST(FormatFixed3, Rounding) {
  EXPECT_EQ(format_fixed3(0.24425), "0.244");
  EXPECT_EQ(format_fixed3(-0.034), "-0.034");
  EXPECT_EQ(format_fixed3(-0.0001), "0.000");
  EXPECT_EQ(format_fixed3(1.0), "1.000");
}

TEST(RenderReport, SingleMetricMarkdown) {
  ReportSet set;
  set.reports.push_back(aggregate({row("SP", "chrf", "zh", 0.609, 0.234)}));
  const auto md = render_report(set, ReportFormat::kMarkdown);
  EXPECT_NE(md.find("| Metric | SP F1 | SP MCC |"), std::string::npos) << md;
  EXPECT_NE(md.find("| chrf   | 0.609 | 0.234  |"), std::string::npos) << md;
}

TEST(RenderReport, DstGoodBadCounts) {
  const auto md = render_report(dst_set(), ReportFormat::kMarkdown);
  EXPECT_NE(md.find("1465 / 1796"), std::string::npos) << md;
  EXPECT_NE(md.find("Good / Bad"), std::string::npos);
  EXPECT_NE(md.find("0.100 ± 0.050"), std::string::npos) << md;
}

TEST(RenderReport, Deterministic) {
  for (auto fmt : {ReportFormat::kJson, ReportFormat::kMarkdown, ReportFormat::kCsv}) {
    EXPECT_EQ(render_report(dst_set(), fmt), render_report(dst_set(), fmt));
  }
}

TEST(RenderReport, JsonCarriesFullPrecision) {
  const auto j = nlohmann::json::parse(render_report(dst_set(), ReportFormat::kJson));
  ASSERT_TRUE(j.contains("reports"));
  bool found = false;
  for (const auto& r : j["reports"]) {
    if (r["metric"] == "comet_da") {
      EXPECT_EQ(r["mean_mcc"].get<double>(), (0.248 + 0.181) / 2);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(RenderReport, CsvRows) {
  const auto csv = render_report(dst_set(), ReportFormat::kCsv);
  const auto lines = split_lines(csv);
  ASSERT_GE(lines.size(), 5u);
  // header + 4 pair rows + 2 mean rows
  std::size_t rows = 0;
  for (auto l : lines) rows += !l.empty();
  EXPECT_EQ(rows, 7u) << csv;
}

TEST(EmitReport, WritesFileAndRejectsEmpty) {
  testing::TempDir dir;
  emit_report(dst_set(), ReportFormat::kMarkdown, dir.path() / "r.md");
  EXPECT_EQ(read_file(dir.path() / "r.md"), render_report(dst_set(), ReportFormat::kMarkdown));
  EXPECT_THROW(emit_report(ReportSet{}, ReportFormat::kJson, dir.path() / "e.json"), Error);
}

TEST(ParseReportFormat, Names) {
  EXPECT_EQ(parse_report_format("json"), ReportFormat::kJson);
  EXPECT_EQ(parse_report_format("markdown"), ReportFormat::kMarkdown);
  EXPECT_EQ(parse_report_format("csv"), ReportFormat::kCsv);
  EXPECT_THROW(parse_report_format("xml"), Error);
}

TEST(PairResultJson, RoundTrip) {
  auto r = row("QA", "bertscore", "ar", 0.5512, -0.034, {592, 264});
  r.threshold = -0.028;
  const auto back = parse_pair_result_json(serialize_pair_result_json(r));
  EXPECT_EQ(back.metric, r.metric);
  EXPECT_EQ(back.threshold, r.threshold);
  EXPECT_EQ(back.cm, r.cm);
  EXPECT_EQ(back.counts, r.counts);
  EXPECT_EQ(back.macro_f1, r.macro_f1);
  EXPECT_EQ(back.mcc, r.mcc);
}

TEST(BuildHistogram, NegativeRangeAndThreshold) {
  ThresholdModel model;
  model.metric = "comet_da";
  model.chosen_threshold = -0.028;
  const std::vector<double> scores = {-0.74, -0.5, -0.1, 0.0, 0.3, 0.51, 1.0};
  std::vector<ScoredInstance> scored;
  std::vector<BreakdownInstance> labels;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto id = "i" + std::to_string(i);
    scored.push_back({id, scores[i]});
    labels.push_back(testing::labelled(id, scores[i] > 0 ? BreakdownLabel::kNoBreakdown
                                                         : BreakdownLabel::kBreakdown));
  }
  const auto h = build_histogram(model, scored, labels);
  EXPECT_EQ(h.threshold, -0.028);
  EXPECT_EQ(h.bins.front().lower, -0.74);
  EXPECT_EQ(h.bins.back().upper, 1.0);
  EXPECT_EQ(h.total(), scores.size());
  // the maximum lands in the closed last bin
  EXPECT_EQ(h.bins.back().correct, 1u);
  EXPECT_EQ(h.bins.front().incorrect, 1u);
  const auto j = nlohmann::json::parse(render_histograms_json(std::span(&h, 1)));
  EXPECT_EQ(j.size(), 1u);
}

}  // namespace
}  // namespace mtbreak
