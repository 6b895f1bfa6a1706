#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mtbreak/classifier.h"
#include "mtbreak/stats.h"

namespace mtbreak {

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;  // bins are labelled by this end point
  std::size_t correct = 0;    // translated input solved (NoBreakdown)
  std::size_t incorrect = 0;  // breakdown
};

// Ten equal-width bins over [min, max] of test scores; the last bin is closed.
struct HistogramExport {
  std::string task;
  std::string metric;
  std::string test_language;
  std::string task_language;
  double min = 0.0;
  double max = 0.0;
  double threshold = 0.0;
  std::array<HistogramBin, kHistogramBins> bins{};

  std::size_t total() const;
};

HistogramExport build_histogram(const ThresholdModel& model,
                                std::span<const ScoredInstance> scored,
                                std::span<const BreakdownInstance> labels);

struct ReportSet {
  std::vector<EvaluationReport> reports;
  // keyed by (task, metric)
  std::map<std::pair<std::string, std::string>, ThresholdDispersion> dispersions;
  std::vector<HistogramExport> histograms;
  std::map<std::string, std::vector<std::string>> ensemble_members;  // by task
};

enum class ReportFormat { kJson, kMarkdown, kCsv };

ReportFormat parse_report_format(std::string_view text);

// Byte-stable renderings: sorted JSON keys with round-trip doubles, and
// three-decimal human tables.
std::string render_report(const ReportSet& set, ReportFormat format);
std::string render_histograms_json(std::span<const HistogramExport> histograms);
std::string render_histograms_csv(std::span<const HistogramExport> histograms);

// Writes render_report(set, format) to `path`. Throws kIoError, and
// kInvalidConfig for an empty report set.
void emit_report(const ReportSet& set, ReportFormat format, const std::filesystem::path& path);

// Per-pair rows as stored by `mtbreak eval` and read back by `mtbreak report`.
std::string serialize_pair_result_json(const PairResult& row);
PairResult parse_pair_result_json(std::string_view text);

std::string format_fixed3(double value);

}  // namespace mtbreak
