#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtbreak/corpus.h"
#include "mtbreak/report.h"

namespace mtbreak {

struct MetricEntry {
  MetricDescriptor descriptor;
  // Template path ("{lang}" is replaced by the test language). Native
  // metrics without a path are computed from the instances.
  std::optional<std::string> scores;
};

struct RunConfig {
  Task task = Task::kSP;
  std::string task_language;
  std::vector<std::string> test_languages;
  std::string instances;  // template path
  std::optional<std::string> dev_ids;
  std::optional<std::size_t> dev_prefix;
  std::optional<std::string> rtt_back;  // back-translation TSV, enables pseudo-references
  std::vector<MetricEntry> metrics;
  std::vector<std::string> ensemble;  // pinned members, empty = top three by dev F1
  std::filesystem::path out_dir = "mtbreak_out";
  std::uint64_t seed = 0;
  std::filesystem::path base_dir = ".";  // relative paths resolve against this
};

std::filesystem::path resolve_path(const RunConfig& config, const std::string& templ,
                                   const std::string& language);

// Flat "key = value" document, '#' comments. Relative paths are resolved
// against the config file's directory. MTBREAK_OUT_DIR and MTBREAK_SEED
// override out_dir and seed when set.
RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);
void apply_env_overrides(RunConfig& config);

// Checks paths and metric/reference compatibility without computing scores.
// Throws kInvalidConfig.
void validate_config(const RunConfig& config);

struct PipelineResult {
  ReportSet reports;
  std::vector<ThresholdModel> models;
  // predictions on the test split keyed by (metric, language pair)
  std::map<std::pair<std::string, std::string>, std::vector<Prediction>> predictions;
};

// ingest -> benchmark -> calibrate -> predict -> evaluate -> aggregate.
// Failures are rethrown with the stage name and the offending cell.
PipelineResult run_pipeline(const RunConfig& config);

// Writes report.{json,md,csv}, histograms.{json,csv}, models/ and
// predictions/ under config.out_dir.
void write_pipeline_outputs(const PipelineResult& result, const std::filesystem::path& out_dir);

// Scores every segment of every instance with a native metric.
MetricScoreSet compute_native_scores(const MetricDescriptor& metric,
                                     const std::vector<TranslationInstance>& instances);

}  // namespace mtbreak
