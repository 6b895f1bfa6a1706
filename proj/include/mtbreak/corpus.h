#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mtbreak {

enum class Task { kSP, kQA, kDST };
enum class SegmentRole { kUtterance, kQuestion, kContext, kSentence };

std::string_view to_string(Task task);
std::string_view to_string(SegmentRole role);
Task parse_task(std::string_view text);
SegmentRole parse_role(std::string_view text);

struct Segment {
  std::string segment_id;
  SegmentRole role = SegmentRole::kSentence;
  std::string source_text;      // test language
  std::string hypothesis_text;  // MT output, task language
  std::optional<std::string> reference_text;

  bool operator==(const Segment&) const = default;
};

struct TranslationInstance {
  std::string instance_id;
  Task task = Task::kSP;
  std::string test_language;
  std::string task_language;
  std::vector<Segment> segments;
  bool task_language_correct = false;
  bool translated_correct = false;

  bool has_references() const;
  bool operator==(const TranslationInstance&) const = default;
};

// Throws kMalformedRecord when the segment layout does not fit the task or a
// source/hypothesis is blank.
void validate_instance(const TranslationInstance& instance);

enum class InstanceSchema { kJsonl, kTsv };

// Loads and validates an instance file, preserving file order. The TSV layout
// carries one row per segment (see README); rows of one instance are adjacent.
std::vector<TranslationInstance> load_instances(const std::filesystem::path& path,
                                                InstanceSchema schema = InstanceSchema::kJsonl);
std::vector<TranslationInstance> parse_instances_jsonl(std::string_view text);

std::string serialize_instance_jsonl(const TranslationInstance& instance);
std::string serialize_instances_jsonl(const std::vector<TranslationInstance>& instances);

enum class MetricProvenance { kNative, kExternal };

struct ScoreRange {
  double low = 0.0;
  double high = 0.0;
  bool operator==(const ScoreRange&) const = default;
};

struct MetricDescriptor {
  std::string name;
  bool needs_reference = true;
  std::optional<ScoreRange> declared_range;
  MetricProvenance provenance = MetricProvenance::kExternal;

  static MetricDescriptor sentence_bleu();
  static MetricDescriptor chrf();
  // Rejects the reserved native names.
  static MetricDescriptor external(std::string name, bool needs_reference,
                                   std::optional<ScoreRange> range = std::nullopt);
  // Native metrics, then the neural metrics the released scores cover.
  static MetricDescriptor known(std::string_view name);

  bool operator==(const MetricDescriptor&) const = default;
};

bool is_native_metric_name(std::string_view name);

struct ScoreKey {
  std::string instance_id;
  std::size_t segment_index = 0;

  auto operator<=>(const ScoreKey&) const = default;
};

struct MetricScoreSet {
  MetricDescriptor metric;
  std::map<ScoreKey, double> scores;

  std::optional<double> find(std::string_view instance_id, std::size_t segment_index) const;
  bool operator==(const MetricScoreSet&) const = default;
};

// Parses a score file (TSV with header, or JSONL when the extension is
// .jsonl). Checks finiteness and the declared range; duplicates are rejected.
MetricScoreSet load_scores(const std::filesystem::path& path, const MetricDescriptor& metric);
MetricScoreSet parse_scores_tsv(std::string_view text, const MetricDescriptor& metric);
MetricScoreSet parse_scores_jsonl(std::string_view text, const MetricDescriptor& metric);

// load_scores followed by check_complete against the instances.
MetricScoreSet load_scores(const std::filesystem::path& path, const MetricDescriptor& metric,
                           const std::vector<TranslationInstance>& instances);

// Every segment of every instance must be scored and every key must name an
// existing segment. Throws kMissingScore / kUnknownInstanceId.
void check_complete(const MetricScoreSet& scores,
                    const std::vector<TranslationInstance>& instances);

void insert_score(MetricScoreSet& set, ScoreKey key, double score);

std::string serialize_scores_tsv(const MetricScoreSet& scores);

// Shared file helpers.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
std::vector<std::string_view> split_lines(std::string_view text);
std::vector<std::string_view> split_tabs(std::string_view line);
double parse_double(std::string_view text);
// Backslash escapes for TSV text fields: \t \n \r \\.
std::string tsv_escape(std::string_view field);
std::string tsv_unescape(std::string_view field);
std::string format_double(double value);

}  // namespace mtbreak
