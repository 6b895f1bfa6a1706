#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mtbreak/corpus.h"

namespace mtbreak {

// NoBreakdown is the positive class throughout.
enum class BreakdownLabel { kNoBreakdown, kBreakdown };

std::string_view to_string(BreakdownLabel label);
BreakdownLabel parse_label(std::string_view text);

struct BreakdownInstance {
  TranslationInstance base;
  BreakdownLabel label = BreakdownLabel::kBreakdown;

  const std::string& id() const { return base.instance_id; }
  bool operator==(const BreakdownInstance&) const = default;
};

struct ClassCounts {
  std::size_t no_breakdown = 0;
  std::size_t breakdown = 0;

  std::size_t total() const { return no_breakdown + breakdown; }
  bool operator==(const ClassCounts&) const = default;
};

ClassCounts count_classes(std::span<const BreakdownInstance> bench);

// Keeps instances the task model solved in the task language and labels them
// by the translated-input outcome. Order is preserved. Throws kMixedTasks when
// the instances span more than one (task, test_language, task_language).
std::vector<BreakdownInstance> build_benchmark(std::span<const TranslationInstance> instances);

std::string serialize_benchmark_jsonl(std::span<const BreakdownInstance> bench);
std::vector<BreakdownInstance> parse_benchmark_jsonl(std::string_view text);
std::vector<BreakdownInstance> load_benchmark(const std::filesystem::path& path);

// Dev ids taken from a released split file. Ids in `dropped` belong to the
// dataset but were removed by the benchmark filter; they are skipped instead
// of raising kUnknownInstanceId.
struct DevIdList {
  std::vector<std::string> ids;
  std::set<std::string, std::less<>> dropped;
};

// First `count` benchmark instances are dev; test is the whole benchmark.
struct DevPrefix {
  std::size_t count = 0;
};

using SplitSpec = std::variant<DevIdList, DevPrefix>;

struct BenchmarkSplit {
  Task task = Task::kSP;
  std::string test_language;
  std::string task_language;
  std::vector<BreakdownInstance> dev;
  std::vector<BreakdownInstance> test;
  // Set for prefix splits, where test deliberately spans the full benchmark.
  bool test_includes_dev = false;
  ClassCounts dev_counts;
  ClassCounts test_counts;
};

BenchmarkSplit split_dev_test(std::span<const BreakdownInstance> bench, const SplitSpec& spec);

// split.json: {"dev": [ids], "test": [ids], "test_includes_dev": bool}.
std::string serialize_split_json(const BenchmarkSplit& split);
// Rebuilds a split from split.json against the benchmark it was made from.
BenchmarkSplit parse_split_json(std::span<const BreakdownInstance> bench, std::string_view text);

// One id per line; blank lines and '#' comments ignored.
std::vector<std::string> load_id_list(const std::filesystem::path& path);

// Minimum over the instance's segment scores, so "any segment below the
// threshold" becomes a single comparison. Throws kMissingScore.
double instance_score(const TranslationInstance& instance, const MetricScoreSet& scores);
inline double instance_score(const BreakdownInstance& instance, const MetricScoreSet& scores) {
  return instance_score(instance.base, scores);
}

// Round-trip pseudo-reference: for each segment the MT output becomes the
// source, the back-translation the hypothesis and the original test-language
// input the reference. One back-translation per segment.
TranslationInstance reassemble_rtt(const TranslationInstance& instance,
                                   std::span<const std::string> back_translations);
TranslationInstance reassemble_rtt(const TranslationInstance& instance,
                                   const std::string& back_translation);

// back.tsv: header instance_id<TAB>segment_index<TAB>back_translation, text
// with \t \n \\ escapes. Every segment of every instance must be covered.
std::vector<TranslationInstance> reassemble_rtt_all(
    std::span<const TranslationInstance> instances, std::string_view back_tsv);

}  // namespace mtbreak
