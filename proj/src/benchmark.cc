#include "mtbreak/benchmark.h"

#include <algorithm>
#include <map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "mtbreak/error.h"
#include "mtbreak/text.h"

namespace mtbreak {

using nlohmann::json;

std::string_view to_string(BreakdownLabel label) {
  return label == BreakdownLabel::kNoBreakdown ? "no_breakdown" : "breakdown";
}

BreakdownLabel parse_label(std::string_view text) {
  if (text == "no_breakdown") return BreakdownLabel::kNoBreakdown;
  if (text == "breakdown") return BreakdownLabel::kBreakdown;
  throw Error(ErrorCode::kMalformedRecord, "unknown label '" + std::string(text) + "'");
}

ClassCounts count_classes(std::span<const BreakdownInstance> bench) {
  ClassCounts counts;
  for (const auto& b : bench) {
    if (b.label == BreakdownLabel::kNoBreakdown) {
      ++counts.no_breakdown;
    } else {
      ++counts.breakdown;
    }
  }
  return counts;
}

std::vector<BreakdownInstance> build_benchmark(std::span<const TranslationInstance> instances) {
  std::vector<BreakdownInstance> out;
  if (instances.empty()) return out;
  const auto& first = instances.front();
  for (const auto& inst : instances) {
    if (inst.task != first.task || inst.test_language != first.test_language ||
        inst.task_language != first.task_language) {
      throw Error(ErrorCode::kMixedTasks,
                  "instance '" + inst.instance_id + "' is " + std::string(to_string(inst.task)) +
                      " " + inst.test_language + "-" + inst.task_language + ", expected " +
                      std::string(to_string(first.task)) + " " + first.test_language + "-" +
                      first.task_language);
    }
    if (!inst.task_language_correct) continue;
    out.push_back({inst, inst.translated_correct ? BreakdownLabel::kNoBreakdown
                                                 : BreakdownLabel::kBreakdown});
  }
  return out;
}

std::string serialize_benchmark_jsonl(std::span<const BreakdownInstance> bench) {
  std::string out;
  for (const auto& b : bench) {
    json rec = json::parse(serialize_instance_jsonl(b.base));
    rec["label"] = to_string(b.label);
    out += rec.dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<BreakdownInstance> parse_benchmark_jsonl(std::string_view text) {
  const auto instances = parse_instances_jsonl(text);
  const auto lines = split_lines(text);
  std::vector<BreakdownInstance> out;
  out.reserve(instances.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::is_blank(lines[i])) continue;
    const json rec = json::parse(lines[i]);
    const auto it = rec.find("label");
    if (it == rec.end() || !it->is_string()) {
      throw Error(ErrorCode::kMissingField, "line " + std::to_string(i + 1) + ": missing 'label'");
    }
    BreakdownInstance b{instances[next++], parse_label(it->get<std::string>())};
    if (!b.base.task_language_correct ||
        (b.label == BreakdownLabel::kNoBreakdown) != b.base.translated_correct) {
      throw Error(ErrorCode::kMalformedRecord,
                  "line " + std::to_string(i + 1) + ": label inconsistent with outcomes");
    }
    out.push_back(std::move(b));
  }
  for (const auto& b : out) {
    if (b.base.task != out.front().base.task ||
        b.base.test_language != out.front().base.test_language ||
        b.base.task_language != out.front().base.task_language) {
      throw Error(ErrorCode::kMixedTasks, "benchmark mixes language pairs at '" + b.id() + "'");
    }
  }
  return out;
}

std::vector<BreakdownInstance> load_benchmark(const std::filesystem::path& path) {
  return parse_benchmark_jsonl(read_file(path));
}

BenchmarkSplit split_dev_test(std::span<const BreakdownInstance> bench, const SplitSpec& spec) {
  if (bench.empty()) throw Error(ErrorCode::kEmptySplit, "benchmark is empty");
  BenchmarkSplit split;
  split.task = bench.front().base.task;
  split.test_language = bench.front().base.test_language;
  split.task_language = bench.front().base.task_language;

  if (const auto* prefix = std::get_if<DevPrefix>(&spec)) {
    if (prefix->count == 0) throw Error(ErrorCode::kEmptySplit, "dev prefix of 0 instances");
    if (prefix->count > bench.size()) {
      throw Error(ErrorCode::kEmptySplit, "dev prefix " + std::to_string(prefix->count) +
                                              " exceeds benchmark size " +
                                              std::to_string(bench.size()));
    }
    split.dev.assign(bench.begin(), bench.begin() + static_cast<std::ptrdiff_t>(prefix->count));
    split.test.assign(bench.begin(), bench.end());
    split.test_includes_dev = true;
  } else {
    const auto& list = std::get<DevIdList>(spec);
    std::unordered_set<std::string> bench_ids;
    for (const auto& b : bench) bench_ids.insert(b.id());
    std::unordered_set<std::string> dev_ids;
    for (const auto& id : list.ids) {
      if (bench_ids.contains(id)) {
        dev_ids.insert(id);
      } else if (!list.dropped.contains(id)) {
        throw Error(ErrorCode::kUnknownInstanceId, "dev id '" + id + "' not in benchmark");
      }
    }
    for (const auto& b : bench) (dev_ids.contains(b.id()) ? split.dev : split.test).push_back(b);
    if (split.dev.empty()) throw Error(ErrorCode::kEmptySplit, "dev split is empty");
    if (split.test.empty()) throw Error(ErrorCode::kEmptySplit, "test split is empty");
  }
  split.dev_counts = count_classes(split.dev);
  split.test_counts = count_classes(split.test);
  return split;
}

std::string serialize_split_json(const BenchmarkSplit& split) {
  json dev = json::array();
  json test = json::array();
  for (const auto& b : split.dev) dev.push_back(b.id());
  for (const auto& b : split.test) test.push_back(b.id());
  json j = {{"task", to_string(split.task)},
            {"test_language", split.test_language},
            {"task_language", split.task_language},
            {"dev", std::move(dev)},
            {"test", std::move(test)},
            {"test_includes_dev", split.test_includes_dev}};
  return j.dump(2) + "\n";
}

BenchmarkSplit parse_split_json(std::span<const BreakdownInstance> bench, std::string_view text) {
  if (bench.empty()) throw Error(ErrorCode::kEmptySplit, "benchmark is empty");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("split file: ") + e.what());
  }
  std::map<std::string, const BreakdownInstance*, std::less<>> by_id;
  for (const auto& b : bench) by_id.emplace(b.id(), &b);
  const auto collect = [&](const char* key) {
    std::vector<BreakdownInstance> out;
    if (!j.contains(key) || !j[key].is_array()) {
      throw Error(ErrorCode::kMissingField, std::string("split file: missing '") + key + "'");
    }
    for (const auto& id : j[key]) {
      const auto name = id.get<std::string>();
      auto it = by_id.find(name);
      if (it == by_id.end()) throw Error(ErrorCode::kUnknownInstanceId, "split id '" + name + "' not in benchmark");
      out.push_back(*it->second);
    }
    if (out.empty()) throw Error(ErrorCode::kEmptySplit, std::string(key) + " split is empty");
    return out;
  };
  BenchmarkSplit split;
  split.task = bench.front().base.task;
  split.test_language = bench.front().base.test_language;
  split.task_language = bench.front().base.task_language;
  split.dev = collect("dev");
  split.test = collect("test");
  split.test_includes_dev = j.value("test_includes_dev", false);
  split.dev_counts = count_classes(split.dev);
  split.test_counts = count_classes(split.test);
  return split;
}

std::vector<std::string> load_id_list(const std::filesystem::path& path) {
  std::vector<std::string> ids;
  const std::string content = read_file(path);
  for (auto line : split_lines(content)) {
    while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    ids.emplace_back(line);
  }
  return ids;
}

double instance_score(const TranslationInstance& instance, const MetricScoreSet& scores) {
  if (instance.segments.empty()) {
    throw Error(ErrorCode::kMissingScore, "instance '" + instance.instance_id + "' has no segments");
  }
  double lowest = 0.0;
  for (std::size_t s = 0; s < instance.segments.size(); ++s) {
    const auto score = scores.find(instance.instance_id, s);
    if (!score) {
      throw Error(ErrorCode::kMissingScore, scores.metric.name + " has no score for (" +
                                                instance.instance_id + ", " + std::to_string(s) + ")");
    }
    lowest = s == 0 ? *score : std::min(lowest, *score);
  }
  return lowest;
}

TranslationInstance reassemble_rtt(const TranslationInstance& instance,
                                   std::span<const std::string> back_translations) {
  if (back_translations.size() != instance.segments.size()) {
    throw Error(ErrorCode::kEmptyBackTranslation,
                "instance '" + instance.instance_id + "' needs " +
                    std::to_string(instance.segments.size()) + " back-translations, got " +
                    std::to_string(back_translations.size()));
  }
  TranslationInstance out = instance;
  for (std::size_t s = 0; s < out.segments.size(); ++s) {
    if (text::is_blank(back_translations[s])) {
      throw Error(ErrorCode::kEmptyBackTranslation,
                  "empty back-translation for (" + instance.instance_id + ", " + std::to_string(s) + ")");
    }
    const Segment& orig = instance.segments[s];
    Segment& seg = out.segments[s];
    seg.source_text = orig.hypothesis_text;
    seg.hypothesis_text = back_translations[s];
    seg.reference_text = orig.source_text;
  }
  return out;
}

TranslationInstance reassemble_rtt(const TranslationInstance& instance,
                                   const std::string& back_translation) {
  return reassemble_rtt(instance, std::span<const std::string>(&back_translation, 1));
}

std::vector<TranslationInstance> reassemble_rtt_all(
    std::span<const TranslationInstance> instances, std::string_view back_tsv) {
  const auto lines = split_lines(back_tsv);
  if (lines.empty() || lines.front() != "instance_id\tsegment_index\tback_translation") {
    throw Error(ErrorCode::kMalformedRecord,
                "line 1: expected header instance_id<TAB>segment_index<TAB>back_translation");
  }
  std::map<std::pair<std::string, std::size_t>, std::string> back;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_tabs(lines[i]);
    if (f.size() != 3) {
      throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(i + 1) + ": expected 3 columns");
    }
    const double index = parse_double(f[1]);
    if (index < 0 || index != static_cast<double>(static_cast<std::size_t>(index))) {
      throw Error(ErrorCode::kMalformedRecord, "line " + std::to_string(i + 1) + ": bad segment_index");
    }
    back[{std::string(f[0]), static_cast<std::size_t>(index)}] = tsv_unescape(f[2]);
  }
  std::vector<TranslationInstance> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) {
    std::vector<std::string> texts;
    for (std::size_t s = 0; s < inst.segments.size(); ++s) {
      auto it = back.find({inst.instance_id, s});
      if (it == back.end()) {
        throw Error(ErrorCode::kEmptyBackTranslation,
                    "no back-translation for (" + inst.instance_id + ", " + std::to_string(s) + ")");
      }
      texts.push_back(it->second);
    }
    out.push_back(reassemble_rtt(inst, texts));
  }
  return out;
}

}  // namespace mtbreak
