#include "mtbreak/corpus.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "mtbreak/error.h"
#include "mtbreak/text.h"

namespace mtbreak {

using nlohmann::json;

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kDuplicateInstanceId: return "DuplicateInstanceId";
    case ErrorCode::kMissingScore: return "MissingScore";
    case ErrorCode::kNonFiniteScore: return "NonFiniteScore";
    case ErrorCode::kRangeViolation: return "RangeViolation";
    case ErrorCode::kUnknownInstanceId: return "UnknownInstanceId";
    case ErrorCode::kDuplicateScore: return "DuplicateScore";
    case ErrorCode::kInvalidMetric: return "InvalidMetric";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kMixedTasks: return "MixedTasks";
    case ErrorCode::kEmptySplit: return "EmptySplit";
    case ErrorCode::kEmptyBackTranslation: return "EmptyBackTranslation";
    case ErrorCode::kEmptyDev: return "EmptyDev";
    case ErrorCode::kIdMismatch: return "IdMismatch";
    case ErrorCode::kEmptyMatrix: return "EmptyMatrix";
    case ErrorCode::kMisalignment: return "Misalignment";
    case ErrorCode::kMixedMetrics: return "MixedMetrics";
    case ErrorCode::kTooFewModels: return "TooFewModels";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

std::string_view to_string(Task task) {
  switch (task) {
    case Task::kSP: return "SP";
    case Task::kQA: return "QA";
    case Task::kDST: return "DST";
  }
  return "?";
}

std::string_view to_string(SegmentRole role) {
  switch (role) {
    case SegmentRole::kUtterance: return "utterance";
    case SegmentRole::kQuestion: return "question";
    case SegmentRole::kContext: return "context";
    case SegmentRole::kSentence: return "sentence";
  }
  return "?";
}

Task parse_task(std::string_view text) {
  if (text == "SP") return Task::kSP;
  if (text == "QA") return Task::kQA;
  if (text == "DST") return Task::kDST;
  throw Error(ErrorCode::kMalformedRecord, "unknown task '" + std::string(text) + "'");
}

SegmentRole parse_role(std::string_view text) {
  if (text == "utterance") return SegmentRole::kUtterance;
  if (text == "question") return SegmentRole::kQuestion;
  if (text == "context") return SegmentRole::kContext;
  if (text == "sentence") return SegmentRole::kSentence;
  throw Error(ErrorCode::kMalformedRecord, "unknown segment role '" + std::string(text) + "'");
}

bool TranslationInstance::has_references() const {
  for (const auto& seg : segments) {
    if (!seg.reference_text || text::is_blank(*seg.reference_text)) return false;
  }
  return true;
}

void validate_instance(const TranslationInstance& inst) {
  const auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kMalformedRecord, "instance '" + inst.instance_id + "': " + why);
  };
  if (inst.instance_id.empty()) fail("empty instance_id");
  if (inst.task == Task::kQA) {
    if (inst.segments.size() != 2) {
      fail("QA instances need exactly 2 segments, got " + std::to_string(inst.segments.size()));
    }
    if (inst.segments[0].role != SegmentRole::kQuestion ||
        inst.segments[1].role != SegmentRole::kContext) {
      fail("QA segments must be question then context");
    }
  } else if (inst.segments.size() != 1) {
    fail(std::string(to_string(inst.task)) + " instances need exactly 1 segment, got " +
         std::to_string(inst.segments.size()));
  }
  for (const auto& seg : inst.segments) {
    if (text::is_blank(seg.source_text)) fail("blank source_text in segment " + seg.segment_id);
    if (text::is_blank(seg.hypothesis_text)) {
      fail("blank hypothesis_text in segment " + seg.segment_id);
    }
  }
}

// ---------------------------------------------------------------------------
// File helpers

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t end = line.find('\t', start);
    if (end == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, end - start));
    start = end + 1;
  }
  return fields;
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kMalformedRecord, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string tsv_unescape(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    if (field[i] == '\\' && i + 1 < field.size()) {
      const char c = field[++i];
      switch (c) {
        case 't': out.push_back('\t'); break;
        case 'n': out.push_back('\n'); break;
        case 'r': out.push_back('\r'); break;
        case '\\': out.push_back('\\'); break;
        default:
          out.push_back('\\');
          out.push_back(c);
      }
    } else {
      out.push_back(field[i]);
    }
  }
  return out;
}

std::string tsv_escape(std::string_view field) {
  std::string out;
  out.reserve(field.size());
  for (char c : field) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\\': out += "\\\\"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Instances

namespace {

std::string malformed_at(std::size_t line_no, const std::string& reason) {
  return "line " + std::to_string(line_no) + ": " + reason;
}

const json& require(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    throw Error(ErrorCode::kMissingField, malformed_at(line_no, std::string("missing '") + key + "'"));
  }
  return *it;
}

std::string require_string(const json& obj, const char* key, std::size_t line_no) {
  const json& v = require(obj, key, line_no);
  if (!v.is_string()) {
    throw Error(ErrorCode::kMalformedRecord,
                malformed_at(line_no, std::string("'") + key + "' must be a string"));
  }
  return v.get<std::string>();
}

bool require_bool(const json& obj, const char* key, std::size_t line_no) {
  const json& v = require(obj, key, line_no);
  if (!v.is_boolean()) {
    throw Error(ErrorCode::kMalformedRecord,
                malformed_at(line_no, std::string("'") + key + "' must be a boolean"));
  }
  return v.get<bool>();
}

TranslationInstance instance_from_json(const json& rec, std::size_t line_no) {
  if (!rec.is_object()) throw Error(ErrorCode::kMalformedRecord, malformed_at(line_no, "not an object"));
  TranslationInstance inst;
  inst.instance_id = require_string(rec, "instance_id", line_no);
  try {
    inst.task = parse_task(require_string(rec, "task", line_no));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kMalformedRecord) throw;
    throw Error(ErrorCode::kMalformedRecord, malformed_at(line_no, "unknown task"));
  }
  inst.test_language = require_string(rec, "test_language", line_no);
  inst.task_language = require_string(rec, "task_language", line_no);
  inst.task_language_correct = require_bool(rec, "task_language_correct", line_no);
  inst.translated_correct = require_bool(rec, "translated_correct", line_no);
  const json& segs = require(rec, "segments", line_no);
  if (!segs.is_array()) throw Error(ErrorCode::kMalformedRecord, malformed_at(line_no, "'segments' must be an array"));
  for (const json& s : segs) {
    if (!s.is_object()) throw Error(ErrorCode::kMalformedRecord, malformed_at(line_no, "segment is not an object"));
    Segment seg;
    seg.segment_id = require_string(s, "segment_id", line_no);
    try {
      seg.role = parse_role(require_string(s, "role", line_no));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kMalformedRecord) throw;
      throw Error(ErrorCode::kMalformedRecord, malformed_at(line_no, "unknown segment role"));
    }
    seg.source_text = require_string(s, "source_text", line_no);
    seg.hypothesis_text = require_string(s, "hypothesis_text", line_no);
    if (auto it = s.find("reference_text"); it != s.end() && !it->is_null()) {
      if (!it->is_string()) {
        throw Error(ErrorCode::kMalformedRecord, malformed_at(line_no, "'reference_text' must be a string"));
      }
      seg.reference_text = it->get<std::string>();
    }
    inst.segments.push_back(std::move(seg));
  }
  try {
    validate_instance(inst);
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedRecord, malformed_at(line_no, e.what()));
  }
  return inst;
}

void check_unique(const std::vector<TranslationInstance>& instances) {
  std::unordered_set<std::string> seen;
  for (const auto& inst : instances) {
    if (!seen.insert(inst.instance_id).second) {
      throw Error(ErrorCode::kDuplicateInstanceId, "instance_id '" + inst.instance_id + "' repeats");
    }
  }
}

bool parse_tsv_bool(std::string_view v, std::size_t line_no) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorCode::kMalformedRecord, malformed_at(line_no, "bad boolean '" + std::string(v) + "'"));
}

constexpr std::string_view kInstanceTsvHeader =
    "instance_id\ttask\ttest_language\ttask_language\ttask_language_correct\ttranslated_correct\t"
    "segment_id\trole\tsource_text\thypothesis_text\treference_text";

std::vector<TranslationInstance> parse_instances_tsv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front() != kInstanceTsvHeader) {
    throw Error(ErrorCode::kMalformedRecord, malformed_at(1, "unexpected instance TSV header"));
  }
  std::vector<TranslationInstance> out;
  std::vector<std::size_t> first_line;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    if (lines[i].empty()) continue;
    const auto f = split_tabs(lines[i]);
    if (f.size() != 11) {
      throw Error(f.size() < 11 ? ErrorCode::kMissingField : ErrorCode::kMalformedRecord,
                  malformed_at(line_no, "expected 11 columns, got " + std::to_string(f.size())));
    }
    const std::string id = tsv_unescape(f[0]);
    if (out.empty() || out.back().instance_id != id) {
      TranslationInstance inst;
      inst.instance_id = id;
      inst.task = parse_task(f[1]);
      inst.test_language = std::string(f[2]);
      inst.task_language = std::string(f[3]);
      inst.task_language_correct = parse_tsv_bool(f[4], line_no);
      inst.translated_correct = parse_tsv_bool(f[5], line_no);
      out.push_back(std::move(inst));
      first_line.push_back(line_no);
    }
    Segment seg;
    seg.segment_id = tsv_unescape(f[6]);
    seg.role = parse_role(f[7]);
    seg.source_text = tsv_unescape(f[8]);
    seg.hypothesis_text = tsv_unescape(f[9]);
    if (!f[10].empty()) seg.reference_text = tsv_unescape(f[10]);
    out.back().segments.push_back(std::move(seg));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    try {
      validate_instance(out[i]);
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedRecord, malformed_at(first_line[i], e.what()));
    }
  }
  check_unique(out);
  return out;
}

}  // namespace

std::vector<TranslationInstance> parse_instances_jsonl(std::string_view text) {
  std::vector<TranslationInstance> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::is_blank(lines[i])) continue;
    json rec;
    try {
      rec = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kMalformedRecord, malformed_at(i + 1, e.what()));
    }
    out.push_back(instance_from_json(rec, i + 1));
  }
  check_unique(out);
  return out;
}

std::vector<TranslationInstance> load_instances(const std::filesystem::path& path,
                                                InstanceSchema schema) {
  const std::string content = read_file(path);
  return schema == InstanceSchema::kJsonl ? parse_instances_jsonl(content)
                                          : parse_instances_tsv(content);
}

std::string serialize_instance_jsonl(const TranslationInstance& inst) {
  json segs = json::array();
  for (const auto& seg : inst.segments) {
    json s = {{"segment_id", seg.segment_id},
              {"role", to_string(seg.role)},
              {"source_text", seg.source_text},
              {"hypothesis_text", seg.hypothesis_text}};
    if (seg.reference_text) s["reference_text"] = *seg.reference_text;
    segs.push_back(std::move(s));
  }
  json rec = {{"instance_id", inst.instance_id},
              {"task", to_string(inst.task)},
              {"test_language", inst.test_language},
              {"task_language", inst.task_language},
              {"segments", std::move(segs)},
              {"task_language_correct", inst.task_language_correct},
              {"translated_correct", inst.translated_correct}};
  return rec.dump();
}

std::string serialize_instances_jsonl(const std::vector<TranslationInstance>& instances) {
  std::string out;
  for (const auto& inst : instances) {
    out += serialize_instance_jsonl(inst);
    out.push_back('\n');
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metrics and scores

bool is_native_metric_name(std::string_view name) {
  return name == "sentence_bleu" || name == "chrf";
}

MetricDescriptor MetricDescriptor::sentence_bleu() {
  return {"sentence_bleu", true, ScoreRange{0.0, 100.0}, MetricProvenance::kNative};
}

MetricDescriptor MetricDescriptor::chrf() {
  return {"chrf", true, ScoreRange{0.0, 100.0}, MetricProvenance::kNative};
}

MetricDescriptor MetricDescriptor::external(std::string name, bool needs_reference,
                                            std::optional<ScoreRange> range) {
  if (name.empty()) throw Error(ErrorCode::kInvalidMetric, "empty metric name");
  if (is_native_metric_name(name)) {
    throw Error(ErrorCode::kInvalidMetric, "'" + name + "' is a native metric");
  }
  if (range && !(range->low <= range->high)) {
    throw Error(ErrorCode::kInvalidMetric, "declared range of '" + name + "' is inverted");
  }
  return {std::move(name), needs_reference, range, MetricProvenance::kExternal};
}

MetricDescriptor MetricDescriptor::known(std::string_view name) {
  if (name == "sentence_bleu" || name == "bleu") return sentence_bleu();
  if (name == "chrf") return chrf();
  if (name == "bertscore") return external("bertscore", true, ScoreRange{0.0, 1.0});
  if (name == "comet_da" || name == "comet_mqm" || name == "unite") {
    return external(std::string(name), true);
  }
  if (name == "comet_qe_da" || name == "comet_qe_mqm" || name == "unite_qe") {
    return external(std::string(name), false);
  }
  throw Error(ErrorCode::kInvalidMetric, "unknown metric '" + std::string(name) + "'");
}

std::optional<double> MetricScoreSet::find(std::string_view instance_id,
                                           std::size_t segment_index) const {
  auto it = scores.find(ScoreKey{std::string(instance_id), segment_index});
  if (it == scores.end()) return std::nullopt;
  return it->second;
}

void insert_score(MetricScoreSet& set, ScoreKey key, double score) {
  const auto where = "(" + key.instance_id + ", " + std::to_string(key.segment_index) + ")";
  if (!std::isfinite(score)) {
    throw Error(ErrorCode::kNonFiniteScore, set.metric.name + " score at " + where);
  }
  // exp/log round-off puts identity BLEU at 100.00000000000004, as the
  // reference scorer does, so bounds get a relative slack of 1e-9.
  const auto outside = [](double v, const ScoreRange& r) {
    const double slack = 1e-9 * std::max({1.0, std::abs(r.low), std::abs(r.high)});
    return v < r.low - slack || v > r.high + slack;
  };
  if (const auto& r = set.metric.declared_range; r && outside(score, *r)) {
    throw Error(ErrorCode::kRangeViolation,
                set.metric.name + " score " + format_double(score) + " at " + where +
                    " outside [" + format_double(r->low) + ", " + format_double(r->high) + "]");
  }
  if (!set.scores.emplace(std::move(key), score).second) {
    throw Error(ErrorCode::kDuplicateScore, set.metric.name + " scores " + where + " twice");
  }
}

namespace {

std::size_t parse_index(std::string_view text, std::size_t line_no) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kMalformedRecord, malformed_at(line_no, "bad segment_index '" + std::string(text) + "'"));
  }
  return value;
}

double parse_score_field(std::string_view text, std::size_t line_no) {
  // from_chars accepts nan/inf spellings; those are reported as non-finite
  // by insert_score rather than as malformed.
  try {
    return parse_double(text);
  } catch (const Error&) {
    throw Error(ErrorCode::kMalformedRecord, malformed_at(line_no, "bad score '" + std::string(text) + "'"));
  }
}

}  // namespace

MetricScoreSet parse_scores_tsv(std::string_view text, const MetricDescriptor& metric) {
  MetricScoreSet set{metric, {}};
  const auto lines = split_lines(text);
  if (lines.empty() || lines.front() != "instance_id\tsegment_index\tscore") {
    throw Error(ErrorCode::kMalformedRecord, malformed_at(1, "expected header instance_id<TAB>segment_index<TAB>score"));
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_tabs(lines[i]);
    if (f.size() != 3) {
      throw Error(ErrorCode::kMalformedRecord, malformed_at(i + 1, "expected 3 columns"));
    }
    insert_score(set, ScoreKey{std::string(f[0]), parse_index(f[1], i + 1)},
                 parse_score_field(f[2], i + 1));
  }
  return set;
}

MetricScoreSet parse_scores_jsonl(std::string_view text, const MetricDescriptor& metric) {
  MetricScoreSet set{metric, {}};
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::is_blank(lines[i])) continue;
    json rec;
    try {
      rec = json::parse(lines[i]);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kMalformedRecord, malformed_at(i + 1, e.what()));
    }
    const std::string id = require_string(rec, "instance_id", i + 1);
    const json& idx = require(rec, "segment_index", i + 1);
    const json& score = require(rec, "score", i + 1);
    if (!idx.is_number_unsigned() || !score.is_number()) {
      throw Error(ErrorCode::kMalformedRecord, malformed_at(i + 1, "segment_index/score must be numeric"));
    }
    insert_score(set, ScoreKey{id, idx.get<std::size_t>()}, score.get<double>());
  }
  return set;
}

MetricScoreSet load_scores(const std::filesystem::path& path, const MetricDescriptor& metric) {
  const std::string content = read_file(path);
  return path.extension() == ".jsonl" ? parse_scores_jsonl(content, metric)
                                      : parse_scores_tsv(content, metric);
}

MetricScoreSet load_scores(const std::filesystem::path& path, const MetricDescriptor& metric,
                           const std::vector<TranslationInstance>& instances) {
  MetricScoreSet set = load_scores(path, metric);
  check_complete(set, instances);
  return set;
}

void check_complete(const MetricScoreSet& scores,
                    const std::vector<TranslationInstance>& instances) {
  std::map<std::string, std::size_t, std::less<>> segment_counts;
  for (const auto& inst : instances) {
    segment_counts.emplace(inst.instance_id, inst.segments.size());
    for (std::size_t s = 0; s < inst.segments.size(); ++s) {
      if (!scores.find(inst.instance_id, s)) {
        throw Error(ErrorCode::kMissingScore, scores.metric.name + " has no score for (" +
                                                  inst.instance_id + ", " + std::to_string(s) + ")");
      }
    }
  }
  if (scores.scores.size() != [&] {
        std::size_t total = 0;
        for (const auto& [id, n] : segment_counts) total += n;
        return total;
      }()) {
    for (const auto& [key, value] : scores.scores) {
      auto it = segment_counts.find(key.instance_id);
      if (it == segment_counts.end() || key.segment_index >= it->second) {
        throw Error(ErrorCode::kUnknownInstanceId,
                    scores.metric.name + " scores unknown segment (" + key.instance_id + ", " +
                        std::to_string(key.segment_index) + ")");
      }
    }
  }
}

std::string serialize_scores_tsv(const MetricScoreSet& scores) {
  std::string out = "instance_id\tsegment_index\tscore\n";
  for (const auto& [key, value] : scores.scores) {
    out += key.instance_id;
    out.push_back('\t');
    out += std::to_string(key.segment_index);
    out.push_back('\t');
    out += format_double(value);
    out.push_back('\n');
  }
  return out;
}

}  // namespace mtbreak
