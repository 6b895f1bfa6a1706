#include "mtbreak/report.h"

#include <algorithm>
#include <cstdio>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "mtbreak/error.h"

namespace mtbreak {

using nlohmann::json;

std::size_t HistogramExport::total() const {
  std::size_t n = 0;
  for (const auto& b : bins) n += b.correct + b.incorrect;
  return n;
}

HistogramExport build_histogram(const ThresholdModel& model,
                                std::span<const ScoredInstance> scored,
                                std::span<const BreakdownInstance> labels) {
  if (scored.size() != labels.size()) {
    throw Error(ErrorCode::kIdMismatch, "histogram scores and labels differ in length");
  }
  HistogramExport h;
  h.task = model.task;
  h.metric = model.metric;
  h.test_language = model.test_language;
  h.task_language = model.task_language;
  h.threshold = model.chosen_threshold;
  if (scored.empty()) return h;

  h.min = h.max = scored.front().score;
  for (const auto& s : scored) {
    h.min = std::min(h.min, s.score);
    h.max = std::max(h.max, s.score);
  }
  const auto edges = histogram_edges(h.min, h.max);
  for (int i = 0; i < kHistogramBins; ++i) {
    h.bins[i].lower = edges[i];
    h.bins[i].upper = edges[i + 1];
  }
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (scored[i].instance_id != labels[i].id()) {
      throw Error(ErrorCode::kIdMismatch, "histogram row " + std::to_string(i) + " ids differ");
    }
    // last edge <= score, capped at the closed final bin
    const auto it = std::upper_bound(edges.begin(), edges.end(), scored[i].score);
    int bin = static_cast<int>(it - edges.begin()) - 1;
    bin = std::clamp(bin, 0, kHistogramBins - 1);
    if (labels[i].label == BreakdownLabel::kNoBreakdown) {
      ++h.bins[bin].correct;
    } else {
      ++h.bins[bin].incorrect;
    }
  }
  return h;
}

ReportFormat parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::kJson;
  if (text == "markdown" || text == "md") return ReportFormat::kMarkdown;
  if (text == "csv") return ReportFormat::kCsv;
  throw Error(ErrorCode::kInvalidConfig, "unknown report format '" + std::string(text) + "'");
}

std::string format_fixed3(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", value);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

namespace {

json pair_to_json(const PairResult& r) {
  json j = {{"task", r.task},
            {"metric", r.metric},
            {"test_language", r.test_language},
            {"task_language", r.task_language},
            {"language_pair", r.language_pair()},
            {"threshold", r.threshold ? json(*r.threshold) : json(nullptr)},
            {"confusion", {{"tp", r.cm.tp}, {"fp", r.cm.fp}, {"fn", r.cm.fn}, {"tn", r.cm.tn}}},
            {"macro_f1", r.macro_f1},
            {"mcc", r.mcc},
            {"no_breakdown", r.counts.no_breakdown},
            {"breakdown", r.counts.breakdown}};
  return j;
}

PairResult pair_from_json(const json& j) {
  PairResult r;
  r.task = j.at("task").get<std::string>();
  r.metric = j.at("metric").get<std::string>();
  r.test_language = j.at("test_language").get<std::string>();
  r.task_language = j.at("task_language").get<std::string>();
  if (!j.at("threshold").is_null()) r.threshold = j.at("threshold").get<double>();
  const json& cm = j.at("confusion");
  r.cm = {cm.at("tp").get<std::uint64_t>(), cm.at("fp").get<std::uint64_t>(),
          cm.at("fn").get<std::uint64_t>(), cm.at("tn").get<std::uint64_t>()};
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.mcc = j.at("mcc").get<double>();
  r.counts = {j.at("no_breakdown").get<std::size_t>(), j.at("breakdown").get<std::size_t>()};
  return r;
}

// Markdown table with every column padded to its widest cell.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row) {
    row.resize(header_.size());
    rows_.push_back(std::move(row));
  }
  std::string render() const {
    std::vector<std::size_t> width(header_.size(), 3);
    const auto measure = [&](const std::vector<std::string>& row) {
      for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], display_width(row[c]));
    };
    measure(header_);
    for (const auto& r : rows_) measure(r);
    std::string out;
    const auto line = [&](const std::vector<std::string>& row) {
      out += "|";
      for (std::size_t c = 0; c < row.size(); ++c) {
        out += " " + row[c] + std::string(width[c] - display_width(row[c]), ' ') + " |";
      }
      out += "\n";
    };
    line(header_);
    out += "|";
    for (std::size_t c = 0; c < header_.size(); ++c) {
      out += c == 0 ? " " + std::string(width[c], '-') + " |"
                    : " " + std::string(width[c] - 1, '-') + ": |";
    }
    out += "\n";
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  // code points, good enough for the ASCII tables emitted here plus "±"
  static std::size_t display_width(const std::string& s) {
    std::size_t n = 0;
    for (unsigned char c : s) n += (c & 0xC0) != 0x80;
    return n;
  }
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::vector<std::string> tasks_in_order(const ReportSet& set) {
  std::vector<std::string> tasks;
  for (const auto& r : set.reports) {
    if (std::find(tasks.begin(), tasks.end(), r.task) == tasks.end()) tasks.push_back(r.task);
  }
  return tasks;
}

std::vector<std::string> metrics_in_order(const ReportSet& set) {
  std::vector<std::string> metrics;
  for (const auto& r : set.reports) {
    if (std::find(metrics.begin(), metrics.end(), r.metric) == metrics.end()) metrics.push_back(r.metric);
  }
  return metrics;
}

const EvaluationReport* find_report(const ReportSet& set, const std::string& task,
                                    const std::string& metric) {
  for (const auto& r : set.reports) {
    if (r.task == task && r.metric == metric) return &r;
  }
  return nullptr;
}

std::string render_json(const ReportSet& set) {
  json reports = json::array();
  for (const auto& r : set.reports) {
    json rows = json::array();
    json pairs = json::array();
    for (const auto& row : r.rows) {
      rows.push_back(pair_to_json(row));
      pairs.push_back(row.language_pair());
    }
    reports.push_back({{"task", r.task},
                       {"metric", r.metric},
                       {"mean_macro_f1", r.mean_macro_f1},
                       {"mean_mcc", r.mean_mcc},
                       {"language_pairs", std::move(pairs)},
                       {"rows", std::move(rows)}});
  }
  json dispersions = json::array();
  for (const auto& [key, d] : set.dispersions) {
    dispersions.push_back({{"task", key.first},
                           {"metric", key.second},
                           {"mean", d.mean},
                           {"stddev", d.stddev},
                           {"population_stddev", d.population_stddev},
                           {"count", d.count}});
  }
  json members = json::object();
  for (const auto& [task, names] : set.ensemble_members) members[task] = names;
  json doc = {{"reports", std::move(reports)},
              {"threshold_dispersion", std::move(dispersions)},
              {"ensemble_members", std::move(members)}};
  return doc.dump(2) + "\n";
}

std::string render_markdown(const ReportSet& set) {
  const auto tasks = tasks_in_order(set);
  const auto metrics = metrics_in_order(set);
  std::string out = "# Breakdown detection report\n\n";

  out += "## Summary (mean over language pairs)\n\n";
  std::vector<std::string> header{"Metric"};
  for (const auto& t : tasks) {
    header.push_back(t + " F1");
    header.push_back(t + " MCC");
  }
  Table summary(header);
  for (const auto& m : metrics) {
    std::vector<std::string> row{m};
    for (const auto& t : tasks) {
      const auto* r = find_report(set, t, m);
      row.push_back(r ? format_fixed3(r->mean_macro_f1) : "-");
      row.push_back(r ? format_fixed3(r->mean_mcc) : "-");
    }
    summary.add(std::move(row));
  }
  out += summary.render();

  for (const auto& t : tasks) {
    // language pairs in canonical order, with their test class counts
    std::vector<std::string> pairs;
    std::map<std::string, ClassCounts> counts;
    for (const auto& r : set.reports) {
      if (r.task != t) continue;
      for (const auto& row : r.rows) {
        if (!counts.contains(row.language_pair())) pairs.push_back(row.language_pair());
        counts[row.language_pair()] = row.counts;
      }
    }
    std::sort(pairs.begin(), pairs.end());
    out += "\n## " + t + " by language pair\n\n";
    std::vector<std::string> ph{"Metric"};
    for (const auto& p : pairs) {
      ph.push_back(p + " F1");
      ph.push_back(p + " MCC");
    }
    Table detail(ph);
    std::vector<std::string> good_bad{"Good / Bad"};
    for (const auto& p : pairs) {
      good_bad.push_back(std::to_string(counts[p].no_breakdown) + " / " +
                         std::to_string(counts[p].breakdown));
      good_bad.emplace_back("");
    }
    detail.add(good_bad);
    for (const auto& m : metrics) {
      const auto* r = find_report(set, t, m);
      if (!r) continue;
      std::vector<std::string> row{m};
      for (const auto& p : pairs) {
        const auto it = std::find_if(r->rows.begin(), r->rows.end(),
                                     [&](const PairResult& x) { return x.language_pair() == p; });
        row.push_back(it != r->rows.end() ? format_fixed3(it->macro_f1) : "-");
        row.push_back(it != r->rows.end() ? format_fixed3(it->mcc) : "-");
      }
      detail.add(std::move(row));
    }
    out += detail.render();
  }

  if (!set.dispersions.empty()) {
    out += "\n## Dev-set thresholds (mean ± sample stddev over language pairs)\n\n";
    std::vector<std::string> th{"Metric"};
    for (const auto& t : tasks) th.push_back(t);
    Table thresholds(th);
    for (const auto& m : metrics) {
      std::vector<std::string> row{m};
      bool any = false;
      for (const auto& t : tasks) {
        auto it = set.dispersions.find({t, m});
        if (it == set.dispersions.end()) {
          row.emplace_back("-");
        } else {
          any = true;
          row.push_back(format_fixed3(it->second.mean) + " ± " + format_fixed3(it->second.stddev));
        }
      }
      if (any) thresholds.add(std::move(row));
    }
    out += thresholds.render();
  }

  if (!set.ensemble_members.empty()) {
    out += "\n## Ensemble members\n\n";
    for (const auto& [task, names] : set.ensemble_members) {
      out += "- " + task + ":";
      for (const auto& n : names) out += " " + n;
      out += "\n";
    }
  }
  return out;
}

std::string render_csv(const ReportSet& set) {
  std::string out =
      "task,metric,language_pair,threshold,tp,fp,fn,tn,no_breakdown,breakdown,macro_f1,mcc\n";
  for (const auto& r : set.reports) {
    for (const auto& row : r.rows) {
      out += row.task + "," + row.metric + "," + row.language_pair() + "," +
             (row.threshold ? format_double(*row.threshold) : "") + "," +
             std::to_string(row.cm.tp) + "," + std::to_string(row.cm.fp) + "," +
             std::to_string(row.cm.fn) + "," + std::to_string(row.cm.tn) + "," +
             std::to_string(row.counts.no_breakdown) + "," + std::to_string(row.counts.breakdown) +
             "," + format_double(row.macro_f1) + "," + format_double(row.mcc) + "\n";
    }
    out += r.task + "," + r.metric + ",mean,,,,,,,," + format_double(r.mean_macro_f1) + "," +
           format_double(r.mean_mcc) + "\n";
  }
  return out;
}

}  // namespace

std::string render_report(const ReportSet& set, ReportFormat format) {
  switch (format) {
    case ReportFormat::kJson: return render_json(set);
    case ReportFormat::kMarkdown: return render_markdown(set);
    case ReportFormat::kCsv: return render_csv(set);
  }
  return {};
}

std::string render_histograms_json(std::span<const HistogramExport> histograms) {
  json arr = json::array();
  for (const auto& h : histograms) {
    json bins = json::array();
    for (const auto& b : h.bins) {
      bins.push_back({{"lower", b.lower},
                      {"upper", b.upper},
                      {"label", format_fixed3(b.upper)},
                      {"correct", b.correct},
                      {"incorrect", b.incorrect}});
    }
    arr.push_back({{"task", h.task},
                   {"metric", h.metric},
                   {"language_pair", h.test_language + "-" + h.task_language},
                   {"min", h.min},
                   {"max", h.max},
                   {"threshold", h.threshold},
                   {"total", h.total()},
                   {"bins", std::move(bins)}});
  }
  return arr.dump(2) + "\n";
}

std::string render_histograms_csv(std::span<const HistogramExport> histograms) {
  std::string out = "task,metric,language_pair,bin,lower,upper,label,correct,incorrect,threshold\n";
  for (const auto& h : histograms) {
    for (int i = 0; i < kHistogramBins; ++i) {
      const auto& b = h.bins[i];
      out += h.task + "," + h.metric + "," + h.test_language + "-" + h.task_language + "," +
             std::to_string(i) + "," + format_double(b.lower) + "," + format_double(b.upper) + "," +
             format_fixed3(b.upper) + "," + std::to_string(b.correct) + "," +
             std::to_string(b.incorrect) + "," + format_double(h.threshold) + "\n";
    }
  }
  return out;
}

void emit_report(const ReportSet& set, ReportFormat format, const std::filesystem::path& path) {
  if (set.reports.empty()) throw Error(ErrorCode::kInvalidConfig, "empty report set");
  write_file(path, render_report(set, format));
}

std::string serialize_pair_result_json(const PairResult& row) {
  return pair_to_json(row).dump(2) + "\n";
}

PairResult parse_pair_result_json(std::string_view text) {
  try {
    return pair_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, std::string("pair result: ") + e.what());
  }
}

}  // namespace mtbreak
