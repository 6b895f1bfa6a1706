#include "mtbreak/pipeline.h"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "mtbreak/benchmark.h"
#include "mtbreak/classifier.h"
#include "mtbreak/error.h"
#include "mtbreak/stats.h"
#include "mtbreak/surface_metrics.h"

namespace mtbreak {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == ',' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool parse_bool_value(const std::string& key, const std::string& v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw Error(ErrorCode::kInvalidConfig, key + ": expected a boolean, got '" + v + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long value = 0;
  try {
    value = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (v.empty() || used != v.size() || v.front() == '-') {
    throw Error(ErrorCode::kInvalidConfig, key + ": expected a non-negative integer, got '" + v + "'");
  }
  return value;
}

// Runs one stage, prefixing any library error with the stage and cell.
template <typename F>
auto in_stage(const std::string& stage, const std::string& cell, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), "stage '" + stage + "' [" + cell + "]: " + e.what());
  }
}

}  // namespace

std::filesystem::path resolve_path(const RunConfig& config, const std::string& templ,
                                   const std::string& language) {
  std::string p = templ;
  for (auto pos = p.find("{lang}"); pos != std::string::npos; pos = p.find("{lang}", pos)) {
    p.replace(pos, 6, language);
    pos += language.size();
  }
  std::filesystem::path path(p);
  return path.is_absolute() ? path : config.base_dir / path;
}

RunConfig parse_run_config(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig config;
  config.base_dir = base_dir;
  std::vector<std::string> roster;
  std::map<std::string, std::map<std::string, std::string>> metric_opts;
  bool have_task = false;

  std::size_t line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidConfig, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key == "task") {
      try {
        config.task = parse_task(value);
      } catch (const Error&) {
        throw Error(ErrorCode::kInvalidConfig, "task must be SP, QA or DST");
      }
      have_task = true;
    } else if (key == "task_language") {
      config.task_language = value;
    } else if (key == "test_languages") {
      config.test_languages = split_list(value);
    } else if (key == "instances") {
      config.instances = value;
    } else if (key == "dev_ids") {
      config.dev_ids = value;
    } else if (key == "dev_prefix") {
      config.dev_prefix = parse_u64(key, value);
    } else if (key == "rtt_back") {
      config.rtt_back = value;
    } else if (key == "metrics") {
      roster = split_list(value);
    } else if (key == "ensemble") {
      config.ensemble = split_list(value);
    } else if (key == "out_dir") {
      const std::filesystem::path p(value);
      config.out_dir = p.is_absolute() ? p : base_dir / p;
    } else if (key == "seed") {
      config.seed = parse_u64(key, value);
    } else if (key.rfind("metric.", 0) == 0) {
      const auto dot = key.rfind('.');
      if (dot <= 7) throw Error(ErrorCode::kInvalidConfig, "bad metric key '" + key + "'");
      metric_opts[key.substr(7, dot - 7)][key.substr(dot + 1)] = value;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }

  if (!have_task) throw Error(ErrorCode::kInvalidConfig, "missing 'task'");
  if (config.task_language.empty()) throw Error(ErrorCode::kInvalidConfig, "missing 'task_language'");
  if (config.test_languages.empty()) throw Error(ErrorCode::kInvalidConfig, "missing 'test_languages'");
  if (config.instances.empty()) throw Error(ErrorCode::kInvalidConfig, "missing 'instances'");
  if (config.dev_ids.has_value() == config.dev_prefix.has_value()) {
    throw Error(ErrorCode::kInvalidConfig, "exactly one of 'dev_ids' and 'dev_prefix' is required");
  }
  if (roster.empty()) throw Error(ErrorCode::kInvalidConfig, "missing 'metrics'");

  for (const auto& name : roster) {
    if (name == "random" || name == "ensemble") {
      throw Error(ErrorCode::kInvalidConfig, "'" + name + "' is reserved for the baseline rows");
    }
    auto opts = metric_opts[name];
    MetricEntry entry;
    const bool has_ref_flag = opts.contains("needs_reference");
    std::optional<ScoreRange> range;
    if (opts.contains("range")) {
      const auto parts = split_list(opts["range"]);
      if (parts.size() != 2) throw Error(ErrorCode::kInvalidConfig, "metric." + name + ".range needs lo,hi");
      try {
        range = ScoreRange{parse_double(parts[0]), parse_double(parts[1])};
      } catch (const Error&) {
        throw Error(ErrorCode::kInvalidConfig, "metric." + name + ".range is not numeric");
      }
    }
    try {
      if (is_native_metric_name(name) || name == "bleu") {
        entry.descriptor = MetricDescriptor::known(name);
      } else if (has_ref_flag) {
        entry.descriptor = MetricDescriptor::external(
            name, parse_bool_value("metric." + name + ".needs_reference", opts["needs_reference"]), range);
      } else {
        entry.descriptor = MetricDescriptor::known(name);
        if (range) entry.descriptor.declared_range = range;
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kInvalidConfig) throw;
      throw Error(ErrorCode::kInvalidConfig, std::string(e.what()) +
                                                 " (set metric." + name + ".needs_reference for custom metrics)");
    }
    if (opts.contains("scores")) entry.scores = opts["scores"];
    if (entry.descriptor.provenance == MetricProvenance::kExternal && !entry.scores) {
      throw Error(ErrorCode::kInvalidConfig, "external metric '" + name + "' needs metric." + name + ".scores");
    }
    for (const auto& [k, v] : opts) {
      if (k != "scores" && k != "needs_reference" && k != "range") {
        throw Error(ErrorCode::kInvalidConfig, "unknown option metric." + name + "." + k);
      }
    }
    metric_opts.erase(name);
    config.metrics.push_back(std::move(entry));
  }
  if (!metric_opts.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "options given for metric '" + metric_opts.begin()->first +
                                               "' which is not in 'metrics'");
  }
  return config;
}

void apply_env_overrides(RunConfig& config) {
  if (const char* dir = std::getenv("MTBREAK_OUT_DIR"); dir && *dir) config.out_dir = dir;
  if (const char* seed = std::getenv("MTBREAK_SEED"); seed && *seed) {
    config.seed = parse_u64("MTBREAK_SEED", seed);
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig config = parse_run_config(read_file(path), path.parent_path().empty()
                                                           ? std::filesystem::path(".")
                                                           : path.parent_path());
  apply_env_overrides(config);
  return config;
}

void validate_config(const RunConfig& config) {
  const auto require_file = [](const std::filesystem::path& p, const std::string& what) {
    if (!std::filesystem::is_regular_file(p)) {
      throw Error(ErrorCode::kInvalidConfig, what + " not found: " + p.string());
    }
  };
  for (const auto& lang : config.test_languages) {
    const auto inst_path = resolve_path(config, config.instances, lang);
    require_file(inst_path, "instances");
    if (config.dev_ids) require_file(resolve_path(config, *config.dev_ids, lang), "dev id list");
    if (config.rtt_back) require_file(resolve_path(config, *config.rtt_back, lang), "back-translations");
    for (const auto& m : config.metrics) {
      if (m.scores) require_file(resolve_path(config, *m.scores, lang), m.descriptor.name + " scores");
    }

    const bool any_reference_metric =
        std::any_of(config.metrics.begin(), config.metrics.end(),
                    [](const MetricEntry& m) { return m.descriptor.needs_reference; });
    if (any_reference_metric && !config.rtt_back) {
      const auto instances = load_instances(inst_path);
      for (const auto& inst : instances) {
        if (!inst.has_references()) {
          std::string names;
          for (const auto& m : config.metrics) {
            if (m.descriptor.needs_reference) names += (names.empty() ? "" : ", ") + m.descriptor.name;
          }
          throw Error(ErrorCode::kInvalidConfig,
                      "reference-based metrics (" + names + ") configured but instance '" +
                          inst.instance_id + "' in " + inst_path.string() +
                          " has no reference; drop them or supply rtt_back");
        }
      }
    }
  }
  if (!config.ensemble.empty() && config.ensemble.size() != 3) {
    throw Error(ErrorCode::kInvalidConfig, "ensemble must name exactly three metrics");
  }
  for (const auto& name : config.ensemble) {
    const bool known = std::any_of(config.metrics.begin(), config.metrics.end(),
                                   [&](const MetricEntry& m) { return m.descriptor.name == name; });
    if (!known) throw Error(ErrorCode::kInvalidConfig, "ensemble metric '" + name + "' not in 'metrics'");
  }
}

MetricScoreSet compute_native_scores(const MetricDescriptor& metric,
                                     const std::vector<TranslationInstance>& instances) {
  MetricScoreSet set{metric, {}};
  const bool bleu = metric.name == "sentence_bleu";
  if (!bleu && metric.name != "chrf") {
    throw Error(ErrorCode::kInvalidMetric, "'" + metric.name + "' is not a native metric");
  }
  for (const auto& inst : instances) {
    for (std::size_t s = 0; s < inst.segments.size(); ++s) {
      const auto& seg = inst.segments[s];
      if (!seg.reference_text) {
        throw Error(ErrorCode::kEmptyReference,
                    "(" + inst.instance_id + ", " + std::to_string(s) + ") has no reference");
      }
      const double score = bleu ? sentence_bleu(seg.hypothesis_text, *seg.reference_text).score
                                : chrf(seg.hypothesis_text, *seg.reference_text).score;
      insert_score(set, ScoreKey{inst.instance_id, s}, score);
    }
  }
  return set;
}

PipelineResult run_pipeline(const RunConfig& config) {
  in_stage("validate", "config", [&] { validate_config(config); });

  PipelineResult result;
  const std::string task = std::string(to_string(config.task));
  // per metric: rows, models, and dev F1 per language pair
  std::map<std::string, std::vector<PairResult>> rows_by_metric;
  std::map<std::string, std::vector<ThresholdModel>> models_by_metric;
  std::map<std::string, double> dev_f1_sum;
  struct PairState {
    std::string pair;
    std::vector<BreakdownInstance> test;
  };
  std::vector<PairState> pairs;

  for (const auto& lang : config.test_languages) {
    const std::string pair = lang + "-" + config.task_language;

    auto instances = in_stage("ingest", pair, [&] {
      auto loaded = load_instances(resolve_path(config, config.instances, lang));
      for (const auto& inst : loaded) {
        if (inst.task != config.task || inst.test_language != lang ||
            inst.task_language != config.task_language) {
          throw Error(ErrorCode::kMixedTasks, "instance '" + inst.instance_id + "' is not " +
                                                  task + " " + pair);
        }
      }
      return loaded;
    });
    if (config.rtt_back) {
      instances = in_stage("rtt", pair, [&] {
        return reassemble_rtt_all(instances, read_file(resolve_path(config, *config.rtt_back, lang)));
      });
    }

    const auto bench = in_stage("benchmark", pair, [&] { return build_benchmark(instances); });
    const auto split = in_stage("split", pair, [&] {
      if (config.dev_prefix) return split_dev_test(bench, DevPrefix{*config.dev_prefix});
      DevIdList list{load_id_list(resolve_path(config, *config.dev_ids, lang)), {}};
      for (const auto& inst : instances) {
        if (!inst.task_language_correct) list.dropped.insert(inst.instance_id);
      }
      return split_dev_test(bench, list);
    });

    for (const auto& entry : config.metrics) {
      const std::string& name = entry.descriptor.name;
      const std::string cell = name + ", " + pair;
      const auto scores = in_stage("scores", cell, [&] {
        if (entry.scores) {
          return load_scores(resolve_path(config, *entry.scores, lang), entry.descriptor, instances);
        }
        return compute_native_scores(entry.descriptor, instances);
      });
      ThresholdModel model = in_stage("calibrate", cell, [&] {
        ThresholdModel m = fit_threshold(scored_labels(split.dev, scores));
        m.metric = name;
        m.task = task;
        m.test_language = lang;
        m.task_language = config.task_language;
        return m;
      });
      const auto scored_test = in_stage("predict", cell, [&] { return score_instances(split.test, scores); });
      auto preds = classify(model, scored_test);
      PairResult row = in_stage("evaluate", cell, [&] {
        return evaluate_pair(task, name, preds, split.test, model.chosen_threshold);
      });
      result.reports.histograms.push_back(
          in_stage("histogram", cell, [&] { return build_histogram(model, scored_test, split.test); }));
      dev_f1_sum[name] += model.dev_macro_f1;
      rows_by_metric[name].push_back(std::move(row));
      models_by_metric[name].push_back(model);
      result.models.push_back(std::move(model));
      result.predictions[{name, pair}] = std::move(preds);
    }

    auto baseline = random_baseline(split.test, config.seed);
    rows_by_metric["random"].push_back(
        in_stage("evaluate", "random, " + pair, [&] { return evaluate_pair(task, "random", baseline, split.test); }));
    result.predictions[{"random", pair}] = std::move(baseline);
    pairs.push_back({pair, split.test});
  }

  // ensemble of the three best metrics by mean dev macro-F1
  std::vector<std::string> members;
  if (!config.ensemble.empty() || config.metrics.size() >= 3) {
    std::vector<MetricCandidate> candidates;
    for (const auto& entry : config.metrics) {
      const auto& name = entry.descriptor.name;
      candidates.push_back({name, dev_f1_sum[name] / static_cast<double>(pairs.size())});
    }
    members = in_stage("ensemble", task, [&] { return select_top_three(candidates, config.ensemble); });
    for (const auto& p : pairs) {
      auto votes = in_stage("ensemble", p.pair, [&] {
        return ensemble_vote(result.predictions.at({members[0], p.pair}),
                             result.predictions.at({members[1], p.pair}),
                             result.predictions.at({members[2], p.pair}));
      });
      rows_by_metric["ensemble"].push_back(
          in_stage("evaluate", "ensemble, " + p.pair, [&] { return evaluate_pair(task, "ensemble", votes, p.test); }));
      result.predictions[{"ensemble", p.pair}] = std::move(votes);
    }
    result.reports.ensemble_members[task] = members;
  }

  in_stage("aggregate", task, [&] {
    result.reports.reports.push_back(aggregate(rows_by_metric["random"]));
    for (const auto& entry : config.metrics) {
      const auto& name = entry.descriptor.name;
      result.reports.reports.push_back(aggregate(rows_by_metric[name]));
      if (models_by_metric[name].size() >= 2) {
        result.reports.dispersions[{task, name}] = threshold_dispersion(models_by_metric[name]);
      }
    }
    if (!members.empty()) result.reports.reports.push_back(aggregate(rows_by_metric["ensemble"]));
  });
  return result;
}

void write_pipeline_outputs(const PipelineResult& result, const std::filesystem::path& out_dir) {
  emit_report(result.reports, ReportFormat::kJson, out_dir / "report.json");
  emit_report(result.reports, ReportFormat::kMarkdown, out_dir / "report.md");
  emit_report(result.reports, ReportFormat::kCsv, out_dir / "report.csv");
  write_file(out_dir / "histograms.json", render_histograms_json(result.reports.histograms));
  write_file(out_dir / "histograms.csv", render_histograms_csv(result.reports.histograms));
  for (const auto& m : result.models) {
    write_file(out_dir / "models" / (m.metric + "." + m.test_language + "-" + m.task_language + ".json"),
               serialize_model_json(m));
  }
  for (const auto& [key, preds] : result.predictions) {
    write_file(out_dir / "predictions" / (key.first + "." + key.second + ".tsv"),
               serialize_predictions_tsv(preds));
  }
}

}  // namespace mtbreak
