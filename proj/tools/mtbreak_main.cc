// mtbreak: breakdown-detection evaluation of MT metrics from the command line.

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mtbreak/benchmark.h"
#include "mtbreak/classifier.h"
#include "mtbreak/corpus.h"
#include "mtbreak/error.h"
#include "mtbreak/pipeline.h"
#include "mtbreak/report.h"
#include "mtbreak/stats.h"
#include "mtbreak/surface_metrics.h"

namespace {

using namespace mtbreak;

struct SplitArgs {
  std::string split_file;
  std::string dev_ids;
  std::size_t dev_prefix = 0;
  std::string instances;  // lets dev id lists mention filtered-out ids

  void add_to(CLI::App* cmd) {
    auto* f = cmd->add_option("--split", split_file, "split.json from `bench split`");
    auto* i = cmd->add_option("--dev-ids", dev_ids, "file with one dev instance id per line");
    auto* p = cmd->add_option("--dev-prefix", dev_prefix, "first N benchmark instances form dev");
    f->excludes(i)->excludes(p);
    i->excludes(p);
    cmd->add_option("--instances", instances,
                    "original instances, so dev ids dropped by the filter are tolerated");
  }
  bool given() const { return !split_file.empty() || !dev_ids.empty() || dev_prefix > 0; }

  BenchmarkSplit resolve(const std::vector<BreakdownInstance>& bench) const {
    if (!split_file.empty()) return parse_split_json(bench, read_file(split_file));
    if (dev_prefix > 0) return split_dev_test(bench, DevPrefix{dev_prefix});
    DevIdList list{load_id_list(dev_ids), {}};
    if (!instances.empty()) {
      for (const auto& inst : load_instances(instances)) {
        if (!inst.task_language_correct) list.dropped.insert(inst.instance_id);
      }
    }
    return split_dev_test(bench, list);
  }
};

struct MetricArgs {
  std::string name;
  std::string needs_reference;
  std::vector<double> range;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--metric", name, "metric name (sentence_bleu, chrf, comet_da, ...)")->required();
    cmd->add_option("--needs-reference", needs_reference, "true/false for metrics not in the roster");
    cmd->add_option("--range", range, "declared score range LOW HIGH")->expected(2);
  }

  MetricDescriptor descriptor() const {
    std::optional<ScoreRange> r;
    if (range.size() == 2) r = ScoreRange{range[0], range[1]};
    if (!needs_reference.empty() && !is_native_metric_name(name) && name != "bleu") {
      return MetricDescriptor::external(name, needs_reference == "true" || needs_reference == "1", r);
    }
    auto d = MetricDescriptor::known(name);
    if (r) d.declared_range = r;
    return d;
  }
};

void emit(const std::string& out, const std::string& content) {
  if (out.empty() || out == "-") {
    std::cout << content;
  } else {
    write_file(out, content);
  }
}

std::vector<Prediction> load_predictions(const std::string& path) {
  return parse_predictions_tsv(read_file(path));
}

// Scores file alone: instance score is the min over that instance's rows.
std::vector<ScoredInstance> scores_by_instance(const MetricScoreSet& scores) {
  std::map<std::string, double> lowest;
  for (const auto& [key, value] : scores.scores) {
    auto [it, inserted] = lowest.emplace(key.instance_id, value);
    if (!inserted) it->second = std::min(it->second, value);
  }
  std::vector<ScoredInstance> out;
  for (const auto& [id, value] : lowest) out.push_back({id, value});
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Breakdown-detection evaluation of machine-translation metrics"};
  app.require_subcommand(1);

  // score
  auto* score = app.add_subcommand("score", "compute sentence BLEU or chrF for every segment");
  std::string score_metric, score_in, score_out, score_schema = "jsonl";
  score->add_option("--metric", score_metric, "bleu or chrf")
      ->required()
      ->check(CLI::IsMember({"bleu", "chrf", "sentence_bleu"}));
  score->add_option("--in", score_in, "instances file")->required();
  score->add_option("--out", score_out, "scores TSV (default stdout)");
  score->add_option("--schema", score_schema, "instance file schema")->check(CLI::IsMember({"jsonl", "tsv"}));

  // bench
  auto* bench = app.add_subcommand("bench", "benchmark construction");
  bench->require_subcommand(1);
  auto* bench_build = bench->add_subcommand("build", "filter and label instances");
  std::string build_in, build_out;
  bench_build->add_option("--in", build_in, "instances JSONL")->required();
  bench_build->add_option("--out", build_out, "benchmark JSONL (default stdout)");

  auto* bench_split = bench->add_subcommand("split", "dev/test split of a benchmark");
  std::string split_in, split_out;
  SplitArgs split_args;
  bench_split->add_option("--in", split_in, "benchmark JSONL")->required();
  bench_split->add_option("--out", split_out, "split.json (default stdout)");
  split_args.add_to(bench_split);

  auto* bench_rtt = bench->add_subcommand("rtt", "pseudo-reference triples from back-translations");
  std::string rtt_in, rtt_back, rtt_out;
  bench_rtt->add_option("--in", rtt_in, "instances JSONL")->required();
  bench_rtt->add_option("--back", rtt_back, "back.tsv: instance_id, segment_index, back_translation")->required();
  bench_rtt->add_option("--out", rtt_out, "reassembled instances JSONL (default stdout)");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "fit a dev-set threshold for one metric");
  std::string cal_bench, cal_scores, cal_out;
  MetricArgs cal_metric;
  SplitArgs cal_split;
  calibrate->add_option("--bench", cal_bench, "benchmark JSONL")->required();
  calibrate->add_option("--scores", cal_scores, "scores TSV/JSONL")->required();
  calibrate->add_option("--out", cal_out, "model.json (default stdout)");
  cal_metric.add_to(calibrate);
  cal_split.add_to(calibrate);

  // predict
  auto* predict = app.add_subcommand("predict", "apply a threshold model");
  std::string pred_model, pred_scores, pred_bench, pred_out;
  SplitArgs pred_split;
  predict->add_option("--model", pred_model, "model.json")->required();
  predict->add_option("--scores", pred_scores, "scores TSV/JSONL")->required();
  predict->add_option("--bench", pred_bench, "benchmark JSONL; restricts and orders instances");
  predict->add_option("--out", pred_out, "predictions TSV (default stdout)");
  pred_split.add_to(predict);

  // eval
  auto* eval = app.add_subcommand("eval", "confusion matrix, macro-F1 and MCC for one prediction file");
  std::string eval_bench, eval_preds, eval_out, eval_metric = "metric", eval_model;
  SplitArgs eval_split;
  eval->add_option("--bench", eval_bench, "benchmark JSONL")->required();
  eval->add_option("--preds", eval_preds, "predictions TSV")->required();
  eval->add_option("--metric", eval_metric, "name recorded in the report row");
  eval->add_option("--model", eval_model, "model.json; records its threshold in the row");
  eval->add_option("--out", eval_out, "pair report JSON (default stdout)");
  eval_split.add_to(eval);

  // ensemble
  auto* ensemble = app.add_subcommand("ensemble", "majority vote over three prediction files");
  std::vector<std::string> ens_preds;
  std::string ens_out;
  ensemble->add_option("--preds", ens_preds, "three predictions TSV files")->required()->expected(3);
  ensemble->add_option("--out", ens_out, "predictions TSV (default stdout)");

  // baseline
  auto* baseline = app.add_subcommand("baseline", "seeded fair-coin predictions");
  std::string base_bench, base_out;
  std::uint64_t base_seed = 0;
  SplitArgs base_split;
  baseline->add_option("--bench", base_bench, "benchmark JSONL")->required();
  baseline->add_option("--seed", base_seed, "random seed")->required();
  baseline->add_option("--out", base_out, "predictions TSV (default stdout)");
  base_split.add_to(baseline);

  // report
  auto* report = app.add_subcommand("report", "aggregate pair reports into tables");
  std::vector<std::string> rep_in, rep_models;
  std::string rep_format = "markdown", rep_out;
  report->add_option("--in", rep_in, "pair report JSON files from `eval`")->required();
  report->add_option("--models", rep_models, "model.json files for threshold dispersion");
  report->add_option("--format", rep_format, "json, markdown or csv")
      ->check(CLI::IsMember({"json", "markdown", "md", "csv"}));
  report->add_option("--out", rep_out, "output file (default stdout)");

  // run
  auto* run = app.add_subcommand("run", "full pipeline from a config file");
  std::string run_config, run_out_dir;
  run->add_option("--config", run_config, "key = value config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out-dir", run_out_dir, "override the configured output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*score) {
      const auto schema = score_schema == "tsv" ? InstanceSchema::kTsv : InstanceSchema::kJsonl;
      const auto instances = load_instances(score_in, schema);
      const auto metric = score_metric == "chrf" ? MetricDescriptor::chrf() : MetricDescriptor::sentence_bleu();
      const auto scores = compute_native_scores(metric, instances);
      std::string out = "instance_id\tsegment_index\tscore\n";
      for (const auto& inst : instances) {
        for (std::size_t s = 0; s < inst.segments.size(); ++s) {
          out += inst.instance_id + "\t" + std::to_string(s) + "\t" +
                 format_double(*scores.find(inst.instance_id, s)) + "\n";
        }
      }
      emit(score_out, out);
      std::cerr << (score_metric == "chrf" ? "chrF2 " : "BLEU ")
                << (score_metric == "chrf" ? kChrfSignature : kBleuSignature) << "\n";
    } else if (*bench_build) {
      const auto instances = load_instances(build_in);
      const auto built = build_benchmark(instances);
      emit(build_out, serialize_benchmark_jsonl(built));
      const auto counts = count_classes(built);
      std::cerr << "kept " << built.size() << " of " << instances.size() << " (Good / Bad "
                << counts.no_breakdown << " / " << counts.breakdown << ")\n";
    } else if (*bench_split) {
      if (!split_args.given()) throw Error(ErrorCode::kInvalidConfig, "give --dev-ids or --dev-prefix");
      if (!split_args.split_file.empty()) throw Error(ErrorCode::kInvalidConfig, "--split is not valid here");
      const auto b = load_benchmark(split_in);
      emit(split_out, serialize_split_json(split_args.resolve(b)));
    } else if (*bench_rtt) {
      const auto instances = load_instances(rtt_in);
      emit(rtt_out, serialize_instances_jsonl(reassemble_rtt_all(instances, read_file(rtt_back))));
    } else if (*calibrate) {
      if (!cal_split.given()) throw Error(ErrorCode::kInvalidConfig, "give --split, --dev-ids or --dev-prefix");
      const auto b = load_benchmark(cal_bench);
      const auto split = cal_split.resolve(b);
      const auto metric = cal_metric.descriptor();
      const auto scores = load_scores(cal_scores, metric);
      ThresholdModel model = fit_threshold(scored_labels(split.dev, scores));
      model.metric = metric.name;
      model.task = std::string(to_string(split.task));
      model.test_language = split.test_language;
      model.task_language = split.task_language;
      emit(cal_out, serialize_model_json(model));
      if (model.degenerate) std::cerr << "warning: all dev scores are equal; threshold is that value\n";
    } else if (*predict) {
      const auto model = parse_model_json(read_file(pred_model));
      const auto desc = is_native_metric_name(model.metric) ? MetricDescriptor::known(model.metric)
                                                            : MetricDescriptor::external(model.metric, true);
      const auto scores = load_scores(pred_scores, desc);
      std::vector<ScoredInstance> scored;
      if (!pred_bench.empty()) {
        const auto b = load_benchmark(pred_bench);
        scored = pred_split.given() ? score_instances(pred_split.resolve(b).test, scores)
                                    : score_instances(b, scores);
      } else {
        scored = scores_by_instance(scores);
      }
      emit(pred_out, serialize_predictions_tsv(classify(model, scored)));
    } else if (*eval) {
      const auto b = load_benchmark(eval_bench);
      const auto labels = eval_split.given() ? eval_split.resolve(b).test : b;
      std::optional<double> threshold;
      std::string metric = eval_metric;
      if (!eval_model.empty()) {
        const auto model = parse_model_json(read_file(eval_model));
        threshold = model.chosen_threshold;
        if (eval_metric == "metric") metric = model.metric;
      }
      if (labels.empty()) throw Error(ErrorCode::kEmptyMatrix, "benchmark is empty");
      const auto row = evaluate_pair(std::string(to_string(labels.front().base.task)), metric,
                                     load_predictions(eval_preds), labels, threshold);
      emit(eval_out, serialize_pair_result_json(row));
    } else if (*ensemble) {
      const auto a = load_predictions(ens_preds[0]);
      const auto b = load_predictions(ens_preds[1]);
      const auto c = load_predictions(ens_preds[2]);
      emit(ens_out, serialize_predictions_tsv(ensemble_vote(a, b, c)));
    } else if (*baseline) {
      const auto b = load_benchmark(base_bench);
      const auto labels = base_split.given() ? base_split.resolve(b).test : b;
      emit(base_out, serialize_predictions_tsv(random_baseline(labels, base_seed)));
    } else if (*report) {
      std::map<std::pair<std::string, std::string>, std::vector<PairResult>> grouped;
      std::vector<std::pair<std::string, std::string>> order;
      for (const auto& path : rep_in) {
        auto row = parse_pair_result_json(read_file(path));
        const std::pair key{row.task, row.metric};
        if (!grouped.contains(key)) order.push_back(key);
        grouped[key].push_back(std::move(row));
      }
      ReportSet set;
      for (const auto& key : order) set.reports.push_back(aggregate(grouped[key]));
      std::map<std::pair<std::string, std::string>, std::vector<ThresholdModel>> models;
      for (const auto& path : rep_models) {
        auto m = parse_model_json(read_file(path));
        models[{m.task, m.metric}].push_back(std::move(m));
      }
      for (const auto& [key, ms] : models) {
        if (ms.size() >= 2) set.dispersions[key] = threshold_dispersion(ms);
      }
      const auto format = parse_report_format(rep_format);
      if (rep_out.empty() || rep_out == "-") {
        std::cout << render_report(set, format);
      } else {
        emit_report(set, format, rep_out);
      }
    } else if (*run) {
      RunConfig config = load_run_config(run_config);
      if (!run_out_dir.empty()) config.out_dir = run_out_dir;
      const auto result = run_pipeline(config);
      write_pipeline_outputs(result, config.out_dir);
      std::cout << render_report(result.reports, ReportFormat::kMarkdown);
      std::cerr << "wrote " << config.out_dir.string() << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "mtbreak: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "mtbreak: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
