#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mtbreak/benchmark.h"
#include "mtbreak/classifier.h"
#include "mtbreak/corpus.h"
#include "mtbreak/error.h"
#include "mtbreak/pipeline.h"
#include "mtbreak/report.h"
#include "mtbreak/stats.h"
#include "mtbreak/surface_metrics.h"

namespace py = pybind11;
using namespace mtbreak;

namespace {

std::vector<double> to_vector(std::span<const double> values) {
  return {values.begin(), values.end()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Translation breakdown detection from MT quality metrics";

  static py::exception<Error> error_type(m, "MtbreakError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(e.what());
      exc.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  py::enum_<Task>(m, "Task")
      .value("SP", Task::kSP)
      .value("QA", Task::kQA)
      .value("DST", Task::kDST);

  py::enum_<BreakdownLabel>(m, "BreakdownLabel")
      .value("NO_BREAKDOWN", BreakdownLabel::kNoBreakdown)
      .value("BREAKDOWN", BreakdownLabel::kBreakdown);

  py::class_<Segment>(m, "Segment")
      .def_readonly("segment_id", &Segment::segment_id)
      .def_readonly("source_text", &Segment::source_text)
      .def_readonly("hypothesis_text", &Segment::hypothesis_text)
      .def_readonly("reference_text", &Segment::reference_text)
      .def_property_readonly("role", [](const Segment& s) { return std::string(to_string(s.role)); });

  py::class_<TranslationInstance>(m, "TranslationInstance")
      .def_readonly("instance_id", &TranslationInstance::instance_id)
      .def_readonly("task", &TranslationInstance::task)
      .def_readonly("test_language", &TranslationInstance::test_language)
      .def_readonly("task_language", &TranslationInstance::task_language)
      .def_readonly("segments", &TranslationInstance::segments)
      .def_readonly("task_language_correct", &TranslationInstance::task_language_correct)
      .def_readonly("translated_correct", &TranslationInstance::translated_correct)
      .def("has_references", &TranslationInstance::has_references);

  py::class_<BreakdownInstance>(m, "BreakdownInstance")
      .def_readonly("base", &BreakdownInstance::base)
      .def_readonly("label", &BreakdownInstance::label)
      .def_property_readonly("instance_id", &BreakdownInstance::id);

  m.def("parse_instances", &parse_instances_jsonl, py::arg("text"),
        "Parse JSONL instance records.");
  m.def(
      "load_instances",
      [](const std::filesystem::path& path, const std::string& schema) {
        if (schema != "jsonl" && schema != "tsv") {
          throw Error(ErrorCode::kInvalidConfig, "schema must be 'jsonl' or 'tsv'");
        }
        return load_instances(path, schema == "tsv" ? InstanceSchema::kTsv : InstanceSchema::kJsonl);
      },
      py::arg("path"), py::arg("schema") = "jsonl");

  m.def("tokenize_13a", [](std::string_view text) { return tokenize_13a(text); }, py::arg("text"));
  m.def(
      "sentence_bleu",
      [](std::string_view hyp, std::string_view ref) {
        const auto b = sentence_bleu(hyp, ref);
        py::dict d;
        d["score"] = b.score;
        d["bp"] = b.bp;
        d["precisions"] = b.precisions;
        d["matches"] = b.matches;
        d["totals"] = b.totals;
        d["hyp_len"] = b.hyp_len;
        d["ref_len"] = b.ref_len;
        return d;
      },
      py::arg("hypothesis"), py::arg("reference"));
  m.def(
      "chrf",
      [](std::string_view hyp, std::string_view ref) {
        const auto c = chrf(hyp, ref);
        py::dict d;
        d["score"] = c.score;
        d["avg_precision"] = c.avg_precision;
        d["avg_recall"] = c.avg_recall;
        d["effective_order"] = c.effective_order;
        d["per_order_f"] = c.per_order_f;
        return d;
      },
      py::arg("hypothesis"), py::arg("reference"));
  m.attr("BLEU_SIGNATURE") = std::string(kBleuSignature);
  m.attr("CHRF_SIGNATURE") = std::string(kChrfSignature);

  m.def("build_benchmark",
        [](const std::vector<TranslationInstance>& instances) { return build_benchmark(instances); },
        py::arg("instances"));

  py::class_<ThresholdModel>(m, "ThresholdModel")
      .def_readonly("metric", &ThresholdModel::metric)
      .def_readonly("chosen_threshold", &ThresholdModel::chosen_threshold)
      .def_readonly("dev_macro_f1", &ThresholdModel::dev_macro_f1)
      .def_readonly("degenerate", &ThresholdModel::degenerate)
      .def_property_readonly("candidate_grid",
                             [](const ThresholdModel& t) { return to_vector(t.candidate_grid); })
      .def("to_json", &serialize_model_json);

  // Python side passes (score, label) pairs and (id, score) pairs.
  m.def(
      "fit_threshold",
      [](const std::vector<std::pair<double, BreakdownLabel>>& dev) {
        std::vector<ScoredLabel> rows;
        rows.reserve(dev.size());
        for (const auto& [score, label] : dev) rows.push_back({score, label});
        return fit_threshold(rows);
      },
      py::arg("dev"));

  py::class_<Prediction>(m, "Prediction")
      .def(py::init([](std::string id, BreakdownLabel predicted, double score) {
             return Prediction{std::move(id), predicted, score};
           }),
           py::arg("instance_id"), py::arg("predicted"), py::arg("score") = 0.0)
      .def_readonly("instance_id", &Prediction::instance_id)
      .def_readonly("predicted", &Prediction::predicted)
      .def_readonly("score", &Prediction::score)
      .def("__eq__", [](const Prediction& a, const Prediction& b) { return a == b; });

  m.def(
      "classify",
      [](const ThresholdModel& model, const std::vector<std::pair<std::string, double>>& scored) {
        std::vector<ScoredInstance> rows;
        rows.reserve(scored.size());
        for (const auto& [id, score] : scored) rows.push_back({id, score});
        return classify(model, rows);
      },
      py::arg("model"), py::arg("scored"));

  py::class_<ConfusionMatrix>(m, "ConfusionMatrix")
      .def(py::init([](std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
             return ConfusionMatrix{tp, fp, fn, tn};
           }),
           py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"))
      .def_readonly("tp", &ConfusionMatrix::tp)
      .def_readonly("fp", &ConfusionMatrix::fp)
      .def_readonly("fn", &ConfusionMatrix::fn)
      .def_readonly("tn", &ConfusionMatrix::tn)
      .def("__eq__", [](const ConfusionMatrix& a, const ConfusionMatrix& b) { return a == b; })
      .def("__repr__", [](const ConfusionMatrix& c) {
        return "ConfusionMatrix(tp=" + std::to_string(c.tp) + ", fp=" + std::to_string(c.fp) +
               ", fn=" + std::to_string(c.fn) + ", tn=" + std::to_string(c.tn) + ")";
      });

  m.def("confusion",
        [](const std::vector<Prediction>& preds, const std::vector<BreakdownInstance>& labels) {
          return confusion(preds, labels);
        },
        py::arg("predictions"), py::arg("labels"));
  m.def("macro_f1", &macro_f1, py::arg("cm"));
  m.def("mcc", &mcc, py::arg("cm"));
  m.def("random_baseline",
        [](const std::vector<BreakdownInstance>& labels, std::uint64_t seed) {
          return random_baseline(labels, seed);
        },
        py::arg("labels"), py::arg("seed"));
  m.def("ensemble_vote",
        [](const std::vector<Prediction>& a, const std::vector<Prediction>& b,
           const std::vector<Prediction>& c) { return ensemble_vote(a, b, c); },
        py::arg("a"), py::arg("b"), py::arg("c"));

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config_path, bool write_outputs) {
        const RunConfig config = load_run_config(config_path);
        validate_config(config);
        const PipelineResult result = run_pipeline(config);
        if (write_outputs) write_pipeline_outputs(result, config.out_dir);
        return render_report(result.reports, ReportFormat::kJson);
      },
      py::arg("config"), py::arg("write_outputs") = true,
      "Run the full pipeline from a config file and return the JSON report.");
}
