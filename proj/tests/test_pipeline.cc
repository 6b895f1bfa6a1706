#include <gtest/gtest.h>

#include <cstdlib>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mtbreak/error.h"
#include "mtbreak/pipeline.h"
#include "test_util.h"

namespace mtbreak {
namespace {

using testing::TempDir;

const std::filesystem::path kToy = std::filesystem::path(MTBREAK_SOURCE_DIR) / "data" / "toy";

ErrorCode code_of(const auto& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no mtbreak::Error thrown";
  return ErrorCode::kIoError;
}

// Two languages, 30 instances each, with reference text and an external
// QE score file whose values track the outcome loosely.
void write_two_language_dataset(const std::filesystem::path& dir) {
  const std::vector<std::string> refs = {"show me flights from boston to denver",
                                         "what is the cheapest fare to seattle",
                                         "list ground transportation in dallas"};
  for (const std::string lang : {"de", "zh"}) {
    std::vector<TranslationInstance> insts;
    std::string qe = "instance_id\tsegment_index\tscore\n";
    for (int i = 0; i < 30; ++i) {
      auto inst = testing::sp_instance(lang + "-" + std::to_string(i), i % 7 != 0, i % 3 != 0, lang);
      const auto& ref = refs[i % refs.size()];
      inst.segments[0].reference_text = ref;
      inst.segments[0].hypothesis_text = inst.translated_correct ? ref : "show flights " + std::to_string(i);
      insts.push_back(inst);
      qe += inst.instance_id + "\t0\t" + format_double((inst.translated_correct ? 0.4 : -0.2) + 0.01 * i) + "\n";
    }
    write_file(dir / ("instances." + lang + ".jsonl"), serialize_instances_jsonl(insts));
    write_file(dir / ("qe." + lang + ".tsv"), qe);
  }
}

std::string config_text(const std::string& extra = "") {
  return "task = SP\n"
         "task_language = en\n"
         "test_languages = zh, de\n"
         "instances = instances.{lang}.jsonl\n"
         "dev_prefix = 10\n"
         "metrics = sentence_bleu, chrf, comet_qe_da\n"
         "metric.comet_qe_da.scores = qe.{lang}.tsv\n"
         "out_dir = out\n"
         "seed = 3\n" +
         extra;
}

TEST(RunConfig, ParsesAndResolves) {
  const auto c = parse_run_config(config_text(), "/data");
  EXPECT_EQ(c.task, Task::kSP);
  EXPECT_EQ(c.test_languages, (std::vector<std::string>{"zh", "de"}));
  ASSERT_EQ(c.metrics.size(), 3u);
  EXPECT_FALSE(c.metrics[2].descriptor.needs_reference);
  EXPECT_EQ(resolve_path(c, c.instances, "zh"), std::filesystem::path("/data/instances.zh.jsonl"));
  EXPECT_EQ(c.out_dir, std::filesystem::path("/data/out"));
  EXPECT_EQ(c.seed, 3u);
}

TEST(RunConfig, Errors) {
  EXPECT_EQ(code_of([] { parse_run_config("task = SP\n", "."); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { parse_run_config(config_text("colour = blue\n"), "."); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] { parse_run_config(config_text("dev_ids = d.txt\n"), "."); }), ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] {
              parse_run_config(
                  "task = SP\ntask_language = en\ntest_languages = zh\ninstances = x\ndev_prefix = 1\n"
                  "metrics = comet_da\n",
                  ".");
            }),
            ErrorCode::kInvalidConfig);
  EXPECT_EQ(code_of([] {
              parse_run_config(
                  "task = SP\ntask_language = en\ntest_languages = zh\ninstances = x\ndev_prefix = 1\n"
                  "metrics = random\n",
                  ".");
            }),
            ErrorCode::kInvalidConfig);
}

TEST(RunConfig, EnvOverrides) {
  auto c = parse_run_config(config_text(), "/data");
  ::setenv("MTBREAK_OUT_DIR", "/elsewhere", 1);
  ::setenv("MTBREAK_SEED", "99", 1);
  apply_env_overrides(c);
  ::unsetenv("MTBREAK_OUT_DIR");
  ::unsetenv("MTBREAK_SEED");
  EXPECT_EQ(c.out_dir, std::filesystem::path("/elsewhere"));
  EXPECT_EQ(c.seed, 99u);
}

TEST(ValidateConfig, ReferenceMetricOnReferenceFreeData) {
  TempDir dir;
  auto inst = testing::sp_instance("a", true, true);
  inst.segments[0].reference_text.reset();
  write_file(dir.path() / "instances.zh.jsonl", serialize_instance_jsonl(inst) + "\n");
  const auto c = parse_run_config(
      "task = SP\ntask_language = en\ntest_languages = zh\ninstances = instances.{lang}.jsonl\n"
      "dev_prefix = 1\nmetrics = chrf\n",
      dir.path());
  EXPECT_EQ(code_of([&] { validate_config(c); }), ErrorCode::kInvalidConfig);
}

TEST(ValidateConfig, MissingFiles) {
  TempDir dir;
  const auto c = parse_run_config(config_text(), dir.path());
  EXPECT_EQ(code_of([&] { validate_config(c); }), ErrorCode::kInvalidConfig);
}

TEST(RunPipeline, ToyDataset) {
  auto config = load_run_config(kToy / "config.ini");
  validate_config(config);
  const auto result = run_pipeline(config);
  std::vector<std::string> metrics;
  for (const auto& r : result.reports.reports) metrics.push_back(r.metric);
  EXPECT_EQ(metrics.size(), 3u);
  EXPECT_NE(std::find(metrics.begin(), metrics.end(), "sentence_bleu"), metrics.end());
  EXPECT_NE(std::find(metrics.begin(), metrics.end(), "chrf"), metrics.end());
  EXPECT_NE(std::find(metrics.begin(), metrics.end(), "random"), metrics.end());
  // one instance is dropped by the task-language filter
  EXPECT_EQ(result.reports.reports.front().rows.front().counts.total(), 11u - 4u);
}

TEST(RunPipeline, TwoLanguagesWithEnsembleAndDispersion) {
  TempDir dir;
  write_two_language_dataset(dir.path());
  write_file(dir.path() / "run.ini", config_text());
  const auto config = load_run_config(dir.path() / "run.ini");
  validate_config(config);
  const auto result = run_pipeline(config);
  bool saw_ensemble = false;
  for (const auto& r : result.reports.reports) {
    EXPECT_EQ(r.rows.size(), 2u) << r.metric;
    saw_ensemble |= r.metric == "ensemble";
  }
  EXPECT_TRUE(saw_ensemble);
  EXPECT_EQ(result.reports.ensemble_members.at("SP").size(), 3u);
  EXPECT_TRUE(result.reports.dispersions.contains({"SP", "chrf"}));
  EXPECT_EQ(result.models.size(), 6u);
}

TEST(RunPipeline, StageErrorNamesCell) {
  TempDir dir;
  write_two_language_dataset(dir.path());
  write_file(dir.path() / "qe.de.tsv", "instance_id\tsegment_index\tscore\nde-1\t0\t0.5\n");
  write_file(dir.path() / "run.ini", config_text());
  try {
    run_pipeline(load_run_config(dir.path() / "run.ini"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingScore);
    EXPECT_NE(std::string(e.what()).find("comet_qe_da"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("de-en"), std::string::npos) << e.what();
  }
}

TEST(RunPipeline, ByteIdenticalOutputs) {
  TempDir dir;
  write_two_language_dataset(dir.path());
  write_file(dir.path() / "run.ini", config_text());
  const auto config = load_run_config(dir.path() / "run.ini");
  write_pipeline_outputs(run_pipeline(config), dir.path() / "a");
  write_pipeline_outputs(run_pipeline(config), dir.path() / "b");
  std::size_t compared = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir.path() / "a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), dir.path() / "a");
    EXPECT_EQ(read_file(entry.path()), read_file(dir.path() / "b" / rel)) << rel;
    ++compared;
  }
  EXPECT_GE(compared, 5u + 6u + 6u);
}

}  // namespace
}  // namespace mtbreak
