#include <gtest/gtest.h>

#include <string>
#include <vector>

#include "mtbreak/benchmark.h"
#include "mtbreak/error.h"
#include "mtbreak/surface_metrics.h"
#include "test_util.h"

namespace mtbreak {
namespace {

using testing::qa_instance;
using testing::sp_instance;

std::vector<BreakdownInstance> bench_of(std::size_t good, std::size_t bad, Task task = Task::kQA) {
  std::vector<TranslationInstance> insts;
  for (std::size_t i = 0; i < good + bad; ++i) {
    auto inst = task == Task::kQA ? qa_instance("i" + std::to_string(i), true, i < good)
                                  : sp_instance("i" + std::to_string(i), true, i < good);
    insts.push_back(std::move(inst));
  }
  return build_benchmark(insts);
}

TEST(BuildBenchmark, FourInstanceExample) {
  const std::vector<TranslationInstance> insts = {
      sp_instance("a", true, true), sp_instance("b", true, false), sp_instance("c", false, false),
      sp_instance("d", true, true)};
  const auto bench = build_benchmark(insts);
  ASSERT_EQ(bench.size(), 3u);
  EXPECT_EQ(bench[0].id(), "a");
  EXPECT_EQ(bench[1].id(), "b");
  EXPECT_EQ(bench[2].id(), "d");
  EXPECT_EQ(bench[0].label, BreakdownLabel::kNoBreakdown);
  EXPECT_EQ(bench[1].label, BreakdownLabel::kBreakdown);
  EXPECT_EQ(bench[2].label, BreakdownLabel::kNoBreakdown);
}

TEST(BuildBenchmark, QaArCounts) {
  const auto counts = count_classes(bench_of(592, 264));
  EXPECT_EQ(counts.no_breakdown, 592u);
  EXPECT_EQ(counts.breakdown, 264u);
}

TEST(BuildBenchmark, FilterAndLabelCounts) {
  // every combination of the two outcome flags, repeated
  std::vector<TranslationInstance> insts;
  for (int i = 0; i < 40; ++i) insts.push_back(sp_instance(std::to_string(i), i % 3 != 0, i % 2 == 0));
  std::size_t kept = 0;
  std::size_t broken = 0;
  for (const auto& inst : insts) {
    kept += inst.task_language_correct;
    broken += inst.task_language_correct && !inst.translated_correct;
  }
  const auto bench = build_benchmark(insts);
  EXPECT_EQ(bench.size(), kept);
  EXPECT_EQ(count_classes(bench).breakdown, broken);
}

TEST(BuildBenchmark, MixedPairsRejected) {
  const std::vector<TranslationInstance> insts = {sp_instance("a", true, true, "zh"),
                                                  sp_instance("b", true, true, "de")};
  EXPECT_THROW(build_benchmark(insts), Error);
}

TEST(BuildBenchmark, JsonlRoundTrip) {
  const auto bench = bench_of(3, 2);
  EXPECT_EQ(parse_benchmark_jsonl(serialize_benchmark_jsonl(bench)), bench);
}

TEST(SplitDevTest, PrefixOnQaBenchmark) {
  const auto bench = bench_of(592, 264);
  ASSERT_EQ(bench.size(), 856u);
  const auto split = split_dev_test(bench, DevPrefix{200});
  EXPECT_EQ(split.dev.size(), 200u);
  EXPECT_EQ(split.test.size(), 856u);
  EXPECT_TRUE(split.test_includes_dev);
  EXPECT_EQ(split.dev.front().id(), bench.front().id());
  EXPECT_EQ(split.dev.back().id(), bench[199].id());
}

TEST(SplitDevTest, PrefixTooLarge) {
  const auto bench = bench_of(3, 2);
  try {
    split_dev_test(bench, DevPrefix{6});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptySplit);
  }
}

TEST(SplitDevTest, ExplicitListIsDisjoint) {
  const auto bench = bench_of(7, 3, Task::kSP);
  DevIdList list;
  list.ids = {"i0", "i5", "i9"};
  const auto split = split_dev_test(bench, list);
  EXPECT_EQ(split.dev.size(), 3u);
  EXPECT_EQ(split.test.size(), 7u);
  EXPECT_FALSE(split.test_includes_dev);
  for (const auto& d : split.dev) {
    for (const auto& t : split.test) EXPECT_NE(d.id(), t.id());
  }
  EXPECT_EQ(split.dev_counts.no_breakdown + split.test_counts.no_breakdown, 7u);
}

TEST(SplitDevTest, UnknownAndDroppedIds) {
  const auto bench = bench_of(3, 2, Task::kSP);
  DevIdList list;
  list.ids = {"i0", "gone"};
  EXPECT_THROW(split_dev_test(bench, list), Error);
  list.dropped.insert("gone");
  EXPECT_EQ(split_dev_test(bench, list).dev.size(), 1u);
}

TEST(SplitDevTest, SplitJsonRoundTrip) {
  const auto bench = bench_of(6, 4, Task::kSP);
  DevIdList list;
  list.ids = {"i1", "i8"};
  const auto split = split_dev_test(bench, list);
  const auto back = parse_split_json(bench, serialize_split_json(split));
  EXPECT_EQ(back.dev, split.dev);
  EXPECT_EQ(back.test, split.test);
  EXPECT_EQ(back.test_includes_dev, split.test_includes_dev);
}

TEST(InstanceScore, MinRule) {
  MetricScoreSet set{MetricDescriptor::known("comet_da"), {}};
  insert_score(set, {"s", 0}, 0.42);
  insert_score(set, {"q", 0}, 0.9);
  insert_score(set, {"q", 1}, 0.3);
  insert_score(set, {"e", 0}, 0.5);
  insert_score(set, {"e", 1}, 0.5);
  EXPECT_EQ(instance_score(sp_instance("s", true, true), set), 0.42);
  EXPECT_EQ(instance_score(qa_instance("q", true, true), set), 0.3);
  EXPECT_EQ(instance_score(qa_instance("e", true, true), set), 0.5);
  EXPECT_THROW(instance_score(qa_instance("missing", true, true), set), Error);
}

TEST(ReassembleRtt, RoleMapping) {
  TranslationInstance inst = sp_instance("r", true, true);
  inst.segments[0] = testing::segment("0", SegmentRole::kUtterance, "zh_q", "en_mt", "en_gold");
  const auto rtt = reassemble_rtt(inst, std::string("zh_mt"));
  EXPECT_EQ(rtt.segments[0].source_text, "en_mt");
  EXPECT_EQ(rtt.segments[0].hypothesis_text, "zh_mt");
  EXPECT_EQ(rtt.segments[0].reference_text, "zh_q");
  EXPECT_EQ(rtt.instance_id, "r");
  EXPECT_EQ(rtt.translated_correct, inst.translated_correct);
}

// BLEU without effective order needs at least four tokens to reach 100
TEST(ReassembleRtt, IdentityRoundTripScoresFull) {
  TranslationInstance inst = sp_instance("r", true, true);
  inst.segments[0] = testing::segment("0", SegmentRole::kUtterance, "show me the flights to boston", "x");
  const auto rtt = reassemble_rtt(inst, std::string("show me the flights to boston"));
  const auto& seg = rtt.segments[0];
  EXPECT_NEAR(sentence_bleu(seg.hypothesis_text, *seg.reference_text).score, 100.0, 1e-9);
  EXPECT_NEAR(chrf(seg.hypothesis_text, *seg.reference_text).score, 100.0, 1e-9);
}

TEST(ReassembleRtt, EmptyBackTranslation) {
  EXPECT_THROW(reassemble_rtt(sp_instance("r", true, true), std::string(" ")), Error);
  // QA needs one back-translation per segment
  EXPECT_THROW(reassemble_rtt(qa_instance("q", true, true), std::string("x")), Error);
}

TEST(ReassembleRtt, FromTsv) {
  const std::vector<TranslationInstance> insts = {qa_instance("q", true, true)};
  const auto out = reassemble_rtt_all(
      insts, "instance_id\tsegment_index\tback_translation\nq\t1\tctx back\nq\t0\tq back\n");
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].segments[0].hypothesis_text, "q back");
  EXPECT_EQ(out[0].segments[1].hypothesis_text, "ctx back");
  EXPECT_THROW(reassemble_rtt_all(insts, "instance_id\tsegment_index\tback_translation\nq\t0\tx\n"), Error);
}

}  // namespace
}  // namespace mtbreak
