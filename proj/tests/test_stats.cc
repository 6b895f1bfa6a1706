#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mtbreak/error.h"
#include "mtbreak/stats.h"
#include "stat_oracle.h"
#include "test_util.h"

namespace mtbreak {
namespace {

constexpr auto kNo = BreakdownLabel::kNoBreakdown;
constexpr auto kBrk = BreakdownLabel::kBreakdown;

std::vector<BreakdownInstance> labels_of(const std::vector<BreakdownLabel>& labels) {
  std::vector<BreakdownInstance> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.push_back(testing::labelled("i" + std::to_string(i), labels[i]));
  return out;
}

std::vector<Prediction> preds_of(const std::vector<BreakdownLabel>& labels) {
  std::vector<Prediction> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.push_back({"i" + std::to_string(i), labels[i], 0.0});
  return out;
}

PairResult row(std::string lang, double f1, double m, std::string metric = "comet_da") {
  PairResult r;
  r.task = "DST";
  r.metric = std::move(metric);
  r.test_language = std::move(lang);
  r.task_language = "en";
  r.macro_f1 = f1;
  r.mcc = m;
  return r;
}

TEST(Confusion, Examples) {
  const auto labels = labels_of({kNo, kNo, kBrk, kBrk, kBrk});
  EXPECT_EQ(confusion(preds_of({kNo, kNo, kBrk, kBrk, kBrk}), labels), (ConfusionMatrix{2, 0, 0, 3}));
  EXPECT_EQ(confusion(preds_of({kNo, kNo, kNo, kNo, kNo}), labels), (ConfusionMatrix{2, 3, 0, 0}));
}

TEST(Confusion, OrderInsensitive) {
  const auto labels = labels_of({kNo, kBrk, kBrk});
  auto preds = preds_of({kBrk, kBrk, kNo});
  const auto cm = confusion(preds, labels);
  std::reverse(preds.begin(), preds.end());
  EXPECT_EQ(confusion(preds, labels), cm);
}

TEST(Confusion, IdMismatch) {
  const auto labels = labels_of({kNo, kBrk});
  auto preds = preds_of({kNo, kBrk});
  preds[1].instance_id = "other";
  try {
    confusion(preds, labels);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIdMismatch);
  }
  EXPECT_THROW(confusion(preds_of({kNo}), labels), Error);
}

TEST(MacroF1, Examples) {
  EXPECT_NEAR(macro_f1({40, 10, 20, 30}), 0.5 * (80.0 / 110.0 + 60.0 / 90.0), 1e-15);
  EXPECT_NEAR(macro_f1({40, 10, 20, 30}), 0.6970, 5e-5);
  EXPECT_EQ(macro_f1({3, 0, 0, 4}), 1.0);
  EXPECT_EQ(macro_f1({5, 0, 0, 0}), 0.5);
  EXPECT_THROW(macro_f1({0, 0, 0, 0}), Error);
}

TEST(Mcc, Examples) {
  EXPECT_NEAR(mcc({40, 10, 20, 30}), 1000.0 / std::sqrt(50.0 * 60 * 40 * 50), 1e-15);
  EXPECT_NEAR(mcc({40, 10, 20, 30}), 0.4082, 5e-5);
  EXPECT_EQ(mcc({3, 0, 0, 4}), 1.0);
  EXPECT_EQ(mcc({0, 3, 4, 0}), -1.0);
  EXPECT_EQ(mcc({2, 3, 0, 0}), 0.0);
  EXPECT_THROW(mcc({0, 0, 0, 0}), Error);
}

TEST(Mcc, RelabelingNegatesExactly) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::uint64_t> u(0, 5000);
  for (int i = 0; i < 2000; ++i) {
    const ConfusionMatrix cm{u(rng), u(rng), u(rng), u(rng)};
    if (cm.total() == 0) continue;
    // swapping predicted labels only
    EXPECT_EQ(mcc({cm.fp, cm.tp, cm.tn, cm.fn}), -mcc(cm));
    // swapping the positive class leaves both statistics unchanged
    EXPECT_EQ(mcc({cm.tn, cm.fn, cm.fp, cm.tp}), mcc(cm));
    EXPECT_DOUBLE_EQ(macro_f1({cm.tn, cm.fn, cm.fp, cm.tp}), macro_f1(cm));
  }
}

TEST(StatsOracle, AgreesWithArbitraryPrecision) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const std::uint64_t hi = (i % 3 == 0) ? 10 : (i % 3 == 1 ? 10000 : 100000000);
    std::uniform_int_distribution<std::uint64_t> u(0, hi);
    ConfusionMatrix cm{u(rng), u(rng), u(rng), u(rng)};
    if (cm.total() == 0) cm.tp = 1;
    EXPECT_NEAR(macro_f1(cm), oracle::macro_f1(cm), 1e-12);
    EXPECT_NEAR(mcc(cm), oracle::mcc(cm), 1e-12);
  }
}

TEST(RandomBaseline, Deterministic) {
  const auto labels = labels_of(std::vector<BreakdownLabel>(500, kNo));
  EXPECT_EQ(random_baseline(labels, 9), random_baseline(labels, 9));
  EXPECT_NE(random_baseline(labels, 9), random_baseline(labels, 10));
}

TEST(RandomBaseline, IndependentOfOrder) {
  auto labels = labels_of({kNo, kBrk, kNo, kBrk, kNo, kNo});
  const auto a = random_baseline(labels, 4);
  std::reverse(labels.begin(), labels.end());
  auto b = random_baseline(labels, 4);
  std::reverse(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(RandomBaseline, NearZeroMcc) {
  std::vector<BreakdownLabel> raw;
  for (int i = 0; i < 10000; ++i) raw.push_back(i % 2 ? kNo : kBrk);
  const auto labels = labels_of(raw);
  const auto preds = random_baseline(labels, 1);
  EXPECT_LT(std::abs(mcc(confusion(preds, labels))), 0.05);
  const auto positives = std::count_if(preds.begin(), preds.end(),
                                       [](const Prediction& p) { return p.predicted == kNo; });
  EXPECT_NEAR(static_cast<double>(positives) / 10000.0, 0.5, 0.03);
}

TEST(EnsembleVote, Majority) {
  const auto out = ensemble_vote(preds_of({kNo, kNo, kBrk, kBrk}), preds_of({kNo, kBrk, kNo, kBrk}),
                                 preds_of({kBrk, kNo, kNo, kBrk}));
  EXPECT_EQ(out[0].predicted, kNo);
  EXPECT_EQ(out[1].predicted, kNo);
  EXPECT_EQ(out[2].predicted, kNo);
  EXPECT_EQ(out[3].predicted, kBrk);
}

TEST(EnsembleVote, UnanimousEqualsInput) {
  const auto p = preds_of({kNo, kBrk, kBrk, kNo, kNo});
  const auto out = ensemble_vote(p, p, p);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_EQ(out[i].instance_id, p[i].instance_id);
    EXPECT_EQ(out[i].predicted, p[i].predicted);
  }
}

TEST(EnsembleVote, Misaligned) {
  auto b = preds_of({kNo, kBrk});
  std::swap(b[0], b[1]);
  EXPECT_THROW(ensemble_vote(preds_of({kNo, kBrk}), b, preds_of({kNo, kBrk})), Error);
  EXPECT_THROW(ensemble_vote(preds_of({kNo}), preds_of({kNo, kBrk}), preds_of({kNo})), Error);
}

TEST(SelectTopThree, RanksByDevF1ThenName) {
  const std::vector<MetricCandidate> c = {
      {"bleu", 0.5}, {"chrf", 0.7}, {"comet_da", 0.7}, {"bertscore", 0.6}, {"unite", 0.1}};
  EXPECT_EQ(select_top_three(c), (std::vector<std::string>{"chrf", "comet_da", "bertscore"}));
  const std::vector<std::string> pinned = {"unite", "bleu", "chrf"};
  EXPECT_EQ(select_top_three(c, pinned), pinned);
  EXPECT_THROW(select_top_three(std::span(c).first(2)), Error);
}

TEST(Aggregate, SingleRow) {
  const auto rep = aggregate({row("zh", 0.6, 0.2)});
  EXPECT_EQ(rep.mean_macro_f1, 0.6);
  EXPECT_EQ(rep.mean_mcc, 0.2);
}

TEST(Aggregate, DstCometDaMean) {
  const auto rep = aggregate({row("zh", 0.6, 0.248), row("de", 0.6, 0.181), row("ru", 0.6, 0.328),
                              row("ja", 0.6, 0.220)});
  EXPECT_NEAR(rep.mean_mcc, 0.24425, 1e-12);
  EXPECT_EQ(rep.rows.front().test_language, "de");
}

TEST(Aggregate, OrderInsensitiveBitwise) {
  std::vector<PairResult> rows = {row("zh", 0.1, 0.3), row("de", 0.7, 0.1), row("ru", 0.3, 0.2)};
  const auto a = aggregate(rows);
  std::reverse(rows.begin(), rows.end());
  const auto b = aggregate(rows);
  EXPECT_EQ(a.mean_macro_f1, b.mean_macro_f1);
  EXPECT_EQ(a.mean_mcc, b.mean_mcc);
}

TEST(Aggregate, MixedMetrics) {
  try {
    aggregate({row("zh", 0.1, 0.1), row("de", 0.1, 0.1, "chrf")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMixedMetrics);
  }
}

TEST(ThresholdDispersion, Examples) {
  std::vector<ThresholdModel> models(3);
  for (auto& m : models) m.metric = "bleu";
  models[0].chosen_threshold = 10;
  models[1].chosen_threshold = 20;
  models[2].chosen_threshold = 30;
  const auto d = threshold_dispersion(models);
  EXPECT_EQ(d.mean, 20.0);
  EXPECT_EQ(d.stddev, 10.0);
  EXPECT_NEAR(d.population_stddev, std::sqrt(200.0 / 3.0), 1e-12);
  for (auto& m : models) m.chosen_threshold = 4.5;
  EXPECT_EQ(threshold_dispersion(models).stddev, 0.0);
  EXPECT_THROW(threshold_dispersion(std::span(models).first(1)), Error);
  models[1].metric = "chrf";
  EXPECT_THROW(threshold_dispersion(models), Error);
}

}  // namespace
}  // namespace mtbreak
