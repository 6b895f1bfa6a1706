#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace mtbreak {

// Tokens never contain whitespace and are never empty.
using TokenSequence = std::vector<std::string>;

// mteval-v13a tokenization as implemented by sacrebleu 2.1.0's "13a" tokenizer.
TokenSequence tokenize_13a(std::string_view text);

inline constexpr int kBleuMaxOrder = 4;
inline constexpr int kChrfCharOrder = 6;
inline constexpr double kChrfBeta = 2.0;

inline constexpr std::string_view kBleuSignature =
    "nrefs:1|case:mixed|eff:no|tok:13a|smooth:exp|version:2.1.0";
inline constexpr std::string_view kChrfSignature =
    "nrefs:1|case:mixed|eff:yes|nc:6|nw:0|space:no|version:2.1.0";

struct BleuComponents {
  std::array<double, kBleuMaxOrder> precisions{};  // 0-100 scale, smoothed
  std::array<std::size_t, kBleuMaxOrder> matches{};  // clipped
  std::array<std::size_t, kBleuMaxOrder> totals{};
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;
  double bp = 0.0;
  double score = 0.0;
};

// Sentence BLEU with exponential smoothing and no effective-order rescaling.
// Throws kEmptyReference when the reference has no tokens.
BleuComponents sentence_bleu(std::string_view hypothesis, std::string_view reference);

struct ChrfComponents {
  // F_beta per character order 1..6; 0 when precision and recall are both 0
  // or the order has no n-grams.
  std::array<double, kChrfCharOrder> per_order_f{};
  std::array<double, kChrfCharOrder> per_order_precision{};
  std::array<double, kChrfCharOrder> per_order_recall{};
  std::array<bool, kChrfCharOrder> order_effective{};
  int effective_order = 0;
  double avg_precision = 0.0;
  double avg_recall = 0.0;
  double beta = kChrfBeta;
  double score = 0.0;
};

// chrF over whitespace-stripped characters with effective-order averaging.
// The score is F_beta of the precision and recall averaged over effective
// orders, which is what the reference scorer computes. Throws
// kEmptyReference when the reference is blank.
ChrfComponents chrf(std::string_view hypothesis, std::string_view reference);

}  // namespace mtbreak
