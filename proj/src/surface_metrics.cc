#include "mtbreak/surface_metrics.h"

#include <cmath>
#include <string>
#include <unordered_map>

#include "mtbreak/error.h"
#include "mtbreak/text.h"

namespace mtbreak {

namespace {

// str.replace(from, to): non-overlapping, left to right.
std::u32string replace_all(std::u32string_view s, std::u32string_view from, std::u32string_view to) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = s.find(from, pos);
    if (hit == std::u32string_view::npos) {
      out.append(s.substr(pos));
      return out;
    }
    out.append(s.substr(pos, hit - pos));
    out.append(to);
    pos = hit + from.size();
  }
}

bool is_ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }
bool is_period_or_comma(char32_t c) { return c == U'.' || c == U','; }

// The ASCII punctuation/symbol class that 13a pads with spaces.
bool is_padded_symbol(char32_t c) {
  return (c >= 0x7B && c <= 0x7E) || (c >= 0x5B && c <= 0x60) || (c >= 0x20 && c <= 0x26) ||
         (c >= 0x28 && c <= 0x2B) || (c >= 0x3A && c <= 0x40) || c == 0x2F;
}

// Emulates re.sub for a two-character pattern: a match consumes both
// characters, and scanning resumes after them.
template <typename Match, typename Emit>
std::u32string substitute_pairs(const std::u32string& s, Match match, Emit emit) {
  std::u32string out;
  out.reserve(s.size() + s.size() / 4);
  std::size_t i = 0;
  while (i < s.size()) {
    if (i + 1 < s.size() && match(s[i], s[i + 1])) {
      emit(out, s[i], s[i + 1]);
      i += 2;
    } else {
      out.push_back(s[i]);
      ++i;
    }
  }
  return out;
}

TokenSequence tokenize_code_points(std::u32string line) {
  line = replace_all(line, U"<skipped>", U"");
  line = replace_all(line, U"-\n", U"");
  line = replace_all(line, U"\n", U" ");
  if (line.find(U'&') != std::u32string::npos) {
    line = replace_all(line, U"&quot;", U"\"");
    line = replace_all(line, U"&amp;", U"&");
    line = replace_all(line, U"&lt;", U"<");
    line = replace_all(line, U"&gt;", U">");
  }

  std::u32string padded;
  padded.reserve(line.size() * 2 + 2);
  padded.push_back(U' ');
  for (char32_t c : line) {
    if (is_padded_symbol(c)) {
      padded.push_back(U' ');
      padded.push_back(c);
      padded.push_back(U' ');
    } else {
      padded.push_back(c);
    }
  }
  padded.push_back(U' ');

  // period and comma unless preceded by a digit
  padded = substitute_pairs(
      padded, [](char32_t a, char32_t b) { return !is_ascii_digit(a) && is_period_or_comma(b); },
      [](std::u32string& out, char32_t a, char32_t b) { out += {a, U' ', b, U' '}; });
  // period and comma unless followed by a digit
  padded = substitute_pairs(
      padded, [](char32_t a, char32_t b) { return is_period_or_comma(a) && !is_ascii_digit(b); },
      [](std::u32string& out, char32_t a, char32_t b) { out += {U' ', a, U' ', b}; });
  // dash preceded by a digit
  padded = substitute_pairs(
      padded, [](char32_t a, char32_t b) { return is_ascii_digit(a) && b == U'-'; },
      [](std::u32string& out, char32_t a, char32_t b) { out += {a, U' ', b, U' '}; });

  TokenSequence tokens;
  for (const auto& piece : text::split_whitespace(padded)) tokens.push_back(text::encode_utf8(piece));
  return tokens;
}

// n-grams are keyed by their tokens joined with a space; tokens never contain
// whitespace so the key is unambiguous.
using NgramCounts = std::unordered_map<std::string, std::size_t>;

std::array<NgramCounts, kBleuMaxOrder> word_ngrams(const TokenSequence& tokens) {
  std::array<NgramCounts, kBleuMaxOrder> counts;
  for (int n = 1; n <= kBleuMaxOrder; ++n) {
    if (tokens.size() < static_cast<std::size_t>(n)) break;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::string key = tokens[i];
      for (int k = 1; k < n; ++k) {
        key.push_back(' ');
        key += tokens[i + k];
      }
      ++counts[n - 1][key];
    }
  }
  return counts;
}

// my_log in the reference scorer: log(0) is floored to -9999999999.
double floored_log(double x) { return x == 0.0 ? -9999999999.0 : std::log(x); }

using CharNgramCounts = std::unordered_map<std::u32string, std::size_t>;

std::array<CharNgramCounts, kChrfCharOrder> char_ngrams(const std::u32string& chars) {
  std::array<CharNgramCounts, kChrfCharOrder> counts;
  for (int n = 1; n <= kChrfCharOrder; ++n) {
    if (chars.size() < static_cast<std::size_t>(n)) break;
    for (std::size_t i = 0; i + n <= chars.size(); ++i) ++counts[n - 1][chars.substr(i, n)];
  }
  return counts;
}

}  // namespace

TokenSequence tokenize_13a(std::string_view text) {
  return tokenize_code_points(text::decode_utf8(text));
}

BleuComponents sentence_bleu(std::string_view hypothesis, std::string_view reference) {
  // The reference scorer right-strips each segment before tokenizing.
  const TokenSequence ref_tokens =
      tokenize_code_points(std::u32string(text::rstrip(text::decode_utf8(reference))));
  if (ref_tokens.empty()) throw Error(ErrorCode::kEmptyReference, "reference has no tokens");
  const TokenSequence hyp_tokens =
      tokenize_code_points(std::u32string(text::rstrip(text::decode_utf8(hypothesis))));

  BleuComponents c;
  c.hyp_len = hyp_tokens.size();
  c.ref_len = ref_tokens.size();

  const auto hyp_ngrams = word_ngrams(hyp_tokens);
  const auto ref_ngrams = word_ngrams(ref_tokens);
  bool any_match = false;
  for (int n = 0; n < kBleuMaxOrder; ++n) {
    for (const auto& [gram, count] : hyp_ngrams[n]) {
      c.totals[n] += count;
      if (auto it = ref_ngrams[n].find(gram); it != ref_ngrams[n].end()) {
        c.matches[n] += std::min(count, it->second);
      }
    }
    any_match = any_match || c.matches[n] > 0;
  }

  if (c.hyp_len < c.ref_len) {
    c.bp = c.hyp_len > 0
               ? std::exp(1.0 - static_cast<double>(c.ref_len) / static_cast<double>(c.hyp_len))
               : 0.0;
  } else {
    c.bp = 1.0;
  }

  if (!any_match) {
    c.score = 0.0;
    return c;
  }

  double smooth = 1.0;
  for (int n = 0; n < kBleuMaxOrder; ++n) {
    if (c.totals[n] == 0) break;
    const auto total = static_cast<double>(c.totals[n]);
    if (c.matches[n] == 0) {
      smooth *= 2.0;
      c.precisions[n] = 100.0 / (smooth * total);
    } else {
      c.precisions[n] = 100.0 * static_cast<double>(c.matches[n]) / total;
    }
  }
  double log_sum = 0.0;
  for (double p : c.precisions) log_sum += floored_log(p);
  c.score = c.bp * std::exp(log_sum / kBleuMaxOrder);
  return c;
}

ChrfComponents chrf(std::string_view hypothesis, std::string_view reference) {
  const std::u32string ref_chars = text::remove_whitespace(text::decode_utf8(reference));
  if (ref_chars.empty()) throw Error(ErrorCode::kEmptyReference, "reference is blank");
  const std::u32string hyp_chars = text::remove_whitespace(text::decode_utf8(hypothesis));

  const auto hyp_ngrams = char_ngrams(hyp_chars);
  const auto ref_ngrams = char_ngrams(ref_chars);
  const double factor = kChrfBeta * kChrfBeta;

  ChrfComponents c;
  for (int n = 0; n < kChrfCharOrder; ++n) {
    std::size_t hyp_count = 0;
    std::size_t match_count = 0;
    for (const auto& [gram, count] : hyp_ngrams[n]) {
      hyp_count += count;
      if (auto it = ref_ngrams[n].find(gram); it != ref_ngrams[n].end()) {
        match_count += std::min(count, it->second);
      }
    }
    // hypothesis n-grams do not count when the reference has none of that order
    if (ref_ngrams[n].empty()) hyp_count = 0;
    std::size_t ref_count = 0;
    for (const auto& [gram, count] : ref_ngrams[n]) ref_count += count;

    if (hyp_count > 0 && ref_count > 0) {
      const double prec = static_cast<double>(match_count) / static_cast<double>(hyp_count);
      const double rec = static_cast<double>(match_count) / static_cast<double>(ref_count);
      c.per_order_precision[n] = prec;
      c.per_order_recall[n] = rec;
      const double denom = factor * prec + rec;
      c.per_order_f[n] = denom > 0.0 ? (1.0 + factor) * prec * rec / denom : 0.0;
      c.order_effective[n] = true;
      c.avg_precision += prec;
      c.avg_recall += rec;
      ++c.effective_order;
    }
  }

  if (c.effective_order == 0) {
    c.avg_precision = c.avg_recall = 0.0;
  } else {
    c.avg_precision /= c.effective_order;
    c.avg_recall /= c.effective_order;
  }
  if (c.avg_precision + c.avg_recall != 0.0) {
    double score = (1.0 + factor) * c.avg_precision * c.avg_recall;
    score /= (factor * c.avg_precision) + c.avg_recall;
    c.score = 100.0 * score;
  } else {
    c.score = 0.0;
  }
  return c;
}

}  // namespace mtbreak
