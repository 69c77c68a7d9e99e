#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace textcue::ocr {

struct TextPair {
  std::string prediction;
  std::string reference;
};

/// Lowercased whitespace tokens with leading/trailing ASCII punctuation
/// stripped. Intra-word hyphens and apostrophes survive. Empty tokens are
/// dropped.
std::vector<std::string> tokenize(std::string_view text);

/// Decodes UTF-8 to code points; invalid bytes decode as themselves.
std::u32string utf8_codepoints(std::string_view text);

std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// Character-level Levenshtein distance over max(len(pred), len(ref)).
double edit_distance_norm(std::string_view prediction, std::string_view reference);

struct WordPRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Bag-of-words precision/recall/F1 with multiplicity clipping.
WordPRF word_prf(std::string_view prediction, std::string_view reference);

inline constexpr int kBleuOrder = 4;

struct BleuStats {
  double matches[kBleuOrder] = {};
  double totals[kBleuOrder] = {};
  double pred_len = 0.0;
  double ref_len = 0.0;
};

BleuStats bleu_stats(std::span<const TextPair> corpus);

/// Corpus BLEU-4: add-one smoothed modified precisions (both numerator and
/// denominator), geometric mean, times exp(min(0, 1 - r/c)).
double bleu(std::span<const TextPair> corpus);
double bleu_from_stats(const BleuStats& stats);

inline constexpr double kMeteorAlpha = 0.9;
inline constexpr double kMeteorBeta = 3.0;
inline constexpr double kMeteorGamma = 0.5;

struct MeteorDetail {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double penalty = 0.0;
  double score = 0.0;
};

/// Exact-match METEOR. Matches are the clipped unigram counts; chunks are the
/// fewest contiguous runs over all alignments with that many matches, found by
/// a bounded search seeded with a longest-run-first greedy alignment. Very
/// long inputs that exhaust the search budget keep the best count found.
MeteorDetail meteor_detail(std::string_view prediction, std::string_view reference);
double meteor(std::string_view prediction, std::string_view reference);

struct OcrReport {
  std::size_t count = 0;
  double edit_distance = 0.0;  // mean
  double precision = 0.0;      // mean
  double recall = 0.0;         // mean
  double f1 = 0.0;             // mean
  double bleu = 0.0;           // corpus level
  double meteor = 0.0;         // mean
};

OcrReport ocr_report(std::span<const TextPair> corpus);

}  // namespace textcue::ocr
