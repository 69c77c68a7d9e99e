#include "textcue/ocr_metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <unordered_map>

#include "textcue/error.hpp"

namespace textcue::ocr {

namespace {

bool is_ascii_punct(unsigned char c) { return c < 0x80 && std::ispunct(c); }

using Counts = std::map<std::vector<std::string>, std::size_t>;

Counts ngram_counts(const std::vector<std::string>& tokens, std::size_t n) {
  Counts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + i, tokens.begin() + i + n)];
  }
  return counts;
}

std::size_t clipped_matches(const Counts& pred, const Counts& ref) {
  std::size_t m = 0;
  for (const auto& [gram, c] : pred) {
    if (auto it = ref.find(gram); it != ref.end()) m += std::min(c, it->second);
  }
  return m;
}

std::size_t count_chunks(const std::vector<long>& align) {
  std::size_t chunks = 0;
  for (std::size_t i = 0; i < align.size(); ++i) {
    if (align[i] < 0) continue;
    const bool continues = i > 0 && align[i - 1] >= 0 && align[i - 1] + 1 == align[i];
    if (!continues) ++chunks;
  }
  return chunks;
}

// Branch and bound over every alignment that matches the clipped unigram
// count, looking for fewer chunks than `bound`. Gives up after a node budget
// and keeps the best found so far.
class ChunkSearch {
 public:
  ChunkSearch(const std::vector<int>& p, const std::vector<int>& r, std::size_t bound)
      : p_(p), r_(r), best_(bound), used_(r.size(), false), align_(p.size(), -1) {
    int vocab = 0;
    for (int t : p) vocab = std::max(vocab, t + 1);
    for (int t : r) vocab = std::max(vocab, t + 1);
    std::vector<std::size_t> cp(vocab), cr(vocab);
    for (int t : p) ++cp[t];
    for (int t : r) ++cr[t];
    need_.resize(vocab);
    for (int t = 0; t < vocab; ++t) need_[t] = std::min(cp[t], cr[t]);
    left_ = cp;
    for (std::size_t j = 0; j < r.size(); ++j) by_token_.emplace(r[j], j);
  }

  std::size_t run() {
    visit(0, 0);
    return best_;
  }

 private:
  static constexpr std::size_t kBudget = 1u << 20;

  void visit(std::size_t i, std::size_t chunks) {
    if (chunks >= best_ || ++nodes_ > kBudget) return;
    if (i == p_.size()) {
      best_ = chunks;
      return;
    }
    const int t = p_[i];
    --left_[t];
    if (need_[t] > 0) {
      const long prev = i > 0 ? align_[i - 1] : -1;
      // Extending the current chunk first tightens the bound early.
      const long cont = prev >= 0 ? prev + 1 : -1;
      if (cont >= 0 && static_cast<std::size_t>(cont) < r_.size() && r_[cont] == t &&
          !used_[cont]) {
        assign(i, cont, chunks);
      }
      auto [lo, hi] = by_token_.equal_range(t);
      for (auto it = lo; it != hi; ++it) {
        const auto j = static_cast<long>(it->second);
        if (j != cont && !used_[j]) assign(i, j, chunks + 1);
      }
    }
    // Skipping is only allowed while the remaining copies can still meet the quota.
    if (left_[t] >= need_[t]) {
      align_[i] = -1;
      visit(i + 1, chunks);
    }
    ++left_[t];
  }

  void assign(std::size_t i, long j, std::size_t chunks) {
    const int t = p_[i];
    used_[j] = true;
    align_[i] = j;
    --need_[t];
    visit(i + 1, chunks);
    ++need_[t];
    align_[i] = -1;
    used_[j] = false;
  }

  const std::vector<int>& p_;
  const std::vector<int>& r_;
  std::size_t best_;
  std::size_t nodes_ = 0;
  std::vector<bool> used_;
  std::vector<long> align_;
  std::vector<std::size_t> need_;
  std::vector<std::size_t> left_;
  std::multimap<int, std::size_t> by_token_;
};

std::size_t min_chunks(const std::vector<int>& p, const std::vector<int>& r, std::size_t bound) {
  return ChunkSearch(p, r, bound).run();
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    std::size_t b = i;
    std::size_t e = j;
    while (b < e && is_ascii_punct(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && is_ascii_punct(static_cast<unsigned char>(text[e - 1]))) --e;
    if (b < e) {
      std::string tok(text.substr(b, e - b));
      for (char& c : tok) {
        if (static_cast<unsigned char>(c) < 0x80) {
          c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
      }
      out.push_back(std::move(tok));
    }
    i = j;
  }
  return out;
}

std::u32string utf8_codepoints(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (c < 0x80) {
      len = 1;
      cp = c;
    } else if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) {
      out.push_back(c);
      ++i;
    } else {
      out.push_back(cp);
      i += len;
    }
  }
  return out;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double edit_distance_norm(std::string_view prediction, std::string_view reference) {
  const auto p = utf8_codepoints(prediction);
  const auto r = utf8_codepoints(reference);
  const std::size_t denom = std::max(p.size(), r.size());
  if (denom == 0) return 0.0;
  return static_cast<double>(levenshtein(p, r)) / static_cast<double>(denom);
}

WordPRF word_prf(std::string_view prediction, std::string_view reference) {
  const auto p = tokenize(prediction);
  const auto r = tokenize(reference);
  WordPRF out;
  if (p.empty() || r.empty()) return out;
  const auto matched =
      static_cast<double>(clipped_matches(ngram_counts(p, 1), ngram_counts(r, 1)));
  out.precision = matched / static_cast<double>(p.size());
  out.recall = matched / static_cast<double>(r.size());
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

BleuStats bleu_stats(std::span<const TextPair> corpus) {
  BleuStats st;
  for (const auto& pair : corpus) {
    const auto p = tokenize(pair.prediction);
    const auto r = tokenize(pair.reference);
    st.pred_len += static_cast<double>(p.size());
    st.ref_len += static_cast<double>(r.size());
    for (int n = 1; n <= kBleuOrder; ++n) {
      const auto pc = ngram_counts(p, n);
      st.matches[n - 1] += static_cast<double>(clipped_matches(pc, ngram_counts(r, n)));
      st.totals[n - 1] +=
          static_cast<double>(p.size() >= static_cast<std::size_t>(n) ? p.size() - n + 1 : 0);
    }
  }
  return st;
}

double bleu_from_stats(const BleuStats& st) {
  if (st.pred_len <= 0.0) return 0.0;
  double log_sum = 0.0;
  for (int n = 0; n < kBleuOrder; ++n) {
    log_sum += std::log((st.matches[n] + 1.0) / (st.totals[n] + 1.0));
  }
  const double bp = std::exp(std::min(0.0, 1.0 - st.ref_len / st.pred_len));
  return bp * std::exp(log_sum / kBleuOrder);
}

double bleu(std::span<const TextPair> corpus) {
  if (corpus.empty()) fail(ErrorCode::kEmptyInput, "BLEU needs a non-empty corpus");
  return bleu_from_stats(bleu_stats(corpus));
}

MeteorDetail meteor_detail(std::string_view prediction, std::string_view reference) {
  const auto p_tok = tokenize(prediction);
  const auto r_tok = tokenize(reference);
  MeteorDetail d;
  if (p_tok.empty() || r_tok.empty()) return d;

  std::unordered_map<std::string, int> ids;
  auto intern = [&](const std::vector<std::string>& toks) {
    std::vector<int> out;
    out.reserve(toks.size());
    for (const auto& t : toks) out.push_back(ids.emplace(t, static_cast<int>(ids.size())).first->second);
    return out;
  };
  const auto p = intern(p_tok);
  const auto r = intern(r_tok);
  const std::size_t np = p.size();
  const std::size_t nr = r.size();

  // Greedy pass: repeatedly align the longest run of equal, unaligned tokens.
  std::vector<long> align(np, -1);
  std::vector<bool> used_r(nr, false);
  std::vector<std::size_t> run((np + 1) * (nr + 1));
  for (;;) {
    std::size_t best_len = 0, best_i = 0, best_j = 0;
    for (std::size_t i = 1; i <= np; ++i) {
      for (std::size_t j = 1; j <= nr; ++j) {
        std::size_t& cell = run[i * (nr + 1) + j];
        if (align[i - 1] < 0 && !used_r[j - 1] && p[i - 1] == r[j - 1]) {
          cell = run[(i - 1) * (nr + 1) + (j - 1)] + 1;
        } else {
          cell = 0;
        }
        // Row-major scan: the first run of a given length has the earliest start.
        if (cell > best_len) {
          best_len = cell;
          best_i = i - cell;
          best_j = j - cell;
        }
      }
    }
    if (best_len == 0) break;
    for (std::size_t k = 0; k < best_len; ++k) {
      align[best_i + k] = static_cast<long>(best_j + k);
      used_r[best_j + k] = true;
    }
    d.matches += best_len;
  }
  if (d.matches == 0) return d;
  d.chunks = count_chunks(align);
  if (d.chunks > 1) d.chunks = min_chunks(p, r, d.chunks);

  const double m = static_cast<double>(d.matches);
  d.precision = m / static_cast<double>(np);
  d.recall = m / static_cast<double>(nr);
  d.fmean = d.precision * d.recall /
            (kMeteorAlpha * d.precision + (1.0 - kMeteorAlpha) * d.recall);
  d.penalty = kMeteorGamma * std::pow(static_cast<double>(d.chunks) / m, kMeteorBeta);
  d.score = d.fmean * (1.0 - d.penalty);
  return d;
}

double meteor(std::string_view prediction, std::string_view reference) {
  return meteor_detail(prediction, reference).score;
}

OcrReport ocr_report(std::span<const TextPair> corpus) {
  if (corpus.empty()) fail(ErrorCode::kEmptyInput, "OCR report needs at least one pair");
  OcrReport rep;
  rep.count = corpus.size();
  for (const auto& pair : corpus) {
    rep.edit_distance += edit_distance_norm(pair.prediction, pair.reference);
    const auto prf = word_prf(pair.prediction, pair.reference);
    rep.precision += prf.precision;
    rep.recall += prf.recall;
    rep.f1 += prf.f1;
    rep.meteor += meteor(pair.prediction, pair.reference);
  }
  const auto n = static_cast<double>(rep.count);
  rep.edit_distance /= n;
  rep.precision /= n;
  rep.recall /= n;
  rep.f1 /= n;
  rep.meteor /= n;
  rep.bleu = bleu(corpus);
  return rep;
}

}  // namespace textcue::ocr
