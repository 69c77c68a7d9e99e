#include <doctest.h>

#include <cmath>

#include "gen.hpp"
#include "oracles.hpp"
#include "textcue/error.hpp"
#include "textcue/ocr_metrics.hpp"

using namespace textcue::ocr;

TEST_CASE("tokenizer") {
  CHECK(tokenize("  Hello, World!  it's  (fine). ") ==
        std::vector<std::string>{"hello", "world", "it's", "fine"});
  CHECK(tokenize("well-known -- ...").size() == 1);
  CHECK(tokenize("").empty());
}

TEST_CASE("edit distance") {
  CHECK(edit_distance_norm("same text", "same text") == 0.0);
  CHECK(edit_distance_norm("kitten", "sitting") == doctest::Approx(3.0 / 7.0));
  CHECK(edit_distance_norm("", "abc") == 1.0);
  CHECK(edit_distance_norm("", "") == 0.0);
  // Code points, not bytes: one substitution over two characters.
  CHECK(edit_distance_norm("\xC3\xA9t", "et") == 0.5);
}

TEST_CASE("word precision / recall / F1") {
  auto p = word_prf("the cat sat", "the cat sat");
  CHECK(p.precision == 1.0);
  CHECK(p.recall == 1.0);
  CHECK(p.f1 == 1.0);
  p = word_prf("a b", "b c");
  CHECK(p.precision == 0.5);
  CHECK(p.recall == 0.5);
  CHECK(p.f1 == 0.5);
  p = word_prf("", "b c");
  CHECK(p.f1 == 0.0);
  p = word_prf("a a a b", "a b b");
  CHECK(p.precision == doctest::Approx(2.0 / 4.0));
  CHECK(p.recall == doctest::Approx(2.0 / 3.0));

  tc_test::Rng rng(8);
  const std::vector<std::string> vocab{"x", "y", "z", "w", "v"};
  for (int i = 0; i < 200; ++i) {
    const auto a = tc_test::join(tc_test::word_sequence(rng, rng.uniform(0, 7), vocab));
    const auto b = tc_test::join(tc_test::word_sequence(rng, rng.uniform(0, 7), vocab));
    const auto ab = word_prf(a, b);
    const auto ba = word_prf(b, a);
    CHECK(ab.precision == ba.recall);
    CHECK(ab.recall == ba.precision);
    CHECK(ab.f1 == ba.f1);
  }
}

TEST_CASE("BLEU") {
  SUBCASE("identical corpus scores one") {
    const std::vector<TextPair> c{{"the quick brown fox jumps over the lazy dog",
                                   "the quick brown fox jumps over the lazy dog"}};
    CHECK(bleu(c) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("no overlap gives the smoothing floor") {
    const std::vector<TextPair> c{{"a b c d e", "f g h i j"}};
    const double floor = std::pow((1.0 / 6) * (1.0 / 5) * (1.0 / 4) * (1.0 / 3), 0.25);
    CHECK(bleu(c) == doctest::Approx(floor));
  }
  SUBCASE("half-length prediction pays e^(1-2)") {
    const std::vector<TextPair> short_c{{"a b c d", "a b c d e f g h"}};
    const auto st = bleu_stats(short_c);
    double prec = 1.0;
    for (int n = 0; n < 4; ++n) prec *= (st.matches[n] + 1) / (st.totals[n] + 1);
    CHECK(bleu(short_c) == doctest::Approx(std::exp(1.0 - 2.0) * std::pow(prec, 0.25)));
  }
  SUBCASE("empty prediction corpus scores zero") {
    const std::vector<TextPair> c{{"", "a b"}};
    CHECK(bleu(c) == 0.0);
  }
  SUBCASE("empty corpus is an error") {
    CHECK_THROWS_AS(bleu({}), textcue::Error);
  }
}

TEST_CASE("METEOR") {
  CHECK(meteor("alpha beta", "gamma delta") == 0.0);
  CHECK(meteor("word", "word") == doctest::Approx(0.5));
  const std::string ten = "one two three four five six seven eight nine ten";
  CHECK(meteor(ten, ten) == doctest::Approx(0.9995));
  const auto d = meteor_detail("b a", "a b");
  CHECK(d.matches == 2);
  CHECK(d.chunks == 2);
}

TEST_CASE("METEOR chunk count is minimal") {
  // Longest-run-first alone ends with three chunks here; two suffice.
  const auto d = meteor_detail("a b c b c a", "b c a c b c");
  CHECK(d.matches == 5);
  CHECK(d.chunks == 2);
  CHECK(tc_test::oracle::meteor("a b c b c a", "b c a c b c").chunks == 2);

  tc_test::Rng rng(21);
  const std::vector<std::string> vocab{"a", "b", "c", "d"};
  for (int i = 0; i < 300; ++i) {
    const auto p = tc_test::join(tc_test::word_sequence(rng, rng.uniform(1, 7), vocab));
    const auto r = tc_test::join(tc_test::word_sequence(rng, rng.uniform(1, 7), vocab));
    const auto got = meteor_detail(p, r);
    const auto want = tc_test::oracle::meteor(p, r);
    INFO(p << " | " << r);
    CHECK(got.matches == want.matches);
    CHECK(got.chunks == want.chunks);
    CHECK(got.score == doctest::Approx(want.score).epsilon(1e-12));
  }
}

TEST_CASE("deleting matched words never raises BLEU or METEOR") {
  // Truncating a fully matched prediction only removes matches.
  const std::vector<std::string> refs{"the cat sat on the mat by the door",
                                      "shop opens at nine every day except sunday"};
  for (const auto& ref : refs) {
    auto w = tokenize(ref);
    double prev_b = 2.0, prev_m = 2.0;
    while (!w.empty()) {
      const auto pred = tc_test::join(w);
      const std::vector<TextPair> c{{pred, ref}};
      CHECK(bleu(c) <= prev_b + 1e-15);
      CHECK(meteor(pred, ref) <= prev_m + 1e-15);
      prev_b = bleu(c);
      prev_m = meteor(pred, ref);
      w.pop_back();
    }
  }
  // Not true in general: removing the matched "b" joins "a c d e" into one run.
  const std::vector<TextPair> before{{"a b c d e", "a c d e b"}}, after{{"a c d e", "a c d e b"}};
  CHECK(bleu(after) > bleu(before));
}

TEST_CASE("report averages and ranges") {
  const std::vector<TextPair> c{{"hello world", "hello world"}, {"", "abc def"},
                                {"foo bar baz", "foo baz bar"}};
  const auto r = ocr_report(c);
  CHECK(r.count == 3);
  for (double v : {r.edit_distance, r.precision, r.recall, r.f1, r.bleu, r.meteor}) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(r.f1 == doctest::Approx((1.0 + 0.0 + 1.0) / 3.0));
}
