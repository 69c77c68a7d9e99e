#include <doctest.h>

#include <set>

#include <nlohmann/json.hpp>

#include "gen.hpp"
#include "textcue/error.hpp"
#include "textcue/eval.hpp"
#include "textcue/io.hpp"

using namespace textcue;
using namespace textcue::eval;
using nlohmann::json;

namespace {

const std::string kHarness = std::string(TC_FIXTURE_DIR) + "/harness";

Sample gen_sample(const std::string& id, const std::string& answer,
                  std::vector<std::string> tags = {"categorical"}) {
  Sample s;
  s.id = id;
  s.subset = Subset::kGen;
  s.options = {"a", "b", "c", "d"};
  s.answer = answer;
  s.reasoning_tags = std::move(tags);
  s.layout = "background";
  s.font = "handwritten";
  return s;
}

ResponseRecord response(const std::string& id, const std::string& text, Mode m = Mode::kCoT) {
  return {id, m, text, std::nullopt};
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInvalidArgument;
}

void check_bucket(const Bucket& b, const json& want) {
  CHECK(b.correct == want[0].get<std::size_t>());
  CHECK(b.total == want[1].get<std::size_t>());
}

void check_map(const std::map<std::string, Bucket>& got, const json& want) {
  CHECK(got.size() == want.size());
  for (const auto& [k, v] : want.items()) {
    INFO("bucket " << k);
    REQUIRE(got.count(k) == 1);
    check_bucket(got.at(k), v);
  }
}

}  // namespace

TEST_CASE("extract_choice golden corpus") {
  std::size_t n = 0;
  for (const auto& [line, rec] : io::read_jsonl(kHarness + "/choices.jsonl")) {
    const auto text = rec["completion"].get<std::string>();
    const auto got = extract_choice(text);
    INFO("line " << line << ": " << text);
    if (rec["expected"].is_null()) {
      CHECK_FALSE(got.has_value());
    } else {
      REQUIRE(got.has_value());
      CHECK(std::string(1, *got) == rec["expected"].get<std::string>());
    }
    ++n;
  }
  CHECK(n >= 30);
}

TEST_CASE("final answer extraction and normalized match") {
  CHECK(extract_final_answer("work\nAnswer: 42 apples") == "42 apples");
  CHECK(extract_final_answer("Answer:\n\n**Tuesday**") == "Tuesday");
  CHECK(extract_final_answer("no marker here\nlast line") == "last line");
  CHECK(normalized_match("  The  Answer. ", "the answer"));
  CHECK(normalized_match("3.5%.", "3.5%"));
  CHECK_FALSE(normalized_match("", ""));
  CHECK_FALSE(normalized_match("35%", "3.5%"));
}

TEST_CASE("score_run: simple accuracies") {
  const std::vector<Sample> s{gen_sample("1", "A"), gen_sample("2", "B"), gen_sample("3", "C"),
                              gen_sample("4", "D")};
  std::vector<ResponseRecord> r{response("1", "Answer: A"), response("2", "Answer: B"),
                                response("3", "Answer: A"), response("4", "Answer: A")};
  auto rep = score_run(s, r, {});
  CHECK(rep.overall.accuracy() == 0.5);

  r[2].completion = "Answer: C";
  r[3].completion = "Answer: D";
  rep = score_run(s, r, {});
  CHECK(rep.overall.accuracy() == 1.0);
  for (const auto* m : {&rep.by_subset, &rep.gen_by_tag, &rep.gen_by_type_count, &rep.by_layout,
                        &rep.by_font}) {
    for (const auto& [k, b] : *m) CHECK(b.accuracy() == 1.0);
  }
}

TEST_CASE("score_run: 10-sample bucket table") {
  const auto samples = load_manifest(kHarness + "/manifest.jsonl");
  const auto responses = load_responses(kHarness + "/responses.jsonl");
  ScoreOptions opt;
  opt.free_form = exact_match_scorer();
  const auto rep = score_run(samples, responses, opt);
  const auto want = json::parse(io::read_text(kHarness + "/expected_cot.json"));
  check_bucket(rep.overall, want["overall"]);
  check_map(rep.by_subset, want["by_subset"]);
  check_map(rep.gen_by_type_count, want["gen_by_type_count"]);
  check_map(rep.gen_by_tag, want["gen_by_tag"]);
  check_map(rep.real_by_tag, want["real_by_tag"]);
  check_map(rep.by_layout, want["by_layout"]);
  check_map(rep.by_font, want["by_font"]);
  CHECK(rep.unparsed == want["unparsed"].get<std::size_t>());
  CHECK(rep.missing == want["missing"].get<std::size_t>());
  REQUIRE(rep.mean_completion_tokens.has_value());
  CHECK(*rep.mean_completion_tokens == doctest::Approx((6 * 20 + 3 * 40) / 9.0));
}

TEST_CASE("score_run: judge failures are excluded and counted") {
  const auto samples = load_manifest(kHarness + "/manifest.jsonl");
  const auto responses = load_responses(kHarness + "/responses.jsonl");
  ScoreOptions opt;
  opt.workers = 3;
  opt.free_form = [](const Sample& s, std::string_view) {
    FreeFormVerdict v;
    if (s.id == "r2") {
      v.status = FreeFormVerdict::Status::kParseError;
    } else if (s.id == "r3") {
      throw std::runtime_error("socket closed");
    } else {
      v.correct = true;
      v.retries = 2;
    }
    return v;
  };
  const auto rep = score_run(samples, responses, opt);
  CHECK(rep.judge_excluded == std::vector<std::string>{"r2", "r3"});
  CHECK(rep.by_subset.at("Real").total == 1);
  CHECK(rep.overall.total == 8);
  CHECK(rep.judge_retries == 2);
}

TEST_CASE("score_run: invalid runs") {
  const std::vector<Sample> s{gen_sample("1", "A")};
  CHECK(code_of([&] { score_run(s, std::vector{response("9", "A")}, {}); }) ==
        ErrorCode::kUnknownSample);
  CHECK(code_of([&] {
          score_run(s, std::vector{response("1", "A"), response("1", "B")}, {});
        }) == ErrorCode::kDuplicateResponse);
  CHECK_NOTHROW(score_run(s, std::vector{response("1", "A"), response("1", "B", Mode::kDirect)}, {}));

  Sample real;
  real.id = "r";
  real.subset = Subset::kReal;
  real.answer = "x";
  const std::vector<Sample> rs{real};
  CHECK(code_of([&] { score_run(rs, std::vector{response("r", "x")}, {}); }) ==
        ErrorCode::kInvalidArgument);
}

TEST_CASE("manifest parsing") {
  SUBCASE("aliases") {
    const auto s = sample_from_json(json::parse(R"({
      "id": 7, "context": "c", "question": "q", "options": {"A":"1","B":"2","C":"3","D":"4"},
      "solution": 2, "type": {"Categorical reasoning": true, "Disjunctive reasoning": false},
      "image": "x.png", "background": true, "handwritten": false})"));
    CHECK(s.id == "7");
    CHECK(s.subset == Subset::kGen);
    CHECK(s.answer == "C");
    CHECK(s.reasoning_tags == std::vector<std::string>{"categorical"});
    CHECK(s.image_ref == "x.png");
    CHECK(s.layout == "background");
    CHECK(s.font == "non-handwritten");
  }
  SUBCASE("invalid records") {
    CHECK(code_of([] {
            sample_from_json(json::parse(
                R"({"id":"1","subset":"Gen","options":["a","b","c"],"answer":"A"})"));
          }) == ErrorCode::kValue);
    CHECK(code_of([] {
            sample_from_json(json::parse(
                R"({"id":"1","subset":"Gen","options":["a","b","c","d"],"answer":"E"})"));
          }) == ErrorCode::kValue);
    CHECK(code_of([] {
            sample_from_json(json::parse(R"({"id":"1","subset":"Real","answer":""})"));
          }) == ErrorCode::kValue);
    CHECK(code_of([] {
            sample_from_json(json::parse(
                R"({"id":"1","subset":"Real","answer":"x","reasoning_tags":["astrology"]})"));
          }) == ErrorCode::kValue);
    CHECK(code_of([] { sample_from_json(json::parse("[1,2]")); }) == ErrorCode::kFormat);
  }
  SUBCASE("mode names") {
    CHECK(parse_mode("CoT") == Mode::kCoT);
    CHECK(parse_mode("direct") == Mode::kDirect);
    CHECK(code_of([] { parse_mode("fast"); }) == ErrorCode::kInvalidArgument);
  }
}

TEST_CASE("answer distribution") {
  std::vector<Sample> s{gen_sample("1", "A"), gen_sample("2", "B"), gen_sample("3", "C"),
                        gen_sample("4", "D")};
  auto d = answer_distribution(s);
  for (double v : d) CHECK(v == 0.25);
  s = {gen_sample("1", "A"), gen_sample("2", "A"), gen_sample("3", "A")};
  d = answer_distribution(s);
  CHECK(d[0] == 1.0);
  CHECK(d[1] == 0.0);
  CHECK(code_of([] { answer_distribution(std::vector<Sample>{}); }) == ErrorCode::kEmptyInput);
}

TEST_CASE("manifest statistics") {
  SUBCASE("toy manifest") {
    // 5 + 1 + 4 = 10 words and 15 + 1 + 4 = 20 words.
    auto a = gen_sample("1", "A");
    a.context = "one two three four five";
    a.question = "why?";
    auto b = gen_sample("2", "B");
    b.context = "w w w w w w w w w w w w w w w";
    b.question = "how?";
    const auto st = manifest_stats(std::vector<Sample>{a, b});
    CHECK(word_count(a) == 10);
    CHECK(word_count(b) == 20);
    CHECK(st.average_words == 15.0);
  }
  SUBCASE("layout shares") {
    std::vector<Sample> s;
    for (int i = 0; i < 5; ++i) {
      auto x = gen_sample(std::to_string(i), "A");
      x.layout = i < 2 ? "background" : "interleaved";
      s.push_back(x);
    }
    const auto j = stats_to_json(manifest_stats(s));
    CHECK(j["layout"]["background"]["fraction"] == 0.4);
    CHECK(j["layout"]["interleaved"]["fraction"] == 0.6);
  }
  SUBCASE("seeded 50-sample recount") {
    tc_test::Rng rng(50);
    std::vector<Sample> s;
    std::map<std::string, std::size_t> tags, layout, font, counts;
    std::size_t letters[4] = {}, words = 0, gen = 0;
    const std::vector<std::string> gen_tags(kGenTags.begin(), kGenTags.end());
    for (int i = 0; i < 50; ++i) {
      auto x = gen_sample("s" + std::to_string(i), std::string(1, static_cast<char>('A' + rng.uniform(0, 3))));
      std::set<std::string> t;
      const auto nt = rng.uniform(0, 5);
      for (std::size_t k = 0; k < nt; ++k) t.insert(rng.pick(gen_tags));
      x.reasoning_tags.assign(t.begin(), t.end());
      x.layout = rng.coin() ? "background" : "interleaved";
      x.font = rng.coin() ? "handwritten" : "non-handwritten";
      const auto nw = rng.uniform(1, 30);
      x.context.clear();
      for (std::size_t k = 0; k < nw; ++k) x.context += "w ";
      x.question = "q";
      x.options = {"a", "b", "c", "d"};
      words += nw + 1 + 4;
      for (const auto& tag : x.reasoning_tags) ++tags["Gen/" + tag];
      ++layout[*x.layout];
      ++font[*x.font];
      ++counts[type_count_bucket(x.reasoning_tags.size())];
      ++letters[x.answer[0] - 'A'];
      ++gen;
      s.push_back(x);
    }
    const auto st = manifest_stats(s);
    CHECK(st.total == 50);
    CHECK(st.per_subset.at("Gen") == gen);
    CHECK(st.tag_counts == tags);
    CHECK(st.layout_counts == layout);
    CHECK(st.font_counts == font);
    CHECK(st.type_count_counts == counts);
    CHECK(st.average_words == doctest::Approx(words / 50.0));
    REQUIRE(st.answer_distribution.has_value());
    for (int k = 0; k < 4; ++k) CHECK((*st.answer_distribution)[k] == letters[k] / 50.0);
  }
}

TEST_CASE("report JSON carries every bucket") {
  const auto samples = load_manifest(kHarness + "/manifest.jsonl");
  const auto responses = load_responses(kHarness + "/responses.jsonl");
  ScoreOptions opt;
  opt.free_form = exact_match_scorer();
  const auto j = report_to_json(score_run(samples, responses, opt));
  CHECK(j["mode"] == "CoT");
  CHECK(j["overall"]["accuracy"] == 0.6);
  CHECK(j["gen_by_type_count"].contains(">3"));
  CHECK(j["unparsed"] == 1);
  CHECK(j["missing"] == 1);
}
