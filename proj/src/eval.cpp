#include "textcue/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <regex>
#include <set>
#include <thread>
#include <unordered_map>

#include "textcue/error.hpp"
#include "textcue/io.hpp"

namespace textcue::eval {

using nlohmann::json;
using ojson = nlohmann::ordered_json;

std::string_view to_string(Subset s) { return s == Subset::kGen ? "Gen" : "Real"; }
std::string_view to_string(Mode m) { return m == Mode::kCoT ? "CoT" : "Direct"; }

namespace {

std::string lower(std::string_view s) {
  std::string r(s);
  for (char& c : r) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return r;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string string_field(const json& rec, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (rec.contains(n) && !rec[n].is_null()) {
      const auto& v = rec[n];
      if (v.is_string()) return v.get<std::string>();
      if (v.is_number()) return v.dump();
      fail(ErrorCode::kFormat, std::string("field '") + n + "' must be a string");
    }
  }
  return {};
}

// "Sufficient_Conditional reasoning" -> "sufficient"; "Numerical" -> "numerical".
std::string canonical_tag(std::string_view raw, Subset subset) {
  std::string t = lower(trim(raw));
  for (char& c : t) {
    if (c == '_' || c == '-') c = ' ';
  }
  auto strip_suffix = [&](std::string_view suffix) {
    if (t.size() > suffix.size() && t.ends_with(suffix)) t.resize(t.size() - suffix.size());
  };
  strip_suffix(" reasoning");
  if (t.starts_with("sufficient") || t.starts_with("necessary")) strip_suffix(" conditional");
  t = trim(t);
  const bool known =
      subset == Subset::kGen
          ? std::find(kGenTags.begin(), kGenTags.end(), t) != kGenTags.end()
          : std::find(kRealTags.begin(), kRealTags.end(), t) != kRealTags.end();
  if (!known) {
    fail(ErrorCode::kValue, "unknown " + std::string(to_string(subset)) +
                                " reasoning tag '" + std::string(raw) + "'");
  }
  return t;
}

bool truthy(const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number()) return v.get<double>() != 0.0;
  if (v.is_string()) return !v.get<std::string>().empty();
  return !v.is_null();
}

}  // namespace

Mode parse_mode(std::string_view text) {
  const auto t = lower(text);
  if (t == "cot") return Mode::kCoT;
  if (t == "direct") return Mode::kDirect;
  fail(ErrorCode::kInvalidArgument, "mode must be CoT or Direct, got '" + std::string(text) + "'");
}

Sample sample_from_json(const json& rec) {
  if (!rec.is_object()) fail(ErrorCode::kFormat, "sample record must be a JSON object");
  Sample s;
  s.id = string_field(rec, {"id"});
  if (s.id.empty()) fail(ErrorCode::kFormat, "sample record without id");
  const std::string where = "sample " + s.id;

  const json* options = nullptr;
  if (rec.contains("options") && !rec["options"].is_null()) options = &rec["options"];
  if (options) {
    if (options->is_array()) {
      for (const auto& o : *options) {
        if (!o.is_string()) fail(ErrorCode::kFormat, where + ": options must be strings");
        s.options.push_back(o.get<std::string>());
      }
    } else if (options->is_object()) {
      for (const char* letter : {"A", "B", "C", "D"}) {
        if (options->contains(letter)) s.options.push_back((*options)[letter].get<std::string>());
      }
      if (s.options.size() != options->size()) {
        fail(ErrorCode::kValue, where + ": option keys must be A-D");
      }
    } else {
      fail(ErrorCode::kFormat, where + ": options must be an array or object");
    }
  }

  const std::string subset = lower(string_field(rec, {"subset"}));
  if (subset == "gen" || subset == "logicocr-gen") {
    s.subset = Subset::kGen;
  } else if (subset == "real" || subset == "logicocr-real") {
    s.subset = Subset::kReal;
  } else if (subset.empty()) {
    s.subset = s.options.empty() ? Subset::kReal : Subset::kGen;
  } else {
    fail(ErrorCode::kValue, where + ": unknown subset '" + subset + "'");
  }

  s.context = string_field(rec, {"context"});
  s.question = string_field(rec, {"question"});
  s.image_ref = string_field(rec, {"image_ref", "image"});

  const char* answer_key = rec.contains("answer") ? "answer" : "solution";
  if (rec.contains(answer_key) && rec[answer_key].is_number_integer() && s.subset == Subset::kGen) {
    const auto idx = rec[answer_key].get<long>();
    if (idx < 0 || idx > 3) fail(ErrorCode::kValue, where + ": answer index out of range");
    s.answer = std::string(1, static_cast<char>('A' + idx));
  } else {
    s.answer = trim(string_field(rec, {answer_key}));
  }

  std::set<std::string> tags;
  const char* tag_key = rec.contains("reasoning_tags") ? "reasoning_tags" : "type";
  if (rec.contains(tag_key) && !rec[tag_key].is_null()) {
    const auto& v = rec[tag_key];
    if (v.is_array()) {
      for (const auto& t : v) tags.insert(canonical_tag(t.get<std::string>(), s.subset));
    } else if (v.is_object()) {
      for (const auto& [name, flag] : v.items()) {
        if (truthy(flag)) tags.insert(canonical_tag(name, s.subset));
      }
    } else if (v.is_string()) {
      tags.insert(canonical_tag(v.get<std::string>(), s.subset));
    } else {
      fail(ErrorCode::kFormat, where + ": reasoning tags must be a list, object or string");
    }
  }
  s.reasoning_tags.assign(tags.begin(), tags.end());

  if (auto layout = lower(string_field(rec, {"layout"})); !layout.empty()) {
    if (layout != "background" && layout != "interleaved") {
      fail(ErrorCode::kValue, where + ": layout must be background or interleaved");
    }
    s.layout = layout;
  } else if (rec.contains("background") && rec["background"].is_boolean()) {
    s.layout = rec["background"].get<bool>() ? "background" : "interleaved";
  }
  if (auto font = lower(string_field(rec, {"font"})); !font.empty()) {
    if (font == "non handwritten" || font == "non_handwritten" || font == "printed") {
      font = "non-handwritten";
    }
    if (font != "handwritten" && font != "non-handwritten") {
      fail(ErrorCode::kValue, where + ": font must be handwritten or non-handwritten");
    }
    s.font = font;
  } else if (rec.contains("handwritten") && rec["handwritten"].is_boolean()) {
    s.font = rec["handwritten"].get<bool>() ? "handwritten" : "non-handwritten";
  }

  if (s.subset == Subset::kGen) {
    if (s.options.size() != 4) fail(ErrorCode::kValue, where + ": Gen samples need exactly 4 options");
    if (s.answer.size() != 1 || s.answer[0] < 'A' || s.answer[0] > 'D') {
      const std::string up = lower(s.answer);
      if (up.size() == 1 && up[0] >= 'a' && up[0] <= 'd') {
        s.answer = std::string(1, static_cast<char>(std::toupper(up[0])));
      } else {
        fail(ErrorCode::kValue, where + ": Gen answer must be one of A-D");
      }
    }
  } else if (s.answer.empty()) {
    fail(ErrorCode::kValue, where + ": Real samples need a non-empty answer");
  }
  return s;
}

std::vector<Sample> load_manifest(const std::filesystem::path& path) {
  std::vector<Sample> out;
  std::set<std::string> ids;
  for (const auto& [lineno, rec] : io::read_jsonl(path)) {
    try {
      out.push_back(sample_from_json(rec));
    } catch (const Error& e) {
      fail(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (!ids.insert(out.back().id).second) {
      fail(ErrorCode::kValue, path.string() + ":" + std::to_string(lineno) +
                                  ": duplicate sample id " + out.back().id);
    }
  }
  return out;
}

ResponseRecord response_from_json(const json& rec) {
  if (!rec.is_object()) fail(ErrorCode::kFormat, "response record must be a JSON object");
  ResponseRecord r;
  r.id = string_field(rec, {"id", "sample_id"});
  if (r.id.empty()) fail(ErrorCode::kFormat, "response record without id");
  r.mode = parse_mode(string_field(rec, {"mode"}));
  if (!rec.contains("completion") || !rec["completion"].is_string()) {
    fail(ErrorCode::kFormat, "response " + r.id + ": completion must be a string");
  }
  r.completion = rec["completion"].get<std::string>();
  if (rec.contains("usage") && !rec["usage"].is_null()) {
    const auto& u = rec["usage"];
    if (u.is_number_integer()) {
      r.completion_tokens = u.get<long>();
    } else if (u.is_object() && u.contains("completion_tokens")) {
      r.completion_tokens = u["completion_tokens"].get<long>();
    } else {
      fail(ErrorCode::kFormat, "response " + r.id + ": usage must be a token count");
    }
  }
  return r;
}

std::vector<ResponseRecord> load_responses(const std::filesystem::path& path) {
  std::vector<ResponseRecord> out;
  for (const auto& [lineno, rec] : io::read_jsonl(path)) {
    try {
      out.push_back(response_from_json(rec));
    } catch (const Error& e) {
      fail(e.code(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::optional<char> extract_choice(std::string_view completion) {
  static const std::regex kAnswer(R"(answer\s*:\s*[\s*(\[{$]*(?:\\boxed\{)?([a-d])(?![a-z0-9]))",
                                  std::regex::icase | std::regex::ECMAScript);
  std::optional<char> found;
  const std::string text(completion);
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kAnswer);
       it != std::sregex_iterator(); ++it) {
    found = static_cast<char>(std::toupper(static_cast<unsigned char>((*it)[1].str()[0])));
  }
  if (found) return found;

  const auto lines = split_lines(completion);
  auto last = std::find_if(lines.rbegin(), lines.rend(),
                           [](std::string_view l) { return !trim(l).empty(); });
  if (last == lines.rend()) return std::nullopt;
  const std::string_view line = *last;
  auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
  for (std::size_t k = line.size(); k-- > 0;) {
    const char c = line[k];
    if (c < 'A' || c > 'D') continue;
    if (k > 0 && alnum(line[k - 1])) continue;
    if (k + 1 < line.size() && alnum(line[k + 1])) continue;
    return c;
  }
  return std::nullopt;
}

std::string extract_final_answer(std::string_view completion) {
  static const std::regex kMarker(R"(answer\s*:)", std::regex::icase);
  const auto lines = split_lines(completion);
  for (std::size_t k = lines.size(); k-- > 0;) {
    const std::string line(lines[k]);
    std::smatch last_match;
    bool hit = false;
    for (auto it = std::sregex_iterator(line.begin(), line.end(), kMarker);
         it != std::sregex_iterator(); ++it) {
      last_match = *it;
      hit = true;
    }
    if (!hit) continue;
    std::string rest = trim(line.substr(static_cast<std::size_t>(last_match.position(0) +
                                                                 last_match.length(0))));
    if (rest.empty()) {
      for (std::size_t n = k + 1; n < lines.size(); ++n) {
        if (!trim(lines[n]).empty()) {
          rest = trim(lines[n]);
          break;
        }
      }
    }
    while (!rest.empty() && rest.front() == '*') rest.erase(rest.begin());
    while (!rest.empty() && rest.back() == '*') rest.pop_back();
    return trim(rest);
  }
  for (std::size_t k = lines.size(); k-- > 0;) {
    if (auto t = trim(lines[k]); !t.empty()) return t;
  }
  return {};
}

bool normalized_match(std::string_view candidate, std::string_view gold) {
  auto norm = [](std::string_view s) {
    std::string out;
    bool space = false;
    for (char raw : s) {
      const auto c = static_cast<unsigned char>(raw);
      if (std::isalnum(c) || c >= 0x80 || c == '.' || c == '%' || c == '-') {
        if (space && !out.empty()) out.push_back(' ');
        space = false;
        out.push_back(static_cast<char>(std::tolower(c)));
      } else {
        space = true;
      }
    }
    while (!out.empty() && (out.back() == '.' || out.back() == ' ')) out.pop_back();
    return out;
  };
  const auto a = norm(candidate);
  return !a.empty() && a == norm(gold);
}

FreeFormScorer exact_match_scorer() {
  return [](const Sample& s, std::string_view candidate) {
    FreeFormVerdict v;
    v.correct = normalized_match(candidate, s.answer);
    v.detail = "normalized-exact-match";
    return v;
  };
}

std::string type_count_bucket(std::size_t n) {
  return n > 3 ? ">3" : std::to_string(n);
}

MetricReport score_run(std::span<const Sample> samples, std::span<const ResponseRecord> responses,
                       const ScoreOptions& options) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (std::size_t i = 0; i < samples.size(); ++i) by_id.emplace(samples[i].id, i);

  std::set<std::pair<std::string, Mode>> seen;
  std::vector<const ResponseRecord*> chosen(samples.size(), nullptr);
  for (const auto& r : responses) {
    const auto it = by_id.find(r.id);
    if (it == by_id.end()) fail(ErrorCode::kUnknownSample, "response for unknown sample " + r.id);
    if (!seen.emplace(r.id, r.mode).second) {
      fail(ErrorCode::kDuplicateResponse, "second " + std::string(to_string(r.mode)) +
                                              " response for sample " + r.id);
    }
    if (r.mode == options.mode) chosen[it->second] = &r;
  }

  // Free-form verdicts first; they may run concurrently.
  std::vector<std::size_t> free_form;
  std::vector<std::string> candidates(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].subset == Subset::kReal && chosen[i]) {
      if (!options.free_form) {
        fail(ErrorCode::kInvalidArgument, "free-form samples present but no scorer configured");
      }
      candidates[i] = extract_final_answer(chosen[i]->completion);
      free_form.push_back(i);
    }
  }
  std::vector<FreeFormVerdict> verdicts(samples.size());
  {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t k = next++; k < free_form.size(); k = next++) {
        const std::size_t i = free_form[k];
        try {
          verdicts[i] = options.free_form(samples[i], candidates[i]);
        } catch (const std::exception& e) {
          verdicts[i] = {FreeFormVerdict::Status::kTransportError, false, 0, e.what()};
        }
      }
    };
    const std::size_t n = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(1, free_form.size()));
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }

  MetricReport rep;
  rep.mode = options.mode;
  double token_sum = 0.0;
  std::size_t token_n = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Sample& s = samples[i];
    const ResponseRecord* r = chosen[i];
    bool correct = false;
    if (!r) {
      ++rep.missing;
    } else {
      if (r->completion_tokens) {
        token_sum += static_cast<double>(*r->completion_tokens);
        ++token_n;
      }
      if (s.subset == Subset::kGen) {
        const auto choice = extract_choice(r->completion);
        if (!choice) ++rep.unparsed;
        correct = choice && *choice == s.answer[0];
      } else {
        const auto& v = verdicts[i];
        rep.judge_retries += static_cast<std::size_t>(v.retries);
        if (v.status != FreeFormVerdict::Status::kScored) {
          rep.judge_excluded.push_back(s.id);
          continue;
        }
        correct = v.correct;
      }
    }
    auto add = [&](Bucket& b) {
      ++b.total;
      if (correct) ++b.correct;
    };
    add(rep.overall);
    add(rep.by_subset[std::string(to_string(s.subset))]);
    if (s.subset == Subset::kGen) {
      add(rep.gen_by_type_count[type_count_bucket(s.reasoning_tags.size())]);
      for (const auto& t : s.reasoning_tags) add(rep.gen_by_tag[t]);
      if (s.layout) add(rep.by_layout[*s.layout]);
      if (s.font) add(rep.by_font[*s.font]);
    } else {
      for (const auto& t : s.reasoning_tags) add(rep.real_by_tag[t]);
    }
  }
  std::sort(rep.judge_excluded.begin(), rep.judge_excluded.end());
  if (token_n) rep.mean_completion_tokens = token_sum / static_cast<double>(token_n);
  return rep;
}

namespace {

ojson bucket_json(const Bucket& b) {
  ojson j;
  j["correct"] = b.correct;
  j["total"] = b.total;
  j["accuracy"] = b.total ? ojson(b.accuracy()) : ojson(nullptr);
  return j;
}

ojson bucket_map_json(const std::map<std::string, Bucket>& m) {
  ojson j = ojson::object();
  for (const auto& [k, b] : m) j[k] = bucket_json(b);
  return j;
}

}  // namespace

ojson report_to_json(const MetricReport& r) {
  ojson j;
  j["mode"] = to_string(r.mode);
  j["overall"] = bucket_json(r.overall);
  j["by_subset"] = bucket_map_json(r.by_subset);
  // Fixed Tab.-style order for the reasoning-type-count view.
  ojson tc = ojson::object();
  for (const char* k : {"0", "1", "2", "3", ">3"}) {
    if (auto it = r.gen_by_type_count.find(k); it != r.gen_by_type_count.end()) {
      tc[k] = bucket_json(it->second);
    }
  }
  j["gen_by_type_count"] = std::move(tc);
  j["gen_by_tag"] = bucket_map_json(r.gen_by_tag);
  j["real_by_tag"] = bucket_map_json(r.real_by_tag);
  j["by_layout"] = bucket_map_json(r.by_layout);
  j["by_font"] = bucket_map_json(r.by_font);
  j["unparsed"] = r.unparsed;
  j["missing"] = r.missing;
  j["judge_excluded_count"] = r.judge_excluded.size();
  j["judge_excluded"] = r.judge_excluded;
  j["judge_retries"] = r.judge_retries;
  j["mean_completion_tokens"] =
      r.mean_completion_tokens ? ojson(*r.mean_completion_tokens) : ojson(nullptr);
  return j;
}

std::array<double, 4> answer_distribution(std::span<const Sample> samples) {
  std::array<std::size_t, 4> counts{};
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (s.subset != Subset::kGen) continue;
    ++counts[static_cast<std::size_t>(s.answer[0] - 'A')];
    ++n;
  }
  if (n == 0) fail(ErrorCode::kEmptyInput, "answer distribution needs Gen samples");
  std::array<double, 4> out{};
  for (std::size_t k = 0; k < 4; ++k) out[k] = static_cast<double>(counts[k]) / static_cast<double>(n);
  return out;
}

std::size_t word_count(const Sample& s) {
  auto count = [](std::string_view text) {
    std::size_t n = 0;
    bool in_word = false;
    for (char c : text) {
      const bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
      if (!ws && !in_word) ++n;
      in_word = !ws;
    }
    return n;
  };
  std::size_t n = count(s.context) + count(s.question);
  for (const auto& o : s.options) n += count(o);
  return n;
}

ManifestStats manifest_stats(std::span<const Sample> samples) {
  ManifestStats st;
  st.total = samples.size();
  std::size_t words = 0;
  bool any_gen = false;
  for (const auto& s : samples) {
    const std::string subset(to_string(s.subset));
    ++st.per_subset[subset];
    words += word_count(s);
    if (s.layout) ++st.layout_counts[*s.layout];
    if (s.font) ++st.font_counts[*s.font];
    for (const auto& t : s.reasoning_tags) ++st.tag_counts[subset + "/" + t];
    if (s.subset == Subset::kGen) {
      any_gen = true;
      ++st.type_count_counts[type_count_bucket(s.reasoning_tags.size())];
    }
  }
  if (st.total) st.average_words = static_cast<double>(words) / static_cast<double>(st.total);
  if (any_gen) st.answer_distribution = answer_distribution(samples);
  return st;
}

ojson stats_to_json(const ManifestStats& st) {
  auto frac = [](std::size_t part, std::size_t whole) {
    return whole ? static_cast<double>(part) / static_cast<double>(whole) : 0.0;
  };
  auto share_map = [&](const std::map<std::string, std::size_t>& m) {
    std::size_t whole = 0;
    for (const auto& [k, v] : m) whole += v;
    ojson j = ojson::object();
    for (const auto& [k, v] : m) j[k] = {{"count", v}, {"fraction", frac(v, whole)}};
    return j;
  };
  ojson j;
  j["total"] = st.total;
  j["per_subset"] = st.per_subset;
  j["average_words"] = st.average_words;
  j["layout"] = share_map(st.layout_counts);
  j["font"] = share_map(st.font_counts);
  // Tag coverage is relative to the subset size; a sample may carry several tags.
  ojson tags = ojson::object();
  for (const auto& [k, v] : st.tag_counts) {
    const auto subset = k.substr(0, k.find('/'));
    const auto it = st.per_subset.find(subset);
    tags[k] = {{"count", v}, {"coverage", frac(v, it == st.per_subset.end() ? 0 : it->second)}};
  }
  j["reasoning_tags"] = std::move(tags);
  j["gen_type_count"] = share_map(st.type_count_counts);
  if (st.answer_distribution) {
    const auto& d = *st.answer_distribution;
    j["answer_distribution"] = {{"A", d[0]}, {"B", d[1]}, {"C", d[2]}, {"D", d[3]}};
  } else {
    j["answer_distribution"] = nullptr;
  }
  return j;
}

}  // namespace textcue::eval
