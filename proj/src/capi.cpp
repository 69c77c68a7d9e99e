#include "textcue/textcue.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <unordered_map>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "textcue/attention.hpp"
#include "textcue/box_refine.hpp"
#include "textcue/crop_pipeline.hpp"
#include "textcue/dedup.hpp"
#include "textcue/error.hpp"
#include "textcue/eval.hpp"
#include "textcue/image.hpp"
#include "textcue/io.hpp"
#include "textcue/judge.hpp"
#include "textcue/ocr_metrics.hpp"
#include "textcue/prompts.hpp"

struct tc_dump {
  textcue::AttentionDump value;
};
struct tc_words {
  std::vector<textcue::WordBox> value;
};
struct tc_image {
  textcue::Image value;
};
struct tc_manifest {
  std::vector<textcue::eval::Sample> value;
};
struct tc_embeddings {
  textcue::EmbeddingSet value;
};

namespace {

using namespace textcue;
using nlohmann::json;
using ojson = nlohmann::ordered_json;

thread_local std::string g_last_error;

template <typename Fn>
int guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return TC_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed JSON input: ") + e.what();
    return TC_ERR_FORMAT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return TC_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TC_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return TC_ERR_INTERNAL;
  }
}

void require(bool cond, const char* what) {
  if (!cond) fail(ErrorCode::kInvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

tc_box to_c(const BoxPx& b) { return {b.x0, b.y0, b.x1, b.y1}; }
BoxPx from_c(const tc_box& b) { return {b.x0, b.y0, b.x1, b.y1}; }

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

std::shared_ptr<judge::Client> make_judge(const tc_judge_options& o) {
  require(o.url && *o.url, "judge URL is required");
  std::string key = o.api_key ? o.api_key : env_or_empty(judge::kApiKeyEnv);
  if (key.empty() && !o.api_key) key = env_or_empty("OPENAI_API_KEY");
  judge::Config cfg;
  if (o.model && *o.model) cfg.model = o.model;
  if (o.max_retries >= 0) cfg.max_retries = o.max_retries;
  const auto timeout = std::chrono::seconds(o.timeout_s ? o.timeout_s : 60);
  return std::make_shared<judge::Client>(
      cfg, std::make_shared<judge::HttpTransport>(o.url, key, timeout));
}

eval::FreeFormVerdict::Status parse_status(const std::string& s) {
  if (s == "scored") return eval::FreeFormVerdict::Status::kScored;
  if (s == "parse_error") return eval::FreeFormVerdict::Status::kParseError;
  if (s == "transport_error") return eval::FreeFormVerdict::Status::kTransportError;
  fail(ErrorCode::kFormat, "unknown verdict status '" + s + "'");
}

std::string_view status_string(eval::FreeFormVerdict::Status s) {
  switch (s) {
    case eval::FreeFormVerdict::Status::kScored: return "scored";
    case eval::FreeFormVerdict::Status::kParseError: return "parse_error";
    case eval::FreeFormVerdict::Status::kTransportError: return "transport_error";
  }
  return "scored";
}

// Scorer replaying verdict JSON Lines written by tc_judge_run.
eval::FreeFormScorer verdict_file_scorer(const std::string& path, eval::Mode mode) {
  auto table = std::make_shared<std::unordered_map<std::string, eval::FreeFormVerdict>>();
  for (const auto& [lineno, rec] : io::read_jsonl(path)) {
    if (eval::parse_mode(rec.at("mode").get<std::string>()) != mode) continue;
    eval::FreeFormVerdict v;
    v.status = parse_status(rec.at("status").get<std::string>());
    v.correct = rec.value("correct", false);
    v.retries = rec.value("retries", 0);
    v.detail = "verdict-file";
    const std::string id = rec.at("id").is_string() ? rec["id"].get<std::string>() : rec["id"].dump();
    if (!table->emplace(id, v).second) {
      fail(ErrorCode::kDuplicateResponse, path + ": second verdict for sample " + id);
    }
  }
  return [table](const eval::Sample& s, std::string_view) {
    if (auto it = table->find(s.id); it != table->end()) return it->second;
    eval::FreeFormVerdict missing;
    missing.status = eval::FreeFormVerdict::Status::kTransportError;
    missing.detail = "no verdict recorded";
    return missing;
  };
}

std::map<std::string, std::string> text_by_id(const std::string& path,
                                              std::vector<std::string>* order) {
  std::map<std::string, std::string> out;
  for (const auto& [lineno, rec] : io::read_jsonl(path)) {
    const std::string where = path + ":" + std::to_string(lineno);
    if (!rec.is_object() || !rec.contains("id") || !rec.contains("text") ||
        !rec["text"].is_string()) {
      fail(ErrorCode::kFormat, where + ": expected {\"id\": ..., \"text\": ...}");
    }
    const std::string id = rec["id"].is_string() ? rec["id"].get<std::string>() : rec["id"].dump();
    if (!out.emplace(id, rec["text"].get<std::string>()).second) {
      fail(ErrorCode::kValue, where + ": duplicate id " + id);
    }
    if (order) order->push_back(id);
  }
  return out;
}

}  // namespace

extern "C" {

const char* tc_version(void) { return "0.1.0"; }

const char* tc_status_name(int status) {
  if (status == TC_OK) return "OK";
  if (status == TC_ERR_INTERNAL) return "InternalError";
  if (status >= 1 && status <= 15) {
    return error_code_name(static_cast<ErrorCode>(status)).data();
  }
  return "UnknownStatus";
}

const char* tc_last_error(void) { return g_last_error.c_str(); }

void tc_string_free(char* s) { std::free(s); }

void tc_set_log_level(int level) {
  spdlog::set_level(static_cast<spdlog::level::level_enum>(std::clamp(level, 0, 6)));
}

int tc_dump_load(const char* path, tc_dump** out) {
  return guarded([&] {
    require(path && out, "path and out must be non-null");
    *out = nullptr;
    auto d = std::make_unique<tc_dump>();
    d->value = load_dump(path);
    *out = d.release();
  });
}

int tc_dump_create(uint32_t layers, uint32_t tokens, const tc_geometry* g,
                   const float* attn_question, const float* attn_generic, const char* metadata,
                   tc_dump** out) {
  return guarded([&] {
    require(g && attn_question && attn_generic && out, "arguments must be non-null");
    *out = nullptr;
    auto d = std::make_unique<tc_dump>();
    AttentionDump& v = d->value;
    v.layers = layers;
    v.tokens = tokens;
    v.geometry = {g->grid_h, g->grid_w, g->proc_w, g->proc_h, g->orig_w, g->orig_h, g->patch_px};
    const std::size_t n = static_cast<std::size_t>(layers) * tokens;
    v.attn_question.assign(attn_question, attn_question + n);
    v.attn_generic.assign(attn_generic, attn_generic + n);
    if (metadata) v.metadata = metadata;
    validate_dump(v);
    *out = d.release();
  });
}

int tc_dump_save(const tc_dump* dump, const char* path) {
  return guarded([&] {
    require(dump && path, "dump and path must be non-null");
    save_dump(dump->value, path);
  });
}

int tc_dump_info_get(const tc_dump* dump, tc_dump_info* out) {
  return guarded([&] {
    require(dump && out, "dump and out must be non-null");
    const auto& g = dump->value.geometry;
    *out = {dump->value.layers,
            dump->value.tokens,
            {g.grid_h, g.grid_w, g.proc_w, g.proc_h, g.orig_w, g.orig_h, g.patch_px}};
  });
}

void tc_dump_free(tc_dump* dump) { delete dump; }

int tc_words_load(const char* path, double image_w, double image_h, tc_words** out) {
  return guarded([&] {
    require(path && out, "path and out must be non-null");
    *out = nullptr;
    auto w = std::make_unique<tc_words>();
    w->value = load_word_boxes(path, image_w, image_h);
    *out = w.release();
  });
}

size_t tc_words_count(const tc_words* words) { return words ? words->value.size() : 0; }

void tc_words_free(tc_words* words) { delete words; }

void tc_crop_options_default(tc_crop_options* o) {
  if (!o) return;
  o->layer_start = static_cast<uint32_t>(kDefaultLayerStart);
  o->layer_count = static_cast<uint32_t>(kDefaultLayerCount);
  o->epsilon = kDefaultEpsilon;
  o->enlarge = kDefaultEnlarge;
}

int tc_crop(const tc_dump* dump, const tc_words* words, const tc_crop_options* options,
            tc_crop_plan* plan, char** json_out) {
  return guarded([&] {
    require(dump != nullptr, "dump must be non-null");
    if (json_out) *json_out = nullptr;
    CropOptions opts;
    if (options) {
      opts.layer_start = options->layer_start;
      opts.layer_count = options->layer_count;
      opts.epsilon = options->epsilon;
      opts.enlarge = options->enlarge;
    }
    std::optional<std::vector<WordBox>> w;
    if (words) w = words->value;
    const auto result = run_crop_pipeline(dump->value, w, opts);
    if (plan) {
      plan->rough = to_c(result.plan.rough);
      plan->refined = to_c(result.plan.refined);
      plan->enlarge = result.plan.enlarge;
      plan->out_w = result.plan.out_w;
      plan->out_h = result.plan.out_h;
      plan->chosen_layer = static_cast<uint32_t>(result.selection.chosen);
      plan->fallback = result.refinement.fallback ? 1 : 0;
    }
    if (json_out) *json_out = dup_string(crop_result_json(result, dump->value.metadata));
  });
}

int tc_iou(const tc_box* a, const tc_box* b, double* out) {
  return guarded([&] {
    require(a && b && out, "arguments must be non-null");
    *out = iou(from_c(*a), from_c(*b));
  });
}

int tc_image_load(const char* path, tc_image** out) {
  return guarded([&] {
    require(path && out, "path and out must be non-null");
    *out = nullptr;
    auto img = std::make_unique<tc_image>();
    img->value = load_image(path);
    *out = img.release();
  });
}

int tc_image_create(size_t width, size_t height, size_t channels, const uint8_t* pixels,
                    tc_image** out) {
  return guarded([&] {
    require(pixels && out, "pixels and out must be non-null");
    require(width > 0 && height > 0 && channels >= 1 && channels <= 4, "bad image dimensions");
    *out = nullptr;
    auto img = std::make_unique<tc_image>();
    img->value = {width, height, channels,
                  std::vector<uint8_t>(pixels, pixels + width * height * channels)};
    *out = img.release();
  });
}

int tc_image_save(const tc_image* image, const char* path) {
  return guarded([&] {
    require(image && path, "image and path must be non-null");
    save_image(image->value, path);
  });
}

int tc_image_rotate(const tc_image* image, int degrees, tc_image** out) {
  return guarded([&] {
    require(image && out, "image and out must be non-null");
    *out = nullptr;
    auto img = std::make_unique<tc_image>();
    img->value = rotate_clockwise(image->value, degrees);
    *out = img.release();
  });
}

int tc_image_draw_box(tc_image* image, const tc_box* box, uint8_t r, uint8_t g, uint8_t b) {
  return guarded([&] {
    require(image && box, "image and box must be non-null");
    draw_box(image->value, from_c(*box), {r, g, b});
  });
}

void tc_image_dims(const tc_image* image, size_t* width, size_t* height, size_t* channels) {
  if (!image) return;
  if (width) *width = image->value.width;
  if (height) *height = image->value.height;
  if (channels) *channels = image->value.channels;
}

const uint8_t* tc_image_data(const tc_image* image) {
  return image ? image->value.pixels.data() : nullptr;
}

void tc_image_free(tc_image* image) { delete image; }

int tc_edit_distance_norm(const char* prediction, const char* reference, double* out) {
  return guarded([&] {
    require(prediction && reference && out, "arguments must be non-null");
    *out = ocr::edit_distance_norm(prediction, reference);
  });
}

int tc_word_prf(const char* prediction, const char* reference, tc_prf* out) {
  return guarded([&] {
    require(prediction && reference && out, "arguments must be non-null");
    const auto prf = ocr::word_prf(prediction, reference);
    *out = {prf.precision, prf.recall, prf.f1};
  });
}

int tc_meteor(const char* prediction, const char* reference, double* out) {
  return guarded([&] {
    require(prediction && reference && out, "arguments must be non-null");
    *out = ocr::meteor(prediction, reference);
  });
}

int tc_bleu(const char* const* predictions, const char* const* references, size_t n, double* out) {
  return guarded([&] {
    require(out && (n == 0 || (predictions && references)), "arguments must be non-null");
    std::vector<ocr::TextPair> corpus;
    for (size_t i = 0; i < n; ++i) {
      require(predictions[i] && references[i], "corpus strings must be non-null");
      corpus.push_back({predictions[i], references[i]});
    }
    *out = ocr::bleu(corpus);
  });
}

int tc_ocr_eval_files(const char* predictions_path, const char* references_path, char** json_out) {
  return guarded([&] {
    require(predictions_path && references_path && json_out, "arguments must be non-null");
    *json_out = nullptr;
    std::vector<std::string> order;
    const auto refs = text_by_id(references_path, &order);
    const auto preds = text_by_id(predictions_path, nullptr);
    std::vector<ocr::TextPair> corpus;
    std::size_t missing = 0;
    for (const auto& id : order) {
      auto it = preds.find(id);
      if (it == preds.end()) ++missing;
      corpus.push_back({it == preds.end() ? std::string() : it->second, refs.at(id)});
    }
    for (const auto& [id, text] : preds) {
      if (!refs.count(id)) fail(ErrorCode::kUnknownSample, "prediction for unknown id " + id);
    }
    const auto rep = ocr::ocr_report(corpus);
    ojson j;
    j["count"] = rep.count;
    j["missing_predictions"] = missing;
    j["edit_distance"] = rep.edit_distance;
    j["f1"] = rep.f1;
    j["precision"] = rep.precision;
    j["recall"] = rep.recall;
    j["bleu"] = rep.bleu;
    j["meteor"] = rep.meteor;
    *json_out = dup_string(j.dump(2) + "\n");
  });
}

int tc_manifest_load(const char* path, tc_manifest** out) {
  return guarded([&] {
    require(path && out, "path and out must be non-null");
    *out = nullptr;
    auto m = std::make_unique<tc_manifest>();
    m->value = eval::load_manifest(path);
    *out = m.release();
  });
}

size_t tc_manifest_size(const tc_manifest* manifest) {
  return manifest ? manifest->value.size() : 0;
}

void tc_manifest_free(tc_manifest* manifest) { delete manifest; }

int tc_manifest_stats(const tc_manifest* manifest, char** json_out) {
  return guarded([&] {
    require(manifest && json_out, "arguments must be non-null");
    *json_out = nullptr;
    *json_out = dup_string(eval::stats_to_json(eval::manifest_stats(manifest->value)).dump(2) + "\n");
  });
}

int tc_answer_distribution(const tc_manifest* manifest, double out[4]) {
  return guarded([&] {
    require(manifest && out, "arguments must be non-null");
    const auto d = eval::answer_distribution(manifest->value);
    std::copy(d.begin(), d.end(), out);
  });
}

int tc_extract_choice(const char* completion, char* letter) {
  return guarded([&] {
    require(completion && letter, "arguments must be non-null");
    const auto c = eval::extract_choice(completion);
    *letter = c ? *c : '\0';
  });
}

int tc_eval_run(const tc_manifest* manifest, const char* responses_path,
                const tc_eval_options* options, char** json_out) {
  return guarded([&] {
    require(manifest && responses_path && options && json_out, "arguments must be non-null");
    *json_out = nullptr;
    eval::ScoreOptions so;
    so.mode = eval::parse_mode(options->mode ? options->mode : "");
    so.workers = options->workers ? options->workers : 1;
    std::shared_ptr<judge::Client> client;
    std::string scorer_name;
    if (options->judge) {
      client = make_judge(*options->judge);
      so.free_form = client->scorer();
      scorer_name = "judge";
    } else if (options->verdicts_path) {
      so.free_form = verdict_file_scorer(options->verdicts_path, so.mode);
      scorer_name = "verdicts";
    } else {
      so.free_form = eval::exact_match_scorer();
      scorer_name = "normalized-exact-match";
    }
    const auto responses = eval::load_responses(responses_path);
    const auto report = eval::score_run(manifest->value, responses, so);
    auto j = eval::report_to_json(report);
    ojson run;
    run["responses"] = responses_path;
    run["samples"] = manifest->value.size();
    run["free_form_scorer"] = scorer_name;
    if (options->judge) {
      run["judge_model"] = options->judge->model ? options->judge->model : "gpt-4o-mini";
    }
    if (options->verdicts_path) run["verdicts"] = options->verdicts_path;
    run["version"] = tc_version();
    j["run"] = std::move(run);
    *json_out = dup_string(j.dump(2) + "\n");
  });
}

int tc_judge_run(const tc_manifest* manifest, const char* responses_path,
                 const tc_eval_options* options, char** jsonl) {
  return guarded([&] {
    require(manifest && responses_path && options && jsonl, "arguments must be non-null");
    require(options->judge != nullptr, "judge options are required");
    *jsonl = nullptr;
    const auto mode = eval::parse_mode(options->mode ? options->mode : "");
    const auto client = make_judge(*options->judge);

    // Collect the verdicts through score_run so ordering, validation and the
    // worker cap are shared with tc_eval_run.
    std::mutex mu;
    std::map<std::string, std::pair<eval::FreeFormVerdict, std::string>> verdicts;
    eval::ScoreOptions so;
    so.mode = mode;
    so.workers = options->workers ? options->workers : 1;
    so.free_form = [&](const eval::Sample& s, std::string_view candidate) {
      auto v = client->judge(s, candidate);
      std::lock_guard lock(mu);
      verdicts[s.id] = {v, std::string(candidate)};
      return v;
    };
    const auto responses = eval::load_responses(responses_path);
    (void)eval::score_run(manifest->value, responses, so);

    std::string out;
    for (const auto& [id, entry] : verdicts) {
      const auto& [v, candidate] = entry;
      ojson rec;
      rec["id"] = id;
      rec["mode"] = eval::to_string(mode);
      rec["status"] = status_string(v.status);
      rec["correct"] = v.correct;
      rec["retries"] = v.retries;
      rec["candidate"] = candidate;
      rec["judge_reply"] = v.detail;
      out += rec.dump() + "\n";
    }
    *jsonl = dup_string(out);
  });
}

int tc_embeddings_load(const char* vectors_path, const char* ids_path, tc_embeddings** out) {
  return guarded([&] {
    require(vectors_path && ids_path && out, "arguments must be non-null");
    *out = nullptr;
    auto e = std::make_unique<tc_embeddings>();
    e->value = load_embeddings(vectors_path, ids_path);
    *out = e.release();
  });
}

size_t tc_embeddings_size(const tc_embeddings* embeddings) {
  return embeddings ? embeddings->value.size() : 0;
}

void tc_embeddings_free(tc_embeddings* embeddings) { delete embeddings; }

int tc_dedup(const tc_embeddings* embeddings, double threshold, char** json_out) {
  return guarded([&] {
    require(embeddings && json_out, "arguments must be non-null");
    *json_out = nullptr;
    const auto res = dedup(embeddings->value, threshold);
    *json_out = dup_string(dedup_json(embeddings->value, res, threshold));
  });
}

const char* tc_prompt_get(const char* key) {
  if (!key) return nullptr;
  const auto t = prompts::get(key);
  return t ? t->data() : nullptr;
}

size_t tc_prompt_count(void) { return prompts::keys().size(); }

const char* tc_prompt_key(size_t index) {
  const auto keys = prompts::keys();
  return index < keys.size() ? keys[index].data() : nullptr;
}

int tc_prompt_render(const char* key, const char* values_json, char** out) {
  return guarded([&] {
    require(key && out, "key and out must be non-null");
    *out = nullptr;
    const auto tmpl = prompts::get(key);
    if (!tmpl) fail(ErrorCode::kInvalidArgument, std::string("unknown prompt key ") + key);
    std::map<std::string, std::string> values;
    if (values_json && *values_json) {
      const auto j = json::parse(values_json);
      if (!j.is_object()) fail(ErrorCode::kFormat, "prompt values must be a JSON object");
      for (const auto& [k, v] : j.items()) {
        if (k == "options" && v.is_array()) {
          values[k] = prompts::format_options(v.get<std::vector<std::string>>());
        } else {
          values[k] = v.is_string() ? v.get<std::string>() : v.dump();
        }
      }
    }
    *out = dup_string(prompts::render(*tmpl, values));
  });
}

}  // extern "C"
