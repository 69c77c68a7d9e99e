// textcue command line front end. Links only the C API.
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "textcue/textcue.h"

namespace fs = std::filesystem;

namespace {

constexpr int kUsage = 64;

// Non-zero status from a C call, carrying its message.
struct Failure {
  int status;
  std::string message;
};

void check(int status) {
  if (status != TC_OK) throw Failure{status, tc_last_error()};
}

void require_file(const std::string& path, const char* what) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Failure{TC_ERR_IO, std::string(what) + " not found: " + path};
  }
}

template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using DumpPtr = std::unique_ptr<tc_dump, Deleter<tc_dump, tc_dump_free>>;
using WordsPtr = std::unique_ptr<tc_words, Deleter<tc_words, tc_words_free>>;
using ImagePtr = std::unique_ptr<tc_image, Deleter<tc_image, tc_image_free>>;
using ManifestPtr = std::unique_ptr<tc_manifest, Deleter<tc_manifest, tc_manifest_free>>;
using EmbeddingsPtr = std::unique_ptr<tc_embeddings, Deleter<tc_embeddings, tc_embeddings_free>>;
using StringPtr = std::unique_ptr<char, Deleter<char, tc_string_free>>;

void write_atomic(const fs::path& path, const std::string& data) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Failure{TC_ERR_IO, "cannot write " + tmp.string()};
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Failure{TC_ERR_IO, "cannot rename onto " + path.string()};
  }
}

void emit(const std::string& out_path, const char* text) {
  if (out_path.empty()) {
    std::fwrite(text, 1, std::strlen(text), stdout);
    std::fflush(stdout);
  } else {
    write_atomic(out_path, text);
  }
}

struct CropArgs {
  std::string dump, words, out, overlay_image, overlay_out;
  uint32_t m = 22;
  uint32_t n = 5;
  double epsilon = 1e-12;
  double enlarge = 1.5;
};

void run_crop(const CropArgs& a) {
  require_file(a.dump, "attention dump");
  if (!a.words.empty()) require_file(a.words, "words file");
  if (a.overlay_image.empty() != a.overlay_out.empty()) {
    throw Failure{TC_ERR_INVALID_ARGUMENT, "--overlay-image and --overlay-out go together"};
  }
  if (!a.overlay_image.empty()) require_file(a.overlay_image, "overlay image");

  tc_dump* d = nullptr;
  check(tc_dump_load(a.dump.c_str(), &d));
  DumpPtr dump(d);
  tc_dump_info info{};
  check(tc_dump_info_get(dump.get(), &info));

  WordsPtr words;
  if (!a.words.empty()) {
    tc_words* w = nullptr;
    check(tc_words_load(a.words.c_str(), info.geometry.orig_w, info.geometry.orig_h, &w));
    words.reset(w);
  }

  tc_crop_options opts{a.m, a.n, a.epsilon, a.enlarge};
  tc_crop_plan plan{};
  char* json = nullptr;
  check(tc_crop(dump.get(), words.get(), &opts, &plan, &json));
  StringPtr text(json);

  if (!a.overlay_image.empty()) {
    tc_image* raw = nullptr;
    check(tc_image_load(a.overlay_image.c_str(), &raw));
    ImagePtr img(raw);
    size_t w = 0, h = 0;
    tc_image_dims(img.get(), &w, &h, nullptr);
    if (w != info.geometry.orig_w || h != info.geometry.orig_h) {
      throw Failure{TC_ERR_SHAPE, "overlay image is " + std::to_string(w) + "x" +
                                      std::to_string(h) + ", dump expects " +
                                      std::to_string(info.geometry.orig_w) + "x" +
                                      std::to_string(info.geometry.orig_h)};
    }
    check(tc_image_draw_box(img.get(), &plan.rough, 255, 64, 0));
    check(tc_image_draw_box(img.get(), &plan.refined, 0, 200, 0));
    check(tc_image_save(img.get(), a.overlay_out.c_str()));
  }
  emit(a.out, text.get());
}

struct EvalArgs {
  std::string manifest, responses, out, mode = "cot", judge_url, judge_model, verdicts;
  size_t workers = 4;
  int max_retries = 3;
  uint32_t timeout_s = 60;
};

void run_eval(const EvalArgs& a, bool judge_only) {
  require_file(a.manifest, "manifest");
  require_file(a.responses, "responses file");
  if (!a.verdicts.empty()) require_file(a.verdicts, "verdicts file");
  if (!a.judge_url.empty() && !a.verdicts.empty()) {
    throw Failure{TC_ERR_INVALID_ARGUMENT, "--judge-url and --verdicts are exclusive"};
  }
  if (judge_only && a.judge_url.empty()) {
    throw Failure{TC_ERR_INVALID_ARGUMENT, "judge needs --judge-url"};
  }

  tc_manifest* m = nullptr;
  check(tc_manifest_load(a.manifest.c_str(), &m));
  ManifestPtr manifest(m);

  tc_judge_options judge{};
  judge.url = a.judge_url.c_str();
  judge.model = a.judge_model.empty() ? nullptr : a.judge_model.c_str();
  judge.max_retries = a.max_retries;
  judge.timeout_s = a.timeout_s;

  tc_eval_options opts{};
  opts.mode = a.mode.c_str();
  opts.workers = a.workers;
  opts.judge = a.judge_url.empty() ? nullptr : &judge;
  opts.verdicts_path = a.verdicts.empty() ? nullptr : a.verdicts.c_str();

  char* out = nullptr;
  if (judge_only) {
    check(tc_judge_run(manifest.get(), a.responses.c_str(), &opts, &out));
  } else {
    check(tc_eval_run(manifest.get(), a.responses.c_str(), &opts, &out));
  }
  StringPtr text(out);
  emit(a.out, text.get());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"textcue: attention-guided cropping and benchmark scoring"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tc_version()));
  int log_level = 3;
  uint64_t seed = 0;
  app.add_option("--log-level", log_level, "0 trace .. 6 off")->check(CLI::Range(0, 6));
  app.add_option("--seed", seed, "Accepted for reproducible runs; no subcommand samples");

  CropArgs crop;
  auto* c = app.add_subcommand("crop", "Plan a crop from an attention dump");
  c->add_option("dump", crop.dump, "Attention dump (.tcad)")->required();
  c->add_option("--words", crop.words, "OCR word boxes (JSON Lines)");
  c->add_option("--m", crop.m, "First layer of the selection window")->capture_default_str();
  c->add_option("--n", crop.n, "Layers in the selection window")->capture_default_str();
  c->add_option("--epsilon", crop.epsilon, "Denominator floor")->capture_default_str();
  c->add_option("--enlarge", crop.enlarge, "Magnification of the crop")->capture_default_str();
  c->add_option("--overlay-image", crop.overlay_image, "Image to draw the boxes on");
  c->add_option("--overlay-out", crop.overlay_out, "Where to write the overlay");
  c->add_option("--out", crop.out, "Plan JSON path (default stdout)");

  EvalArgs ev;
  auto add_eval_flags = [&](CLI::App* s) {
    s->add_option("manifest", ev.manifest, "Sample manifest (JSON Lines)")->required();
    s->add_option("responses", ev.responses, "Model responses (JSON Lines)")->required();
    s->add_option("--mode", ev.mode, "cot or direct")->capture_default_str();
    s->add_option("--judge-url", ev.judge_url, "Chat-completions endpoint");
    s->add_option("--judge-model", ev.judge_model, "Judge model name");
    s->add_option("--judge-retries", ev.max_retries, "Transport retries")->capture_default_str();
    s->add_option("--judge-timeout", ev.timeout_s, "Seconds per request")->capture_default_str();
    s->add_option("--workers", ev.workers, "Concurrent judge requests")->capture_default_str();
    s->add_option("--out", ev.out, "Output path (default stdout)");
  };
  auto* e = app.add_subcommand("eval", "Score responses against a manifest");
  add_eval_flags(e);
  e->add_option("--verdicts", ev.verdicts, "Verdicts written by the judge subcommand");
  auto* j = app.add_subcommand("judge", "Judge free-form responses, write verdict JSON Lines");
  add_eval_flags(j);

  std::string ocr_pred, ocr_ref, ocr_out;
  auto* o = app.add_subcommand("ocr", "OCR metrics over prediction/reference JSON Lines");
  o->add_option("predictions", ocr_pred)->required();
  o->add_option("references", ocr_ref)->required();
  o->add_option("--out", ocr_out, "Output path (default stdout)");

  std::string dd_vec, dd_ids, dd_out;
  double threshold = 0.95;
  auto* dd = app.add_subcommand("dedup", "Greedy near-duplicate filtering of embeddings");
  dd->add_option("vectors", dd_vec, "Embeddings (.tcem)")->required();
  dd->add_option("ids", dd_ids, "Id sidecar (JSON Lines)")->required();
  dd->add_option("--threshold", threshold, "Cosine similarity cut")->capture_default_str();
  dd->add_option("--out", dd_out, "Output path (default stdout)");

  std::string rot_in, rot_out;
  int degrees = 90;
  auto* r = app.add_subcommand("rotate", "Rotate an image clockwise");
  r->add_option("input", rot_in)->required();
  r->add_option("output", rot_out)->required();
  r->add_option("--deg", degrees, "90, 180 or 270")->capture_default_str();

  std::string st_manifest, st_out;
  auto* s = app.add_subcommand("stats", "Manifest statistics");
  s->add_option("manifest", st_manifest)->required();
  s->add_option("--out", st_out, "Output path (default stdout)");

  std::string pr_key, pr_values;
  bool pr_list = false;
  auto* p = app.add_subcommand("prompt", "Print a prompt template");
  p->add_option("key", pr_key, "Template key");
  p->add_option("--values", pr_values, "JSON object of placeholder values");
  p->add_flag("--list", pr_list, "List template keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return kUsage;
  }
  tc_set_log_level(log_level);

  try {
    if (c->parsed()) {
      run_crop(crop);
    } else if (e->parsed()) {
      run_eval(ev, false);
    } else if (j->parsed()) {
      run_eval(ev, true);
    } else if (o->parsed()) {
      require_file(ocr_pred, "predictions file");
      require_file(ocr_ref, "references file");
      char* out = nullptr;
      check(tc_ocr_eval_files(ocr_pred.c_str(), ocr_ref.c_str(), &out));
      StringPtr text(out);
      emit(ocr_out, text.get());
    } else if (dd->parsed()) {
      require_file(dd_vec, "embeddings file");
      require_file(dd_ids, "id file");
      tc_embeddings* raw = nullptr;
      check(tc_embeddings_load(dd_vec.c_str(), dd_ids.c_str(), &raw));
      EmbeddingsPtr emb(raw);
      char* out = nullptr;
      check(tc_dedup(emb.get(), threshold, &out));
      StringPtr text(out);
      emit(dd_out, text.get());
    } else if (r->parsed()) {
      require_file(rot_in, "input image");
      tc_image* raw = nullptr;
      check(tc_image_load(rot_in.c_str(), &raw));
      ImagePtr img(raw);
      tc_image* rotated = nullptr;
      check(tc_image_rotate(img.get(), degrees, &rotated));
      ImagePtr out(rotated);
      check(tc_image_save(out.get(), rot_out.c_str()));
    } else if (s->parsed()) {
      require_file(st_manifest, "manifest");
      tc_manifest* raw = nullptr;
      check(tc_manifest_load(st_manifest.c_str(), &raw));
      ManifestPtr m(raw);
      char* out = nullptr;
      check(tc_manifest_stats(m.get(), &out));
      StringPtr text(out);
      emit(st_out, text.get());
    } else if (p->parsed()) {
      if (pr_list) {
        for (size_t i = 0; i < tc_prompt_count(); ++i) std::printf("%s\n", tc_prompt_key(i));
      } else {
        if (pr_key.empty()) throw Failure{TC_ERR_INVALID_ARGUMENT, "prompt needs a key or --list"};
        char* out = nullptr;
        check(tc_prompt_render(pr_key.c_str(), pr_values.c_str(), &out));
        StringPtr text(out);
        std::printf("%s\n", text.get());
      }
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "textcue: %s: %s\n", tc_status_name(f.status), f.message.c_str());
    return f.status;
  }
  return 0;
}
