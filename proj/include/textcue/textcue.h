/* textcue C API.
 *
 * Every fallible call returns a tc_status; TC_OK is zero. On failure a
 * message for the calling thread is available from tc_last_error() until the
 * next API call on that thread. Strings returned through char** out
 * parameters are heap allocated and must be released with tc_string_free().
 * Opaque handles are released with their matching *_free function; passing
 * NULL to a *_free function is a no-op.
 */
#ifndef TEXTCUE_H
#define TEXTCUE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(TEXTCUE_BUILDING)
#    define TEXTCUE_API __declspec(dllexport)
#  else
#    define TEXTCUE_API __declspec(dllimport)
#  endif
#else
#  define TEXTCUE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status values double as CLI exit codes. */
typedef enum tc_status {
  TC_OK = 0,
  TC_ERR_FORMAT = 1,
  TC_ERR_SHAPE = 2,
  TC_ERR_DEGENERATE = 3,
  TC_ERR_VALUE = 4,
  TC_ERR_RANGE = 5,
  TC_ERR_IO = 6,
  TC_ERR_JUDGE_TRANSPORT = 7,
  TC_ERR_JUDGE_PARSE = 8,
  TC_ERR_DUPLICATE_RESPONSE = 9,
  TC_ERR_UNKNOWN_SAMPLE = 10,
  TC_ERR_DIMENSION_MISMATCH = 11,
  TC_ERR_ZERO_VECTOR = 12,
  TC_ERR_EMPTY_INPUT = 13,
  TC_ERR_UNSUPPORTED_ANGLE = 14,
  TC_ERR_INVALID_ARGUMENT = 15,
  TC_ERR_INTERNAL = 70
} tc_status;

TEXTCUE_API const char* tc_version(void);
TEXTCUE_API const char* tc_status_name(int status);
TEXTCUE_API const char* tc_last_error(void);
TEXTCUE_API void tc_string_free(char* s);

/* 0 trace, 1 debug, 2 info, 3 warn (default), 4 error, 5 critical, 6 off. */
TEXTCUE_API void tc_set_log_level(int level);

/* ---- Attention dumps ---------------------------------------------------- */

typedef struct tc_geometry {
  uint32_t grid_h;
  uint32_t grid_w;
  uint32_t proc_w;
  uint32_t proc_h;
  uint32_t orig_w;
  uint32_t orig_h;
  uint32_t patch_px;
} tc_geometry;

typedef struct tc_dump_info {
  uint32_t layers;
  uint32_t tokens;
  tc_geometry geometry;
} tc_dump_info;

typedef struct tc_dump tc_dump;

TEXTCUE_API int tc_dump_load(const char* path, tc_dump** out);
/* Copies layers*tokens floats from each attention array. */
TEXTCUE_API int tc_dump_create(uint32_t layers, uint32_t tokens, const tc_geometry* geometry,
                               const float* attn_question, const float* attn_generic,
                               const char* metadata, tc_dump** out);
TEXTCUE_API int tc_dump_save(const tc_dump* dump, const char* path);
TEXTCUE_API int tc_dump_info_get(const tc_dump* dump, tc_dump_info* out);
TEXTCUE_API void tc_dump_free(tc_dump* dump);

/* ---- Word boxes and crop planning --------------------------------------- */

typedef struct tc_box {
  double x0;
  double y0;
  double x1;
  double y1;
} tc_box;

typedef struct tc_words tc_words;

/* Coordinates are clipped to image_w x image_h; zero-area boxes are dropped. */
TEXTCUE_API int tc_words_load(const char* path, double image_w, double image_h, tc_words** out);
TEXTCUE_API size_t tc_words_count(const tc_words* words);
TEXTCUE_API void tc_words_free(tc_words* words);

typedef struct tc_crop_options {
  uint32_t layer_start; /* default 22 */
  uint32_t layer_count; /* default 5 */
  double epsilon;       /* default 1e-12 */
  double enlarge;       /* default 1.5 */
} tc_crop_options;

TEXTCUE_API void tc_crop_options_default(tc_crop_options* options);

typedef struct tc_crop_plan {
  tc_box rough;
  tc_box refined;
  double enlarge;
  long out_w;
  long out_h;
  uint32_t chosen_layer;
  int fallback; /* nonzero when no word box refined the rough box */
} tc_crop_plan;

/* words may be NULL (no words file). plan and json may each be NULL. */
TEXTCUE_API int tc_crop(const tc_dump* dump, const tc_words* words, const tc_crop_options* options,
                        tc_crop_plan* plan, char** json);

TEXTCUE_API int tc_iou(const tc_box* a, const tc_box* b, double* out);

/* ---- Images ------------------------------------------------------------- */

typedef struct tc_image tc_image;

TEXTCUE_API int tc_image_load(const char* path, tc_image** out);
TEXTCUE_API int tc_image_create(size_t width, size_t height, size_t channels,
                                const uint8_t* pixels, tc_image** out);
TEXTCUE_API int tc_image_save(const tc_image* image, const char* path);
/* Clockwise; degrees must be 90, 180 or 270. */
TEXTCUE_API int tc_image_rotate(const tc_image* image, int degrees, tc_image** out);
TEXTCUE_API int tc_image_draw_box(tc_image* image, const tc_box* box, uint8_t r, uint8_t g,
                                  uint8_t b);
TEXTCUE_API void tc_image_dims(const tc_image* image, size_t* width, size_t* height,
                               size_t* channels);
TEXTCUE_API const uint8_t* tc_image_data(const tc_image* image);
TEXTCUE_API void tc_image_free(tc_image* image);

/* ---- OCR metrics -------------------------------------------------------- */

typedef struct tc_prf {
  double precision;
  double recall;
  double f1;
} tc_prf;

TEXTCUE_API int tc_edit_distance_norm(const char* prediction, const char* reference, double* out);
TEXTCUE_API int tc_word_prf(const char* prediction, const char* reference, tc_prf* out);
TEXTCUE_API int tc_meteor(const char* prediction, const char* reference, double* out);
TEXTCUE_API int tc_bleu(const char* const* predictions, const char* const* references, size_t n,
                        double* out);
/* Both files are JSON Lines of {"id": ..., "text": ...}; pairs join on id. */
TEXTCUE_API int tc_ocr_eval_files(const char* predictions_path, const char* references_path,
                                  char** json);

/* ---- Benchmark harness -------------------------------------------------- */

typedef struct tc_manifest tc_manifest;

TEXTCUE_API int tc_manifest_load(const char* path, tc_manifest** out);
TEXTCUE_API size_t tc_manifest_size(const tc_manifest* manifest);
TEXTCUE_API void tc_manifest_free(tc_manifest* manifest);
TEXTCUE_API int tc_manifest_stats(const tc_manifest* manifest, char** json);
/* Fractions for A, B, C, D over Gen samples. */
TEXTCUE_API int tc_answer_distribution(const tc_manifest* manifest, double out[4]);

/* *letter is set to 'A'..'D', or to 0 when the completion is unparsed. */
TEXTCUE_API int tc_extract_choice(const char* completion, char* letter);

typedef struct tc_judge_options {
  const char* url;     /* chat-completions endpoint */
  const char* model;   /* default "gpt-4o-mini" */
  const char* api_key; /* NULL: TEXTCUE_JUDGE_API_KEY, then OPENAI_API_KEY */
  int max_retries;     /* < 0: default 3 */
  uint32_t timeout_s;  /* 0: default 60 */
} tc_judge_options;

typedef struct tc_eval_options {
  const char* mode;                /* "cot" or "direct" */
  size_t workers;                  /* concurrent judge requests; 0 -> 1 */
  const tc_judge_options* judge;   /* free-form scoring through the judge */
  const char* verdicts_path;       /* or precomputed verdicts from tc_judge_run */
  /* With neither judge nor verdicts, free-form answers use normalized exact match. */
} tc_eval_options;

TEXTCUE_API int tc_eval_run(const tc_manifest* manifest, const char* responses_path,
                            const tc_eval_options* options, char** json);

/* Judges every free-form response of the chosen mode and returns verdict
 * JSON Lines sorted by id. options->judge is required. */
TEXTCUE_API int tc_judge_run(const tc_manifest* manifest, const char* responses_path,
                             const tc_eval_options* options, char** jsonl);

/* ---- Deduplication ------------------------------------------------------ */

typedef struct tc_embeddings tc_embeddings;

TEXTCUE_API int tc_embeddings_load(const char* vectors_path, const char* ids_path,
                                   tc_embeddings** out);
TEXTCUE_API size_t tc_embeddings_size(const tc_embeddings* embeddings);
TEXTCUE_API void tc_embeddings_free(tc_embeddings* embeddings);
TEXTCUE_API int tc_dedup(const tc_embeddings* embeddings, double threshold, char** json);

/* ---- Prompt templates --------------------------------------------------- */

/* Static storage; NULL for an unknown key. */
TEXTCUE_API const char* tc_prompt_get(const char* key);
TEXTCUE_API size_t tc_prompt_count(void);
TEXTCUE_API const char* tc_prompt_key(size_t index);
/* values_json is an object of placeholder -> string. */
TEXTCUE_API int tc_prompt_render(const char* key, const char* values_json, char** out);

#ifdef __cplusplus
}
#endif

#endif /* TEXTCUE_H */
