#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace textcue::eval {

enum class Subset { kGen, kReal };
enum class Mode { kCoT, kDirect };

std::string_view to_string(Subset s);
std::string_view to_string(Mode m);
Mode parse_mode(std::string_view text);  // "cot" / "direct", any case

inline constexpr std::array<std::string_view, 5> kGenTags = {
    "categorical", "sufficient", "necessary", "disjunctive", "conjunctive"};
inline constexpr std::array<std::string_view, 4> kRealTags = {
    "numerical", "temporal", "decision", "conditional"};

struct Sample {
  std::string id;
  Subset subset = Subset::kGen;
  std::string context;
  std::string question;
  std::vector<std::string> options;  // exactly four for Gen, labeled A-D
  std::string answer;                // letter for Gen, free text for Real
  std::vector<std::string> reasoning_tags;  // sorted, unique, canonical names
  std::string image_ref;
  std::optional<std::string> layout;  // "background" | "interleaved"
  std::optional<std::string> font;    // "handwritten" | "non-handwritten"
};

/// Accepts the canonical field names plus common aliases (solution for
/// answer, type for reasoning_tags, image for image_ref, boolean
/// background/handwritten flags). Throws Error{kValue} on invariant
/// violations and Error{kFormat} on malformed records.
Sample sample_from_json(const nlohmann::json& rec);
std::vector<Sample> load_manifest(const std::filesystem::path& path);

struct ResponseRecord {
  std::string id;
  Mode mode = Mode::kCoT;
  std::string completion;
  std::optional<long> completion_tokens;
};

ResponseRecord response_from_json(const nlohmann::json& rec);
std::vector<ResponseRecord> load_responses(const std::filesystem::path& path);

/// Option letter chosen in a completion, or nullopt when unparsed. The last
/// case-insensitive "Answer: X" wins; otherwise the last standalone capital
/// A-D on the final non-empty line.
std::optional<char> extract_choice(std::string_view completion);

/// Text after the last "Answer:" marker on its line, or the final non-empty
/// line when no marker is present. Trimmed.
std::string extract_final_answer(std::string_view completion);

/// Offline fallback for free-form answers: equality after lowercasing,
/// dropping punctuation other than '.', '%', '-' inside tokens, and
/// collapsing whitespace.
bool normalized_match(std::string_view candidate, std::string_view gold);

/// Result of scoring one free-form answer.
struct FreeFormVerdict {
  enum class Status { kScored, kParseError, kTransportError };
  Status status = Status::kScored;
  bool correct = false;
  int retries = 0;
  std::string detail;
};

using FreeFormScorer =
    std::function<FreeFormVerdict(const Sample&, std::string_view candidate)>;

FreeFormScorer exact_match_scorer();

struct Bucket {
  std::size_t correct = 0;
  std::size_t total = 0;
  double accuracy() const {
    return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  }
};

struct MetricReport {
  Mode mode = Mode::kCoT;
  Bucket overall;
  std::map<std::string, Bucket> by_subset;
  std::map<std::string, Bucket> gen_by_type_count;  // "1", "2", "3", ">3"
  std::map<std::string, Bucket> gen_by_tag;
  std::map<std::string, Bucket> real_by_tag;
  std::map<std::string, Bucket> by_layout;
  std::map<std::string, Bucket> by_font;
  std::size_t unparsed = 0;
  std::size_t missing = 0;
  std::vector<std::string> judge_excluded;  // ids, sorted
  std::size_t judge_retries = 0;
  std::optional<double> mean_completion_tokens;
};

struct ScoreOptions {
  Mode mode = Mode::kCoT;
  FreeFormScorer free_form;  // required when the manifest holds Real samples
  std::size_t workers = 1;
};

/// Throws Error{kUnknownSample} / Error{kDuplicateResponse}. Samples without
/// a response in the chosen mode count as incorrect (reported as missing);
/// free-form answers the scorer cannot judge are excluded from every bucket.
MetricReport score_run(std::span<const Sample> samples,
                       std::span<const ResponseRecord> responses,
                       const ScoreOptions& options);

std::string type_count_bucket(std::size_t tag_count);

nlohmann::ordered_json report_to_json(const MetricReport& report);

/// Fraction of Gen gold answers per letter A-D. Throws kEmptyInput when the
/// manifest has no Gen samples.
std::array<double, 4> answer_distribution(std::span<const Sample> samples);

/// Whitespace tokens of context, question and options.
std::size_t word_count(const Sample& sample);

struct ManifestStats {
  std::size_t total = 0;
  std::map<std::string, std::size_t> per_subset;
  std::map<std::string, std::size_t> layout_counts;
  std::map<std::string, std::size_t> font_counts;
  std::map<std::string, std::size_t> tag_counts;        // per subset prefix "Gen/" "Real/"
  std::map<std::string, std::size_t> type_count_counts; // Gen only
  double average_words = 0.0;
  std::optional<std::array<double, 4>> answer_distribution;
};

ManifestStats manifest_stats(std::span<const Sample> samples);
nlohmann::ordered_json stats_to_json(const ManifestStats& stats);

}  // namespace textcue::eval
