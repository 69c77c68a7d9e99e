#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace textcue {

/// Prompt used for the generic-instruction forward pass. Relative attention
/// divides the question-conditioned map by the map obtained with this text.
inline constexpr std::string_view kGenericInstruction =
    "Write a general description of the image.";

inline constexpr double kDefaultEpsilon = 1e-12;
inline constexpr std::size_t kDefaultLayerStart = 22;
inline constexpr std::size_t kDefaultLayerCount = 5;

/// Image and patch-grid geometry shared by every stage of the crop pipeline.
struct Geometry {
  std::uint32_t grid_h = 0;
  std::uint32_t grid_w = 0;
  std::uint32_t proc_w = 0;
  std::uint32_t proc_h = 0;
  std::uint32_t orig_w = 0;
  std::uint32_t orig_h = 0;
  std::uint32_t patch_px = 0;

  bool operator==(const Geometry&) const = default;
};

/// Head-averaged attention of the first answer token to every image token,
/// for every LLM layer, under the question prompt and the generic prompt.
/// Both matrices are layers x tokens, row-major.
struct AttentionDump {
  std::uint32_t layers = 0;
  std::uint32_t tokens = 0;
  Geometry geometry;
  std::string metadata;
  std::vector<float> attn_question;
  std::vector<float> attn_generic;

  std::span<const float> question_row(std::size_t layer) const {
    return {attn_question.data() + layer * tokens, tokens};
  }
  std::span<const float> generic_row(std::size_t layer) const {
    return {attn_generic.data() + layer * tokens, tokens};
  }
};

// Throws Error{kShape} or Error{kValue} if an invariant is violated.
void validate_dump(const AttentionDump& dump);

/// Decodes a TCAD file. Layout (little-endian):
///   "TCAD" u16 version=1
///   u32 L, T, grid_h, grid_w, proc_w, proc_h, orig_w, orig_h, patch_px
///   u16 metadata length, metadata bytes (UTF-8)
///   f32[L*T] question attention, f32[L*T] generic attention
AttentionDump load_dump(const std::filesystem::path& path);
AttentionDump parse_dump(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> serialize_dump(const AttentionDump& dump);
void save_dump(const AttentionDump& dump, const std::filesystem::path& path);

struct RelativeAttentionStack {
  std::size_t layers = 0;
  std::size_t tokens = 0;
  std::vector<double> maps;  // layers x tokens, row-major

  std::span<const double> row(std::size_t layer) const {
    return {maps.data() + layer * tokens, tokens};
  }
};

/// maps[l][t] = attn_question[l][t] / max(attn_generic[l][t], epsilon)
RelativeAttentionStack relative_attention(const AttentionDump& dump,
                                          double epsilon = kDefaultEpsilon);

struct LayerSelection {
  std::size_t window_start = 0;
  std::size_t window_len = 0;
  std::vector<double> divergences;
  std::size_t chosen = 0;
};

/// Max-minus-mean of one map.
double map_divergence(std::span<const double> map);

/// Picks the layer in [start, start+count) whose map has the largest
/// max-minus-mean divergence. Ties go to the lowest layer.
LayerSelection select_salient_layer(const RelativeAttentionStack& stack,
                                    std::size_t start = kDefaultLayerStart,
                                    std::size_t count = kDefaultLayerCount);

}  // namespace textcue
