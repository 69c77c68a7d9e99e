#include "textcue/attention.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "textcue/error.hpp"
#include "textcue/io.hpp"

namespace textcue {

namespace {

constexpr char kMagic[4] = {'T', 'C', 'A', 'D'};
constexpr std::uint16_t kVersion = 1;

void check_values(const std::vector<float>& values, const char* which) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = values[i];
    if (!std::isfinite(v) || v < 0.0f) {
      fail(ErrorCode::kValue, std::string(which) + " entry " + std::to_string(i) +
                                  " is negative or non-finite");
    }
  }
}

}  // namespace

void validate_dump(const AttentionDump& dump) {
  const Geometry& g = dump.geometry;
  if (dump.layers == 0 || dump.tokens == 0) {
    fail(ErrorCode::kShape, "layer and token counts must be positive");
  }
  if (g.grid_h == 0 || g.grid_w == 0 || g.patch_px == 0) {
    fail(ErrorCode::kShape, "grid dimensions and patch size must be positive");
  }
  if (g.orig_w == 0 || g.orig_h == 0 || g.proc_w == 0 || g.proc_h == 0) {
    fail(ErrorCode::kShape, "image dimensions must be positive");
  }
  if (static_cast<std::uint64_t>(g.grid_h) * g.grid_w != dump.tokens) {
    fail(ErrorCode::kShape, "grid " + std::to_string(g.grid_h) + "x" +
                                std::to_string(g.grid_w) + " does not cover " +
                                std::to_string(dump.tokens) + " tokens");
  }
  // Processed dims may differ from grid * patch by less than one patch.
  auto off_by = [&](std::uint32_t proc, std::uint32_t cells) {
    const std::int64_t expect = static_cast<std::int64_t>(cells) * g.patch_px;
    return std::llabs(static_cast<std::int64_t>(proc) - expect) >= g.patch_px;
  };
  if (off_by(g.proc_w, g.grid_w) || off_by(g.proc_h, g.grid_h)) {
    fail(ErrorCode::kShape, "processed image size disagrees with grid x patch size");
  }
  const std::size_t n = static_cast<std::size_t>(dump.layers) * dump.tokens;
  if (dump.attn_question.size() != n || dump.attn_generic.size() != n) {
    fail(ErrorCode::kShape, "attention matrices must be layers x tokens");
  }
  check_values(dump.attn_question, "question attention");
  check_values(dump.attn_generic, "generic attention");
}

AttentionDump parse_dump(std::span<const std::uint8_t> bytes) {
  io::ByteReader in(bytes);
  if (in.bytes(4) != std::string_view(kMagic, 4)) {
    fail(ErrorCode::kFormat, "bad magic, expected TCAD");
  }
  const std::uint16_t version = in.u16();
  if (version != kVersion) {
    fail(ErrorCode::kFormat, "unsupported dump version " + std::to_string(version));
  }

  AttentionDump dump;
  dump.layers = in.u32();
  dump.tokens = in.u32();
  Geometry& g = dump.geometry;
  g.grid_h = in.u32();
  g.grid_w = in.u32();
  g.proc_w = in.u32();
  g.proc_h = in.u32();
  g.orig_w = in.u32();
  g.orig_h = in.u32();
  g.patch_px = in.u32();
  const std::uint16_t meta_len = in.u16();
  dump.metadata = in.bytes(meta_len);

  // Shape is checked before the payload so a mismatched grid reports as such
  // rather than as a length error.
  if (dump.layers == 0 || dump.tokens == 0) {
    fail(ErrorCode::kShape, "layer and token counts must be positive");
  }
  if (static_cast<std::uint64_t>(g.grid_h) * g.grid_w != dump.tokens) {
    fail(ErrorCode::kShape, "grid " + std::to_string(g.grid_h) + "x" +
                                std::to_string(g.grid_w) + " does not cover " +
                                std::to_string(dump.tokens) + " tokens");
  }

  const std::uint64_t n = static_cast<std::uint64_t>(dump.layers) * dump.tokens;
  if (in.remaining() != 2 * n * sizeof(float)) {
    fail(ErrorCode::kFormat, "payload holds " + std::to_string(in.remaining()) +
                                 " bytes, expected " +
                                 std::to_string(2 * n * sizeof(float)));
  }
  dump.attn_question.resize(n);
  dump.attn_generic.resize(n);
  in.f32_array(dump.attn_question);
  in.f32_array(dump.attn_generic);

  validate_dump(dump);
  return dump;
}

AttentionDump load_dump(const std::filesystem::path& path) {
  const auto bytes = io::read_binary(path);
  return parse_dump(bytes);
}

std::vector<std::uint8_t> serialize_dump(const AttentionDump& dump) {
  validate_dump(dump);
  if (dump.metadata.size() > 0xFFFF) {
    fail(ErrorCode::kValue, "metadata exceeds 65535 bytes");
  }
  io::ByteWriter out;
  out.raw(std::string_view(kMagic, 4));
  out.u16(kVersion);
  const Geometry& g = dump.geometry;
  for (std::uint32_t v : {dump.layers, dump.tokens, g.grid_h, g.grid_w, g.proc_w,
                          g.proc_h, g.orig_w, g.orig_h, g.patch_px}) {
    out.u32(v);
  }
  out.u16(static_cast<std::uint16_t>(dump.metadata.size()));
  out.raw(dump.metadata);
  out.f32_array(dump.attn_question);
  out.f32_array(dump.attn_generic);
  return out.release();
}

void save_dump(const AttentionDump& dump, const std::filesystem::path& path) {
  const auto bytes = serialize_dump(dump);
  io::write_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                          bytes.size()));
}

RelativeAttentionStack relative_attention(const AttentionDump& dump, double epsilon) {
  if (!(epsilon > 0.0)) fail(ErrorCode::kInvalidArgument, "epsilon must be positive");
  RelativeAttentionStack stack;
  stack.layers = dump.layers;
  stack.tokens = dump.tokens;
  stack.maps.resize(dump.attn_question.size());
  for (std::size_t i = 0; i < stack.maps.size(); ++i) {
    const double q = dump.attn_question[i];
    const double g = dump.attn_generic[i];
    stack.maps[i] = q / std::max(g, epsilon);
  }
  return stack;
}

double map_divergence(std::span<const double> map) {
  if (map.empty()) return 0.0;
  // Summing (max - x) rather than subtracting the mean keeps constant maps at
  // exactly zero.
  const double peak = *std::max_element(map.begin(), map.end());
  double gap = 0.0;
  for (double x : map) gap += peak - x;
  return gap / static_cast<double>(map.size());
}

LayerSelection select_salient_layer(const RelativeAttentionStack& stack,
                                    std::size_t start, std::size_t count) {
  if (count == 0) fail(ErrorCode::kRange, "layer window must contain at least one layer");
  if (start + count > stack.layers) {
    fail(ErrorCode::kRange, "layer window [" + std::to_string(start) + ", " +
                                std::to_string(start + count) + ") exceeds " +
                                std::to_string(stack.layers) + " layers");
  }
  LayerSelection sel;
  sel.window_start = start;
  sel.window_len = count;
  sel.divergences.reserve(count);
  std::size_t best = 0;
  for (std::size_t i = 0; i < count; ++i) {
    sel.divergences.push_back(map_divergence(stack.row(start + i)));
    if (sel.divergences[i] > sel.divergences[best]) best = i;
  }
  sel.chosen = start + best;
  return sel;
}

}  // namespace textcue
