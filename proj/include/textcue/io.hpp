#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "textcue/error.hpp"

namespace textcue::io {

std::vector<std::uint8_t> read_binary(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);

// Writes to a sibling temp file, then renames over the destination.
void write_atomic(const std::filesystem::path& path, std::string_view contents);

// JSON Lines reader; blank lines are skipped. Pairs carry 1-based line numbers.
std::vector<std::pair<std::size_t, nlohmann::json>> read_jsonl(
    const std::filesystem::path& path);

/// Little-endian cursor over a byte buffer. Reading past the end throws
/// Error{kFormat}.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint16_t u16();
  std::uint32_t u32();
  float f32();
  std::string bytes(std::size_t count);
  void f32_array(std::span<float> out);

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t count) const;

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

class ByteWriter {
 public:
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void f32(float v);
  void raw(std::string_view s);
  void f32_array(std::span<const float> values);

  const std::vector<std::uint8_t>& buffer() const { return buf_; }
  std::vector<std::uint8_t> release() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

}  // namespace textcue::io
