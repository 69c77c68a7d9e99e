#include "textcue/io.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

namespace textcue::io {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace fs = std::filesystem;

std::vector<std::uint8_t> read_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_atomic(const fs::path& path, std::string_view contents) {
  std::random_device rd;
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      fail(ErrorCode::kIo, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    fail(ErrorCode::kIo, "cannot rename into " + path.string());
  }
}

std::vector<std::pair<std::size_t, nlohmann::json>> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::vector<std::pair<std::size_t, nlohmann::json>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    try {
      out.emplace_back(lineno, nlohmann::json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorCode::kFormat,
           path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void ByteReader::need(std::size_t count) const {
  if (remaining() < count) {
    fail(ErrorCode::kFormat, "truncated payload: need " + std::to_string(count) +
                                 " bytes, have " + std::to_string(remaining()));
  }
}

std::uint16_t ByteReader::u16() {
  need(2);
  std::uint16_t v;
  std::memcpy(&v, bytes_.data() + pos_, 2);
  pos_ += 2;
  return v;
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v;
  std::memcpy(&v, bytes_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

float ByteReader::f32() {
  need(4);
  float v;
  std::memcpy(&v, bytes_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

std::string ByteReader::bytes(std::size_t count) {
  need(count);
  std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), count);
  pos_ += count;
  return s;
}

void ByteReader::f32_array(std::span<float> out) {
  need(out.size_bytes());
  std::memcpy(out.data(), bytes_.data() + pos_, out.size_bytes());
  pos_ += out.size_bytes();
}

void ByteWriter::u16(std::uint16_t v) {
  auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  buf_.insert(buf_.end(), p, p + 2);
}

void ByteWriter::u32(std::uint32_t v) {
  auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  buf_.insert(buf_.end(), p, p + 4);
}

void ByteWriter::f32(float v) {
  auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  buf_.insert(buf_.end(), p, p + 4);
}

void ByteWriter::raw(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

void ByteWriter::f32_array(std::span<const float> values) {
  auto* p = reinterpret_cast<const std::uint8_t*>(values.data());
  buf_.insert(buf_.end(), p, p + values.size_bytes());
}

}  // namespace textcue::io
