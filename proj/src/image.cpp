#include "textcue/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <sstream>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "textcue/error.hpp"
#include "textcue/io.hpp"

namespace textcue {

namespace fs = std::filesystem;

Image rotate_clockwise(const Image& src, int degrees) {
  if (degrees != 90 && degrees != 180 && degrees != 270) {
    fail(ErrorCode::kUnsupportedAngle,
         "rotation must be 90, 180 or 270 degrees, got " + std::to_string(degrees));
  }
  Image dst;
  dst.channels = src.channels;
  const bool swap = degrees != 180;
  dst.width = swap ? src.height : src.width;
  dst.height = swap ? src.width : src.height;
  dst.pixels.resize(src.pixels.size());
  const std::size_t ch = src.channels;
  for (std::size_t y = 0; y < src.height; ++y) {
    for (std::size_t x = 0; x < src.width; ++x) {
      std::size_t dx = 0, dy = 0;
      switch (degrees) {
        case 90: dx = src.height - 1 - y; dy = x; break;
        case 180: dx = src.width - 1 - x; dy = src.height - 1 - y; break;
        default: dx = y; dy = src.width - 1 - x; break;
      }
      std::copy_n(src.at(x, y), ch, dst.at(dx, dy));
    }
  }
  return dst;
}

namespace {

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  for (char& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e;
}

Image load_png(const fs::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str())) {
    fail(ErrorCode::kFormat, "cannot decode PNG " + path.string() + ": " + img.message);
  }
  Image out;
  const bool has_alpha = img.format & PNG_FORMAT_FLAG_ALPHA;
  const bool color = img.format & PNG_FORMAT_FLAG_COLOR;
  img.format = color ? (has_alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB)
                     : (has_alpha ? PNG_FORMAT_GA : PNG_FORMAT_GRAY);
  out.width = img.width;
  out.height = img.height;
  out.channels = PNG_IMAGE_PIXEL_CHANNELS(img.format);
  out.pixels.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&img);
    fail(ErrorCode::kFormat, "cannot decode PNG " + path.string() + ": " + img.message);
  }
  return out;
}

void save_png(const Image& image, const fs::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  switch (image.channels) {
    case 1: img.format = PNG_FORMAT_GRAY; break;
    case 2: img.format = PNG_FORMAT_GA; break;
    case 3: img.format = PNG_FORMAT_RGB; break;
    case 4: img.format = PNG_FORMAT_RGBA; break;
    default: fail(ErrorCode::kValue, "unsupported channel count");
  }
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.pixels.data(), 0, nullptr)) {
    fail(ErrorCode::kIo, "cannot write PNG " + path.string() + ": " + img.message);
  }
}

struct JpegErrorMgr {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// setjmp/longjmp skip C++ destructors, so the decode runs in a frame that
// owns no objects with non-trivial destructors besides those created before
// setjmp.
Image load_jpeg(const fs::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) fail(ErrorCode::kIo, "cannot open " + path.string());
  jpeg_decompress_struct cinfo{};
  JpegErrorMgr jerr{};
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_error_exit;
  Image out;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_decompress(&cinfo);
    fail(ErrorCode::kFormat, "cannot decode JPEG " + path.string() + ": " + jerr.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file.get());
  jpeg_read_header(&cinfo, TRUE);
  if (cinfo.jpeg_color_space != JCS_GRAYSCALE) cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = cinfo.output_width;
  out.height = cinfo.output_height;
  out.channels = static_cast<std::size_t>(cinfo.output_components);
  out.pixels.resize(out.width * out.height * out.channels);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.pixels.data() + cinfo.output_scanline * out.width * out.channels;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

void save_jpeg(const Image& image, const fs::path& path) {
  if (image.channels != 1 && image.channels != 3) {
    fail(ErrorCode::kValue, "JPEG output needs 1 or 3 channels");
  }
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) fail(ErrorCode::kIo, "cannot write " + path.string());
  jpeg_compress_struct cinfo{};
  JpegErrorMgr jerr{};
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    jpeg_destroy_compress(&cinfo);
    fail(ErrorCode::kIo, "cannot encode JPEG " + path.string() + ": " + jerr.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, file.get());
  cinfo.image_width = static_cast<JDIMENSION>(image.width);
  cinfo.image_height = static_cast<JDIMENSION>(image.height);
  cinfo.input_components = static_cast<int>(image.channels);
  cinfo.in_color_space = image.channels == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, 95, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(image.pixels.data() +
                                     cinfo.next_scanline * image.width * image.channels);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
}

Image load_pnm(const fs::path& path) {
  const auto bytes = io::read_binary(path);
  std::size_t pos = 0;
  auto next_token = [&]() {
    for (;;) {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      if (pos < bytes.size() && bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        continue;
      }
      break;
    }
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
    return tok;
  };
  const std::string magic = next_token();
  if (magic != "P5" && magic != "P6") fail(ErrorCode::kFormat, "unsupported PNM type " + magic);
  Image out;
  try {
    out.width = std::stoul(next_token());
    out.height = std::stoul(next_token());
    if (std::stoul(next_token()) != 255) fail(ErrorCode::kFormat, "only 8-bit PNM is supported");
  } catch (const std::logic_error&) {
    fail(ErrorCode::kFormat, "malformed PNM header in " + path.string());
  }
  ++pos;  // single whitespace before raster
  out.channels = magic == "P5" ? 1 : 3;
  const std::size_t need = out.width * out.height * out.channels;
  if (pos > bytes.size() || bytes.size() - pos < need) {
    fail(ErrorCode::kFormat, "truncated PNM raster in " + path.string());
  }
  out.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + need));
  return out;
}

void save_pnm(const Image& image, const fs::path& path) {
  if (image.channels != 1 && image.channels != 3) {
    fail(ErrorCode::kValue, "PNM output needs 1 or 3 channels");
  }
  std::ostringstream ss;
  ss << (image.channels == 1 ? "P5" : "P6") << "\n" << image.width << " " << image.height
     << "\n255\n";
  std::string data = ss.str();
  data.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  io::write_atomic(path, data);
}

}  // namespace

Image load_image(const fs::path& path) {
  std::uint8_t sig[8] = {};
  {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) fail(ErrorCode::kIo, "cannot open " + path.string());
    if (std::fread(sig, 1, sizeof sig, f.get()) < 2) {
      fail(ErrorCode::kFormat, "file too short for an image: " + path.string());
    }
  }
  if (png_sig_cmp(sig, 0, 8) == 0) return load_png(path);
  if (sig[0] == 0xFF && sig[1] == 0xD8) return load_jpeg(path);
  if (sig[0] == 'P' && (sig[1] == '5' || sig[1] == '6')) return load_pnm(path);
  fail(ErrorCode::kFormat, "unrecognized image format: " + path.string());
}

void save_image(const Image& image, const fs::path& path) {
  if (image.pixels.size() != image.width * image.height * image.channels || image.width == 0 ||
      image.height == 0) {
    fail(ErrorCode::kValue, "image buffer does not match its dimensions");
  }
  const auto ext = lower_ext(path);
  if (ext == ".png") return save_png(image, path);
  if (ext == ".jpg" || ext == ".jpeg") return save_jpeg(image, path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return save_pnm(image, path);
  fail(ErrorCode::kInvalidArgument, "unsupported output image extension '" + ext + "'");
}

void draw_box(Image& image, const BoxPx& box, std::array<std::uint8_t, 3> rgb, int thickness) {
  if (image.width == 0 || image.height == 0) return;
  const auto clampx = [&](double v) {
    return static_cast<long>(std::clamp(std::floor(v), 0.0, static_cast<double>(image.width - 1)));
  };
  const auto clampy = [&](double v) {
    return static_cast<long>(std::clamp(std::floor(v), 0.0, static_cast<double>(image.height - 1)));
  };
  const long x0 = clampx(box.x0), x1 = clampx(box.x1 - 1);
  const long y0 = clampy(box.y0), y1 = clampy(box.y1 - 1);
  auto paint = [&](long x, long y) {
    std::uint8_t* p = image.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
    if (image.channels >= 3) {
      p[0] = rgb[0];
      p[1] = rgb[1];
      p[2] = rgb[2];
    } else {
      p[0] = static_cast<std::uint8_t>((rgb[0] * 299 + rgb[1] * 587 + rgb[2] * 114) / 1000);
    }
  };
  for (int t = 0; t < thickness; ++t) {
    for (long x = x0; x <= x1; ++x) {
      if (y0 + t <= y1) paint(x, y0 + t);
      if (y1 - t >= y0) paint(x, y1 - t);
    }
    for (long y = y0; y <= y1; ++y) {
      if (x0 + t <= x1) paint(x0 + t, y);
      if (x1 - t >= x0) paint(x1 - t, y);
    }
  }
}

}  // namespace textcue
