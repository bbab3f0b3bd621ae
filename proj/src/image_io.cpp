#include "mammosynth/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>

#include "mammosynth/error.hpp"

namespace mammosynth {
namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

bool starts_with(std::span<const std::uint8_t> bytes, std::string_view magic) {
  return bytes.size() >= magic.size() &&
         std::equal(magic.begin(), magic.end(), bytes.begin(),
                    [](char a, std::uint8_t b) { return static_cast<std::uint8_t>(a) == b; });
}

// ---------------------------------------------------------------------------
// Netpbm-style header tokenizer shared by PGM and PFM.

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string token() {
    skip_space_and_comments();
    std::string out;
    while (pos_ < bytes_.size() && !std::isspace(bytes_[pos_])) {
      out.push_back(static_cast<char>(bytes_[pos_++]));
    }
    if (out.empty()) throw Error(ErrorKind::format, "truncated raster header");
    return out;
  }

  long long integer(const char* what) {
    const std::string t = token();
    long long v = 0;
    for (char c : t) {
      if (c < '0' || c > '9' || v > 1'000'000'000) {
        throw Error(ErrorKind::format, std::string("bad ") + what + " in header: " + t);
      }
      v = v * 10 + (c - '0');
    }
    return v;
  }

  // The raster payload begins after exactly one whitespace byte.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorKind::format, "missing separator before raster payload");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void check_extent(long long width, long long height) {
  if (width < 1 || height < 1 || width > 1'000'000 || height > 1'000'000 ||
      width * height > (1LL << 31)) {
    throw Error(ErrorKind::format, "unsupported raster extent " + std::to_string(width) + "x" +
                                       std::to_string(height));
  }
}

// ---------------------------------------------------------------------------
// PGM (binary P5)

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
  HeaderReader header(bytes);
  const std::string magic = header.token();
  if (magic == "P6" || magic == "P3") {
    throw Error(ErrorKind::format, "multi-channel PPM input is not supported");
  }
  if (magic != "P5") throw Error(ErrorKind::format, "only binary P5 PGM is supported");
  const long long width = header.integer("width");
  const long long height = header.integer("height");
  const long long maxval = header.integer("maxval");
  check_extent(width, height);
  if (maxval < 1 || maxval > 65535) {
    throw Error(ErrorKind::format, "unsupported PGM maxval " + std::to_string(maxval));
  }
  const std::size_t offset = header.payload_offset();
  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(width * height);
  if (bytes.size() - offset < count * bytes_per_sample) {
    throw Error(ErrorKind::format, "truncated PGM payload");
  }
  const double scale = 1.0 / static_cast<double>(maxval);
  std::vector<float> pixels(count);
  const std::uint8_t* p = bytes.data() + offset;
  for (std::size_t k = 0; k < count; ++k) {
    unsigned v = bytes_per_sample == 2 ? (unsigned{p[2 * k]} << 8) | p[2 * k + 1] : p[k];
    if (v > maxval) throw Error(ErrorKind::format, "PGM sample exceeds maxval");
    pixels[k] = static_cast<float>(v * scale);
  }
  return GrayImage(static_cast<int>(height), static_cast<int>(width), std::move(pixels));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img, SampleDepth depth) {
  const unsigned maxval = depth == SampleDepth::bits8 ? 255u : 65535u;
  const std::string header = "P5\n" + std::to_string(img.width()) + " " +
                             std::to_string(img.height()) + "\n" + std::to_string(maxval) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.size() * (depth == SampleDepth::bits8 ? 1 : 2));
  for (float p : img.pixels()) {
    const std::uint16_t q = quantize(p, depth);
    if (depth == SampleDepth::bits16) out.push_back(static_cast<std::uint8_t>(q >> 8));
    out.push_back(static_cast<std::uint8_t>(q & 0xff));
  }
  return out;
}

// ---------------------------------------------------------------------------
// PFM ("Pf" grayscale). Rows are stored bottom-to-top; a negative scale marks
// little-endian samples.

struct FloatRaster {
  int height;
  int width;
  std::vector<float> values;
};

FloatRaster decode_pfm(std::span<const std::uint8_t> bytes) {
  HeaderReader header(bytes);
  const std::string magic = header.token();
  if (magic == "PF") throw Error(ErrorKind::format, "multi-channel PFM input is not supported");
  if (magic != "Pf") throw Error(ErrorKind::format, "not a grayscale PFM file");
  const long long width = header.integer("width");
  const long long height = header.integer("height");
  const std::string scale_token = header.token();
  double scale = 0.0;
  try {
    std::size_t used = 0;
    scale = std::stod(scale_token, &used);
    if (used != scale_token.size()) throw std::invalid_argument(scale_token);
  } catch (const std::exception&) {
    throw Error(ErrorKind::format, "bad PFM scale: " + scale_token);
  }
  if (scale == 0.0 || !std::isfinite(scale)) {
    throw Error(ErrorKind::format, "bad PFM scale: " + scale_token);
  }
  check_extent(width, height);
  const std::size_t offset = header.payload_offset();
  const std::size_t count = static_cast<std::size_t>(width * height);
  if (bytes.size() - offset < count * 4) throw Error(ErrorKind::format, "truncated PFM payload");

  const bool little = scale < 0.0;
  const std::uint8_t* p = bytes.data() + offset;
  FloatRaster out{static_cast<int>(height), static_cast<int>(width), std::vector<float>(count)};
  for (long long file_row = 0; file_row < height; ++file_row) {
    const long long row = height - 1 - file_row;
    for (long long col = 0; col < width; ++col) {
      const std::uint8_t* s = p + 4 * (file_row * width + col);
      const std::uint32_t bits =
          little ? (std::uint32_t{s[0]} | std::uint32_t{s[1]} << 8 | std::uint32_t{s[2]} << 16 |
                    std::uint32_t{s[3]} << 24)
                 : (std::uint32_t{s[3]} | std::uint32_t{s[2]} << 8 | std::uint32_t{s[1]} << 16 |
                    std::uint32_t{s[0]} << 24);
      out.values[static_cast<std::size_t>(row * width + col)] = std::bit_cast<float>(bits);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// PNG via libpng with in-memory I/O.

struct MemoryReader {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto* reader = static_cast<MemoryReader*>(png_get_io_ptr(png));
  if (reader->bytes.size() - reader->pos < length) png_error(png, "truncated PNG stream");
  std::memcpy(out, reader->bytes.data() + reader->pos, length);
  reader->pos += length;
}

void png_write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* sink = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  sink->insert(sink->end(), data, data + length);
}

void png_flush_callback(png_structp) {}

struct PngError {
  char message[256] = "libpng error";
};

void png_error_callback(png_structp png, png_const_charp msg) {
  auto* err = static_cast<PngError*>(png_get_error_ptr(png));
  std::snprintf(err->message, sizeof(err->message), "%s", msg);
  png_longjmp(png, 1);
}

void png_warning_callback(png_structp, png_const_charp) {}

GrayImage decode_png(std::span<const std::uint8_t> bytes) {
  PngError err;
  MemoryReader reader{bytes};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_callback,
                                           png_warning_callback);
  if (png == nullptr) throw Error(ErrorKind::io, "cannot allocate PNG reader");
  png_infop info = png_create_info_struct(png);
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int bit_depth = 0;
  int color_type = 0;
  // Sample buffer lives outside the setjmp scope so longjmp never skips a destructor.
  std::vector<std::uint8_t> buffer;
  std::vector<png_bytep> rows;
  int status = 0;  // 0 ok, 1 libpng error, 2 multi-channel, 3 bad depth

  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    throw Error(ErrorKind::format, std::string("PNG decode failed: ") + err.message);
  }
  png_set_read_fn(png, &reader, png_read_callback);
  png_read_info(png, info);
  png_get_IHDR(png, info, &width, &height, &bit_depth, &color_type, nullptr, nullptr, nullptr);
  if (color_type != PNG_COLOR_TYPE_GRAY) {
    status = 2;
  } else if (bit_depth != 8 && bit_depth != 16) {
    status = 3;
  } else {
    png_set_interlace_handling(png);
    png_read_update_info(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    buffer.resize(row_bytes * height);
    rows.resize(height);
    for (png_uint_32 r = 0; r < height; ++r) rows[r] = buffer.data() + r * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);

  if (status == 2) throw Error(ErrorKind::format, "multi-channel PNG input is not supported");
  if (status == 3) {
    throw Error(ErrorKind::format, "unsupported PNG bit depth " + std::to_string(bit_depth));
  }
  check_extent(width, height);
  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<float> pixels(count);
  if (bit_depth == 8) {
    for (std::size_t k = 0; k < count; ++k) pixels[k] = static_cast<float>(buffer[k] / 255.0);
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      const unsigned v = (unsigned{buffer[2 * k]} << 8) | buffer[2 * k + 1];
      pixels[k] = static_cast<float>(v / 65535.0);
    }
  }
  return GrayImage(static_cast<int>(height), static_cast<int>(width), std::move(pixels));
}

std::vector<std::uint8_t> encode_png(const GrayImage& img, SampleDepth depth) {
  const int bits = static_cast<int>(depth);
  const std::size_t row_bytes = static_cast<std::size_t>(img.width()) * (bits / 8);
  std::vector<std::uint8_t> samples(row_bytes * img.height());
  std::size_t k = 0;
  for (float p : img.pixels()) {
    const std::uint16_t q = quantize(p, depth);
    if (bits == 16) samples[k++] = static_cast<std::uint8_t>(q >> 8);
    samples[k++] = static_cast<std::uint8_t>(q & 0xff);
  }
  std::vector<png_bytep> rows(img.height());
  for (int r = 0; r < img.height(); ++r) rows[r] = samples.data() + r * row_bytes;

  std::vector<std::uint8_t> out;
  PngError err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_callback,
                                            png_warning_callback);
  if (png == nullptr) throw Error(ErrorKind::io, "cannot allocate PNG writer");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    throw Error(ErrorKind::io, std::string("PNG encode failed: ") + err.message);
  }
  png_set_write_fn(png, &out, png_write_callback, png_flush_callback);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), bits, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace

std::uint16_t quantize(float value, SampleDepth depth) {
  const double levels = depth == SampleDepth::bits8 ? 255.0 : 65535.0;
  const double clamped = std::clamp(static_cast<double>(value), 0.0, 1.0);
  return static_cast<std::uint16_t>(std::floor(clamped * levels + 0.5));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::io, "read error on " + path.string());
  return bytes;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::error_code ignored;
      std::filesystem::remove(tmp, ignored);
      throw Error(ErrorKind::io, "write error on " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorKind::io, "cannot move output into place: " + path.string());
  }
}

GrayImage decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 8 && std::equal(std::begin(kPngSignature), std::end(kPngSignature),
                                      bytes.begin())) {
    return decode_png(bytes);
  }
  if (starts_with(bytes, "P5") || starts_with(bytes, "P6") || starts_with(bytes, "P3")) {
    return decode_pgm(bytes);
  }
  if (starts_with(bytes, "Pf") || starts_with(bytes, "PF")) {
    FloatRaster raster = decode_pfm(bytes);
    return GrayImage(raster.height, raster.width, std::move(raster.values));
  }
  throw Error(ErrorKind::format, "unrecognized raster format");
}

GrayImage load_image(const std::filesystem::path& path, BitDepthPolicy) {
  const auto bytes = read_file(path);
  try {
    return decode_image(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

RasterFormat format_for_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return RasterFormat::png;
  if (ext == ".pgm") return RasterFormat::pgm;
  if (ext == ".pfm") return RasterFormat::pfm;
  throw Error(ErrorKind::invalid_argument, "unsupported output extension: " + path.string());
}

std::vector<std::uint8_t> encode_image(const GrayImage& img, RasterFormat format,
                                       SampleDepth depth) {
  switch (format) {
    case RasterFormat::png: return encode_png(img, depth);
    case RasterFormat::pgm: return encode_pgm(img, depth);
    case RasterFormat::pfm: return encode_pfm(img.height(), img.width(), img.pixels());
  }
  throw Error(ErrorKind::invalid_argument, "unknown raster format");
}

void save_image(const GrayImage& img, const std::filesystem::path& path, SampleDepth depth) {
  write_file_atomic(path, encode_image(img, format_for_path(path), depth));
}

std::vector<std::uint8_t> encode_pfm(int height, int width, std::span<const float> values) {
  const std::string header =
      "Pf\n" + std::to_string(width) + " " + std::to_string(height) + "\n-1.0\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + values.size() * 4);
  for (int row = height - 1; row >= 0; --row) {
    for (int col = 0; col < width; ++col) {
      const auto bits =
          std::bit_cast<std::uint32_t>(values[static_cast<std::size_t>(row) * width + col]);
      for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
    }
  }
  return out;
}

SaliencyMap decode_saliency(std::span<const std::uint8_t> bytes) {
  FloatRaster raster = decode_pfm(bytes);
  for (float v : raster.values) {
    if (std::isnan(v)) throw Error(ErrorKind::format, "saliency map contains NaN");
    if (!std::isfinite(v)) throw Error(ErrorKind::format, "saliency map contains infinity");
    if (v < 0.0f) throw Error(ErrorKind::format, "saliency map contains a negative value");
  }
  return SaliencyMap(raster.height, raster.width, std::move(raster.values));
}

SaliencyMap load_saliency(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return decode_saliency(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

void save_saliency(const SaliencyMap& map, const std::filesystem::path& path) {
  write_file_atomic(path, encode_pfm(map.height(), map.width(), map.values()));
}

}  // namespace mammosynth
