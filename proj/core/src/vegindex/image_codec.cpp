#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "fieldlink/common/error.hpp"
#include "fieldlink/vegindex/image.hpp"

namespace fieldlink::vegindex {

RgbImage::RgbImage(int width, int height)
    : RgbImage(width, height,
               std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                         static_cast<std::size_t>(std::max(height, 0)) * 3)) {}

RgbImage::RgbImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width < 1 || height < 1) {
    throw Error(Errc::invalid_argument, "image dimensions must be positive");
  }
  if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3) {
    throw Error(Errc::invalid_argument, "pixel buffer length does not match width * height * 3");
  }
}

namespace {

constexpr std::uint8_t kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

struct PngReadSource {
  std::span<const std::uint8_t> bytes;
  std::size_t offset = 0;
};

struct PngErrorState {
  std::jmp_buf jump;
  char message[256] = {};
};

void png_error_handler(png_structp png, png_const_charp msg) {
  auto* state = static_cast<PngErrorState*>(png_get_error_ptr(png));
  std::snprintf(state->message, sizeof state->message, "%s", msg);
  std::longjmp(state->jump, 1);
}

void png_warning_handler(png_structp, png_const_charp) {}

void png_read_from_span(png_structp png, png_bytep out, png_size_t length) {
  auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
  if (src->offset + length > src->bytes.size()) {
    png_error(png, "unexpected end of PNG stream");
  }
  std::memcpy(out, src->bytes.data() + src->offset, length);
  src->offset += length;
}

// Everything that must survive a longjmp lives in the caller's frame.
struct PngDecodeBuffers {
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
};

bool decode_png_into(std::span<const std::uint8_t> bytes, PngDecodeBuffers& buf, int& width, int& height,
                     PngErrorState& err) {
  PngReadSource src{bytes, 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler, png_warning_handler);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  if (setjmp(err.jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_set_read_fn(png, &src, png_read_from_span);
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int color_type = png_get_color_type(png, info);
  const int bit_depth = png_get_bit_depth(png, info);

  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_set_interlace_handling(png);
  png_read_update_info(png, info);

  if (png_get_rowbytes(png, info) != static_cast<png_size_t>(w) * 3) {
    png_error(png, "unsupported PNG pixel layout");
  }
  if (w == 0 || h == 0 || w > 1u << 15 || h > 1u << 15) {
    png_error(png, "PNG dimensions out of range");
  }
  buf.pixels.resize(static_cast<std::size_t>(w) * h * 3);
  buf.rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) buf.rows[y] = buf.pixels.data() + static_cast<std::size_t>(y) * w * 3;
  png_read_image(png, buf.rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  width = static_cast<int>(w);
  height = static_cast<int>(h);
  return true;
}

RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  PngDecodeBuffers buf;
  PngErrorState err;
  int width = 0;
  int height = 0;
  if (!decode_png_into(bytes, buf, width, height, err)) {
    throw Error(Errc::decode_error, std::string("PNG decode failed: ") + (err.message[0] ? err.message : "unknown error"));
  }
  return RgbImage(width, height, std::move(buf.pixels));
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX] = {};
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* mgr = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, mgr->message);
  std::longjmp(mgr->jump, 1);
}

void jpeg_silent(j_common_ptr) {}

bool decode_jpeg_into(std::span<const std::uint8_t> bytes, std::vector<std::uint8_t>& pixels, int& width,
                      int& height, JpegErrorManager& err) {
  jpeg_decompress_struct cinfo;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.output_message = jpeg_silent;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  if (cinfo.output_components != 3) {
    jpeg_destroy_decompress(&cinfo);
    std::snprintf(err.message, sizeof err.message, "unsupported JPEG colour layout");
    return false;
  }
  const auto w = cinfo.output_width;
  const auto h = cinfo.output_height;
  pixels.resize(static_cast<std::size_t>(w) * h * 3);
  while (cinfo.output_scanline < h) {
    JSAMPROW row = pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  width = static_cast<int>(w);
  height = static_cast<int>(h);
  return true;
}

RgbImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  std::vector<std::uint8_t> pixels;
  JpegErrorManager err;
  int width = 0;
  int height = 0;
  if (!decode_jpeg_into(bytes, pixels, width, height, err)) {
    throw Error(Errc::decode_error, std::string("JPEG decode failed: ") + (err.message[0] ? err.message : "unknown error"));
  }
  return RgbImage(width, height, std::move(pixels));
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

bool encode_png_into(const RgbImage& image, std::vector<std::uint8_t>& out, std::vector<png_bytep>& rows,
                     PngErrorState& err) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_handler, png_warning_handler);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(err.jump)) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_compression_level(png, 1);  // fastest deflate
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

}  // namespace

RgbImage decode_rgb(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) {
    return decode_png(bytes);
  }
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) {
    return decode_jpeg(bytes);
  }
  throw Error(Errc::decode_error, "unsupported image format (expected PNG or JPEG)");
}

std::vector<std::uint8_t> encode_png(const RgbImage& image) {
  if (image.empty()) throw Error(Errc::invalid_argument, "cannot encode an empty image");
  std::vector<std::uint8_t> out;
  // libpng takes non-const row pointers even when writing.
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  auto* base = const_cast<std::uint8_t*>(image.pixels().data());
  for (int y = 0; y < image.height(); ++y) rows[y] = base + static_cast<std::size_t>(y) * image.width() * 3;
  PngErrorState err;
  if (!encode_png_into(image, out, rows, err)) {
    throw Error(Errc::io_error, std::string("PNG encode failed: ") + err.message);
  }
  return out;
}

RgbImage resize_bilinear(const RgbImage& image, int width, int height) {
  if (image.width() == width && image.height() == height) return image;
  RgbImage out(width, height);
  const double sx = static_cast<double>(image.width()) / width;
  const double sy = static_cast<double>(image.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(image.height() - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, image.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(image.width() - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, image.width() - 1);
      const double wx = fx - x0;
      auto* dst = out.at(x, y);
      for (int c = 0; c < 3; ++c) {
        const double top = image.at(x0, y0)[c] * (1 - wx) + image.at(x1, y0)[c] * wx;
        const double bottom = image.at(x0, y1)[c] * (1 - wx) + image.at(x1, y1)[c] * wx;
        dst[c] = static_cast<std::uint8_t>(std::lround(top * (1 - wy) + bottom * wy));
      }
    }
  }
  return out;
}

}  // namespace fieldlink::vegindex
