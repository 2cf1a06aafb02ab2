// SPDX-License-Identifier: Apache-2.0
#pragma once

// PNG / JPEG codecs on top of libpng and libjpeg.
//
// Loading: PNG gray -> 1 channel, PNG RGB / palette -> 3 channels, alpha is
// dropped, 16-bit samples are rescaled to 8 bits as round(v * 255 / 65535).
// JPEG gray -> 1 channel, JPEG colour -> 3 channels (RGB); libjpeg warnings
// such as a premature end of data are treated as decode errors.
//
// Saving: PNG only, zlib level 6 with adaptive filtering and no time chunk,
// so identical rasters always encode to identical bytes.

#include <png.h>
#include <jpeglib.h>

#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "sgm/error.hpp"
#include "sgm/image.hpp"

namespace sgm {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DecodeError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw DecodeError("read failure on " + path.string());
  return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

enum class ImageFormat { Png, Jpeg, Unknown };

inline ImageFormat sniff_format(const std::vector<std::uint8_t>& bytes) noexcept {
  static constexpr std::uint8_t png_magic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_magic, 8) == 0) return ImageFormat::Png;
  if (bytes.size() >= 3 && bytes[0] == 0xFF && bytes[1] == 0xD8 && bytes[2] == 0xFF) return ImageFormat::Jpeg;
  return ImageFormat::Unknown;
}

struct ImageInfo {
  int width = 0;
  int height = 0;
  int channels = 0;
};

namespace detail {

struct PngReadState {
  const std::vector<std::uint8_t>* bytes;
  std::size_t pos;
};

inline void png_read_from_memory(png_structp png, png_bytep out, png_size_t len) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->pos + len > st->bytes->size()) png_error(png, "unexpected end of data");
  std::memcpy(out, st->bytes->data() + st->pos, len);
  st->pos += len;
}

struct PngDecoded {
  ImageInfo info;
  int bit_depth = 8;
  std::vector<std::uint8_t> rows;  // tightly packed, bit_depth 8 or 16 (big endian)
};

/// Returns an empty string on success, otherwise the libpng error message.
inline std::string png_decode(const std::vector<std::uint8_t>& bytes, bool header_only, PngDecoded& out) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) return "png_create_read_struct failed";
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return "png_create_info_struct failed";
  }
  PngReadState state{&bytes, 0};
  std::vector<png_bytep> row_ptrs;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    return "corrupt or truncated PNG";
  }
  png_set_read_fn(png, &state, png_read_from_memory);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  out.info.width = int(png_get_image_width(png, info));
  out.info.height = int(png_get_image_height(png, info));
  out.info.channels = int(png_get_channels(png, info));
  out.bit_depth = png_get_bit_depth(png, info);
  if (!header_only) {
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    out.rows.resize(rowbytes * std::size_t(out.info.height));
    row_ptrs.resize(std::size_t(out.info.height));
    for (std::size_t y = 0; y < row_ptrs.size(); ++y) row_ptrs[y] = out.rows.data() + y * rowbytes;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return {};
}

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

inline void jpeg_emit_message(j_common_ptr cinfo, int level) {
  if (level < 0) jpeg_error_exit(cinfo);  // warnings (e.g. truncated data) are fatal here
}

struct JpegDecoded {
  ImageInfo info;
  std::vector<std::uint8_t> pixels;
};

inline std::string jpeg_decode(const std::vector<std::uint8_t>& bytes, bool header_only, JpegDecoded& out) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager err;
  cinfo.err = jpeg_std_error(&err.base);
  err.base.error_exit = jpeg_error_exit;
  err.base.emit_message = jpeg_emit_message;
  err.message[0] = '\0';
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    return std::string("JPEG decode failed: ") + err.message;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  const bool gray = cinfo.jpeg_color_space == JCS_GRAYSCALE;
  cinfo.out_color_space = gray ? JCS_GRAYSCALE : JCS_RGB;
  out.info.width = int(cinfo.image_width);
  out.info.height = int(cinfo.image_height);
  out.info.channels = gray ? 1 : 3;
  if (!header_only) {
    jpeg_start_decompress(&cinfo);
    const std::size_t stride = std::size_t(cinfo.output_width) * std::size_t(cinfo.output_components);
    out.pixels.resize(stride * cinfo.output_height);
    while (cinfo.output_scanline < cinfo.output_height) {
      JSAMPROW row = out.pixels.data() + std::size_t(cinfo.output_scanline) * stride;
      jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
  }
  jpeg_destroy_decompress(&cinfo);
  return {};
}

}  // namespace detail

inline Image decode_image(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  switch (sniff_format(bytes)) {
    case ImageFormat::Png: {
      detail::PngDecoded dec;
      if (auto msg = detail::png_decode(bytes, false, dec); !msg.empty()) throw DecodeError(name + ": " + msg);
      if (dec.info.channels != 1 && dec.info.channels != 3)
        throw DecodeError(name + ": unsupported PNG channel layout");
      const std::size_t samples = std::size_t(dec.info.width) * std::size_t(dec.info.height) * std::size_t(dec.info.channels);
      if (dec.bit_depth == 16) {
        std::vector<std::uint8_t> px(samples);
        for (std::size_t i = 0; i < samples; ++i) {
          const std::uint32_t v = (std::uint32_t(dec.rows[2 * i]) << 8) | dec.rows[2 * i + 1];
          px[i] = std::uint8_t((v * 255u + 32767u) / 65535u);
        }
        return Image(dec.info.width, dec.info.height, dec.info.channels, std::move(px));
      }
      return Image(dec.info.width, dec.info.height, dec.info.channels, std::move(dec.rows));
    }
    case ImageFormat::Jpeg: {
      detail::JpegDecoded dec;
      if (auto msg = detail::jpeg_decode(bytes, false, dec); !msg.empty()) throw DecodeError(name + ": " + msg);
      return Image(dec.info.width, dec.info.height, dec.info.channels, std::move(dec.pixels));
    }
    case ImageFormat::Unknown: break;
  }
  throw DecodeError(name + ": unsupported image format (expected PNG or JPEG)");
}

inline Image load_image(const std::filesystem::path& path) {
  return decode_image(read_file_bytes(path), path.string());
}

/// Reads only the header: extent and the channel count load_image would produce.
inline ImageInfo probe_image(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  const std::string name = path.string();
  switch (sniff_format(bytes)) {
    case ImageFormat::Png: {
      detail::PngDecoded dec;
      if (auto msg = detail::png_decode(bytes, true, dec); !msg.empty()) throw DecodeError(name + ": " + msg);
      return dec.info;
    }
    case ImageFormat::Jpeg: {
      detail::JpegDecoded dec;
      if (auto msg = detail::jpeg_decode(bytes, true, dec); !msg.empty()) throw DecodeError(name + ": " + msg);
      return dec.info;
    }
    case ImageFormat::Unknown: break;
  }
  throw DecodeError(name + ": unsupported image format (expected PNG or JPEG)");
}

namespace detail {

inline void png_write_to_memory(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

inline void png_flush_noop(png_structp) {}

/// Encodes 8- or 16-bit (big-endian) gray / RGB rows.
inline std::vector<std::uint8_t> png_encode(int width, int height, int channels, int bit_depth,
                                            const std::uint8_t* rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> row_ptrs(std::size_t(height), nullptr);
  const std::size_t stride = std::size_t(width) * std::size_t(channels) * std::size_t(bit_depth / 8);
  for (std::size_t y = 0; y < row_ptrs.size(); ++y) row_ptrs[y] = const_cast<png_bytep>(rows + y * stride);

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encoding failed");
  }
  png_set_write_fn(png, &out, png_write_to_memory, png_flush_noop);
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, png_uint_32(width), png_uint_32(height), bit_depth,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_png(const Image& image) {
  return detail::png_encode(image.width(), image.height(), image.channels(), 8, image.data().data());
}

inline void save_image(const Image& image, const std::filesystem::path& path) {
  write_file_bytes(path, encode_png(image));
}

}  // namespace sgm
