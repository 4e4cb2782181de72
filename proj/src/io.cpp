#include "frn/io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <memory>

namespace frn {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_magic(const std::string& path, const unsigned char* magic, size_t n) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open file: " + path);
  unsigned char buf[8] = {};
  const size_t got = std::fread(buf, 1, n, f.get());
  return got == n && std::memcmp(buf, magic, n) == 0;
}

Image from_interleaved(const std::vector<unsigned char>& data, int h, int w, int ch) {
  Image img(h, w, ch == 1 ? Image::ColorSpace::GRAY : Image::ColorSpace::RGB);
  const int cs = img.channels();
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < cs; ++c)
        img.px(c, y * w + x) = data[(static_cast<size_t>(y) * w + x) * ch + c] / 255.0;
  return img;
}

std::vector<unsigned char> to_interleaved(const Image& img) {
  const int ch = img.channels();
  std::vector<unsigned char> data(static_cast<size_t>(img.h) * img.w * ch);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      for (int c = 0; c < ch; ++c)
        data[(static_cast<size_t>(y) * img.w + x) * ch + c] = quantize8(img.px(c, y * img.w + x));
  return data;
}

// ---- PNG ----

Image load_png(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open file: " + path);

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("corrupt or unsupported PNG: " + path);
  }

  png_init_io(png, f.get());
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);

  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int ch = png_get_channels(png, info);
  if (ch != 1 && ch != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError("unsupported PNG channel count: " + std::to_string(ch));
  }

  std::vector<unsigned char> data(static_cast<size_t>(h) * w * ch);
  std::vector<png_bytep> rows(h);
  for (int y = 0; y < h; ++y) rows[y] = data.data() + static_cast<size_t>(y) * w * ch;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  return from_interleaved(data, h, w, ch);
}

void save_png(const Image& img, const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) throw IoError("cannot open file for writing: " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path);
  }

  png_init_io(png, f.get());
  const int ch = img.channels();
  png_set_IHDR(png, info, img.w, img.h, 8,
               ch == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);

  auto data = to_interleaved(img);
  std::vector<png_bytep> rows(img.h);
  for (int y = 0; y < img.h; ++y) rows[y] = data.data() + static_cast<size_t>(y) * img.w * ch;
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// ---- JPEG ----

struct JpegErrorMgr {
  jpeg_error_mgr pub;
  std::jmp_buf jmp;
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
  std::longjmp(err->jmp, 1);
}

Image decode_jpeg_mem(const unsigned char* buf, unsigned long len, const std::string& what) {
  jpeg_decompress_struct cinfo;
  JpegErrorMgr jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jmp)) {
    jpeg_destroy_decompress(&cinfo);
    throw FormatError("corrupt or unsupported JPEG: " + what);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, const_cast<unsigned char*>(buf), len);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_start_decompress(&cinfo);

  const int w = static_cast<int>(cinfo.output_width);
  const int h = static_cast<int>(cinfo.output_height);
  const int ch = cinfo.output_components;
  std::vector<unsigned char> data(static_cast<size_t>(h) * w * ch);
  while (cinfo.output_scanline < cinfo.output_height) {
    unsigned char* row = data.data() + static_cast<size_t>(cinfo.output_scanline) * w * ch;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return from_interleaved(data, h, w, ch);
}

Image load_jpeg(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) throw IoError("cannot open file: " + path);
  std::fseek(f.get(), 0, SEEK_END);
  const long size = std::ftell(f.get());
  std::fseek(f.get(), 0, SEEK_SET);
  if (size <= 0) throw FormatError("empty file: " + path);
  std::vector<unsigned char> buf(static_cast<size_t>(size));
  if (std::fread(buf.data(), 1, buf.size(), f.get()) != buf.size())
    throw IoError("short read: " + path);
  return decode_jpeg_mem(buf.data(), static_cast<unsigned long>(buf.size()), path);
}

}  // namespace

Image load_image(const std::string& path) {
  static const unsigned char png_magic[4] = {0x89, 'P', 'N', 'G'};
  static const unsigned char jpg_magic[2] = {0xFF, 0xD8};
  if (has_magic(path, png_magic, 4)) return load_png(path);
  if (has_magic(path, jpg_magic, 2)) return load_jpeg(path);
  throw FormatError("unsupported image format (expected PNG or JPEG): " + path);
}

void save_image(const Image& img, const std::string& path) {
  check_image(img, "save_image");
  save_png(img, path);
}

Image jpeg_roundtrip(const Image& img, int quality) {
  check_image(img, "jpeg_roundtrip");
  if (quality < 1 || quality > 100)
    throw std::invalid_argument("jpeg_roundtrip: quality must be in 1..100");

  jpeg_compress_struct cinfo;
  JpegErrorMgr jerr;
  cinfo.err = jpeg_std_error(&jerr.pub);
  jerr.pub.error_exit = jpeg_error_exit;

  unsigned char* out_buf = nullptr;
  unsigned long out_len = 0;
  if (setjmp(jerr.jmp)) {
    jpeg_destroy_compress(&cinfo);
    free(out_buf);
    throw IoError("JPEG encoding failed");
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &out_buf, &out_len);

  const int ch = img.channels();
  cinfo.image_width = static_cast<JDIMENSION>(img.w);
  cinfo.image_height = static_cast<JDIMENSION>(img.h);
  cinfo.input_components = ch;
  cinfo.in_color_space = ch == 1 ? JCS_GRAYSCALE : JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  // 4:4:4 so quality 100 round trips nearly losslessly
  for (int c = 0; c < cinfo.num_components; ++c) {
    cinfo.comp_info[c].h_samp_factor = 1;
    cinfo.comp_info[c].v_samp_factor = 1;
  }
  jpeg_start_compress(&cinfo, TRUE);

  auto data = to_interleaved(img);
  while (cinfo.next_scanline < cinfo.image_height) {
    unsigned char* row = data.data() + static_cast<size_t>(cinfo.next_scanline) * img.w * ch;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);

  Image out = decode_jpeg_mem(out_buf, out_len, "<memory>");
  free(out_buf);
  return out;
}

}  // namespace frn
