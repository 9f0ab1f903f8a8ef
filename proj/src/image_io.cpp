#include "suimkit/image_io.hpp"

#include <jpeglib.h>
#include <png.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <csetjmp>
#include <fstream>
#include <vector>

namespace suim {

namespace {

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const void* data, size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(static_cast<const char*>(data), std::streamsize(size));
  if (!out) throw IoError("write failed for '" + path + "'");
}

bool has_suffix(const std::string& s, const char* suffix) {
  size_t n = std::strlen(suffix);
  return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

// ---- PNG (libpng simplified API) ----

RgbImage read_png(const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw IoError("png read failed for '" + path + "': " + img.message);
  img.format = PNG_FORMAT_RGB;
  RgbImage out(int(img.width), int(img.height));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw IoError("png read failed for '" + path + "': " + msg);
  }
  return out;
}

void write_png_rgb(const RgbImage& image, const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = png_uint_32(image.width);
  img.height = png_uint_32(image.height);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.pixels.data(), 0,
                               nullptr))
    throw IoError("png write failed for '" + path + "': " + img.message);
}

GrayImage read_png_gray(const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw IoError("png read failed for '" + path + "': " + img.message);
  img.format = PNG_FORMAT_GRAY;
  GrayImage out(int(img.width), int(img.height));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    std::string msg = img.message;
    png_image_free(&img);
    throw IoError("png read failed for '" + path + "': " + msg);
  }
  return out;
}

void write_png_gray(const GrayImage& image, const std::string& path) {
  png_image img;
  std::memset(&img, 0, sizeof(img));
  img.version = PNG_IMAGE_VERSION;
  img.width = png_uint_32(image.width);
  img.height = png_uint_32(image.height);
  img.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.pixels.data(), 0,
                               nullptr))
    throw IoError("png write failed for '" + path + "': " + img.message);
}

// ---- JPEG ----

struct JpegErr {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
};

void jpeg_error_trap(j_common_ptr cinfo) {
  std::longjmp(static_cast<JpegErr*>(reinterpret_cast<void*>(cinfo->err))->jump, 1);
}

RgbImage read_jpeg(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open '" + path + "'");

  jpeg_decompress_struct cinfo;
  JpegErr err;
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_trap;
  RgbImage out;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    std::fclose(f);
    throw IoError("jpeg decode failed for '" + path + "'");
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f);
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out = RgbImage(int(cinfo.output_width), int(cinfo.output_height));
  while (cinfo.output_scanline < cinfo.output_height) {
    uint8_t* row = out.pixels.data() +
                   size_t(cinfo.output_scanline) * out.width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  std::fclose(f);
  return out;
}

// ---- PPM / PGM (binary P6 / P5, maxval 255) ----

size_t parse_pnm_header(const std::vector<uint8_t>& bytes, const std::string& path,
                        char expect, int& width, int& height) {
  size_t pos = 2;
  auto next_int = [&]() -> int {
    // Skip whitespace and '#' comments between header fields.
    while (pos < bytes.size()) {
      if (std::isspace(bytes[pos])) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    int v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos] - '0');
      ++pos;
      any = true;
    }
    if (!any) throw IoError("malformed pnm header in '" + path + "'");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != expect)
    throw IoError("not a P" + std::string(1, expect) + " file: '" + path + "'");
  width = next_int();
  height = next_int();
  int maxval = next_int();
  if (maxval != 255)
    throw IoError("unsupported pnm maxval in '" + path + "'");
  if (pos >= bytes.size() || !std::isspace(bytes[pos]))
    throw IoError("malformed pnm header in '" + path + "'");
  return pos + 1;  // single whitespace before raster data
}

RgbImage read_ppm(const std::string& path) {
  auto bytes = read_file(path);
  int w = 0, h = 0;
  size_t off = parse_pnm_header(bytes, path, '6', w, h);
  RgbImage out(w, h);
  if (bytes.size() - off < out.pixels.size())
    throw IoError("truncated ppm '" + path + "'");
  std::memcpy(out.pixels.data(), bytes.data() + off, out.pixels.size());
  return out;
}

void write_ppm(const RgbImage& image, const std::string& path) {
  std::string header = "P6\n" + std::to_string(image.width) + " " +
                       std::to_string(image.height) + "\n255\n";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << header;
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            std::streamsize(image.pixels.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

GrayImage read_pgm(const std::string& path) {
  auto bytes = read_file(path);
  int w = 0, h = 0;
  size_t off = parse_pnm_header(bytes, path, '5', w, h);
  GrayImage out(w, h);
  if (bytes.size() - off < out.pixels.size())
    throw IoError("truncated pgm '" + path + "'");
  std::memcpy(out.pixels.data(), bytes.data() + off, out.pixels.size());
  return out;
}

void write_pgm(const GrayImage& image, const std::string& path) {
  std::string header = "P5\n" + std::to_string(image.width) + " " +
                       std::to_string(image.height) + "\n255\n";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << header;
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            std::streamsize(image.pixels.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

// ---- BMP (uncompressed 24/32-bit) ----

uint32_t le32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}
uint16_t le16(const uint8_t* p) { return uint16_t(p[0]) | uint16_t(p[1]) << 8; }

RgbImage read_bmp(const std::string& path) {
  auto bytes = read_file(path);
  if (bytes.size() < 54 || bytes[0] != 'B' || bytes[1] != 'M')
    throw IoError("not a bmp file: '" + path + "'");
  uint32_t data_off = le32(&bytes[10]);
  uint32_t header_size = le32(&bytes[14]);
  if (header_size < 40) throw IoError("unsupported bmp header in '" + path + "'");
  int32_t w = int32_t(le32(&bytes[18]));
  int32_t h = int32_t(le32(&bytes[22]));
  uint16_t bpp = le16(&bytes[28]);
  uint32_t compression = le32(&bytes[30]);
  if ((bpp != 24 && bpp != 32) || compression != 0)
    throw IoError("unsupported bmp variant in '" + path + "' (need uncompressed 24/32-bit)");
  bool bottom_up = h > 0;
  int height = bottom_up ? h : -h;
  int width = w;
  if (width <= 0 || height <= 0) throw IoError("bad bmp dimensions in '" + path + "'");

  size_t bytes_pp = bpp / 8;
  size_t row_stride = (size_t(width) * bytes_pp + 3) & ~size_t(3);
  if (bytes.size() < data_off + row_stride * height)
    throw IoError("truncated bmp '" + path + "'");

  RgbImage out(width, height);
  for (int y = 0; y < height; ++y) {
    int src_y = bottom_up ? height - 1 - y : y;
    const uint8_t* row = bytes.data() + data_off + size_t(src_y) * row_stride;
    for (int x = 0; x < width; ++x) {
      const uint8_t* px = row + size_t(x) * bytes_pp;
      out.set(x, y, {px[2], px[1], px[0]});  // BGR storage
    }
  }
  return out;
}

void write_bmp(const RgbImage& image, const std::string& path) {
  size_t row_stride = (size_t(image.width) * 3 + 3) & ~size_t(3);
  size_t data_size = row_stride * image.height;
  std::vector<uint8_t> out(54 + data_size, 0);
  auto put32 = [&](size_t at, uint32_t v) {
    out[at] = uint8_t(v);
    out[at + 1] = uint8_t(v >> 8);
    out[at + 2] = uint8_t(v >> 16);
    out[at + 3] = uint8_t(v >> 24);
  };
  out[0] = 'B';
  out[1] = 'M';
  put32(2, uint32_t(out.size()));
  put32(10, 54);
  put32(14, 40);
  put32(18, uint32_t(image.width));
  put32(22, uint32_t(image.height));
  out[26] = 1;                  // planes
  out[28] = 24;                 // bpp
  put32(34, uint32_t(data_size));
  for (int y = 0; y < image.height; ++y) {
    uint8_t* row = out.data() + 54 + row_stride * size_t(image.height - 1 - y);
    for (int x = 0; x < image.width; ++x) {
      Rgb c = image.at(x, y);
      row[x * 3] = c.b;
      row[x * 3 + 1] = c.g;
      row[x * 3 + 2] = c.r;
    }
  }
  write_file(path, out.data(), out.size());
}

enum class Format { Png, Jpeg, Bmp, Ppm, Pgm, Unknown };

Format sniff(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  uint8_t magic[8] = {0};
  in.read(reinterpret_cast<char*>(magic), sizeof(magic));
  if (magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G')
    return Format::Png;
  if (magic[0] == 0xFF && magic[1] == 0xD8) return Format::Jpeg;
  if (magic[0] == 'B' && magic[1] == 'M') return Format::Bmp;
  if (magic[0] == 'P' && magic[1] == '6') return Format::Ppm;
  if (magic[0] == 'P' && magic[1] == '5') return Format::Pgm;
  return Format::Unknown;
}

}  // namespace

RgbImage read_image(const std::string& path) {
  switch (sniff(path)) {
    case Format::Png: return read_png(path);
    case Format::Jpeg: return read_jpeg(path);
    case Format::Bmp: return read_bmp(path);
    case Format::Ppm: return read_ppm(path);
    case Format::Pgm: {
      GrayImage g = read_pgm(path);
      RgbImage out(g.width, g.height);
      for (size_t i = 0; i < g.pixels.size(); ++i) {
        out.pixels[3 * i] = g.pixels[i];
        out.pixels[3 * i + 1] = g.pixels[i];
        out.pixels[3 * i + 2] = g.pixels[i];
      }
      return out;
    }
    case Format::Unknown: break;
  }
  throw IoError("unrecognized image format in '" + path + "'");
}

void write_image(const RgbImage& image, const std::string& path) {
  if (image.empty()) throw ShapeError("write_image: empty image");
  if (has_suffix(path, ".ppm")) write_ppm(image, path);
  else if (has_suffix(path, ".bmp")) write_bmp(image, path);
  else write_png_rgb(image, path);
}

GrayImage read_gray(const std::string& path) {
  switch (sniff(path)) {
    case Format::Pgm: return read_pgm(path);
    case Format::Png: return read_png_gray(path);
    default: {
      // Fall back to RGB decode + average.
      RgbImage rgb = read_image(path);
      GrayImage out(rgb.width, rgb.height);
      for (size_t i = 0; i < out.pixels.size(); ++i) {
        int v = rgb.pixels[3 * i] + rgb.pixels[3 * i + 1] + rgb.pixels[3 * i + 2];
        out.pixels[i] = uint8_t(v / 3);
      }
      return out;
    }
  }
}

void write_gray(const GrayImage& image, const std::string& path) {
  if (image.width <= 0 || image.height <= 0)
    throw ShapeError("write_gray: empty image");
  if (has_suffix(path, ".pgm")) write_pgm(image, path);
  else write_png_gray(image, path);
}

}  // namespace suim
