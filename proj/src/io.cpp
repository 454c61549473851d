// Copyright 2026 The Afford Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "afford/io.hpp"

#include <png.h>

#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "afford/errors.hpp"

namespace afford::io {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

File open_or_throw(const fs::path& path, const char* mode) {
  File f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

// libpng reports errors via longjmp; every use below sets up setjmp first.
struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  PngReader() {
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png) info = png_create_info_struct(png);
  }
  ~PngReader() { png_destroy_read_struct(&png, &info, nullptr); }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  PngWriter() {
    png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (png) info = png_create_info_struct(png);
  }
  ~PngWriter() { png_destroy_write_struct(&png, &info); }
};

bool is_png(std::FILE* f) {
  png_byte sig[8];
  if (std::fread(sig, 1, 8, f) != 8) return false;
  return png_sig_cmp(sig, 0, 8) == 0;
}

void write_gray(const fs::path& path, int width, int height, int bit_depth,
                const std::vector<png_bytep>& rows) {
  const fs::path tmp = path.string() + ".tmp";
  {
    File f = open_or_throw(tmp, "wb");
    PngWriter w;
    if (!w.png || !w.info) throw IoError("libpng init failed");
    if (setjmp(png_jmpbuf(w.png))) throw IoError("libpng write failed: " + path.string());
    png_init_io(w.png, f.get());
    png_set_IHDR(w.png, w.info, static_cast<png_uint_32>(width),
                 static_cast<png_uint_32>(height), bit_depth, PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(w.png, w.info);
    if (bit_depth == 16) png_set_swap(w.png);
    png_write_image(w.png, const_cast<png_bytepp>(rows.data()));
    png_write_end(w.png, nullptr);
  }
  fs::rename(tmp, path);
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw IoError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::optional<PngInfo> png_info(const fs::path& path) {
  File f(std::fopen(path.c_str(), "rb"));
  if (!f || !is_png(f.get())) return std::nullopt;
  PngReader r;
  if (!r.png || !r.info) return std::nullopt;
  if (setjmp(png_jmpbuf(r.png))) return std::nullopt;
  png_init_io(r.png, f.get());
  png_set_sig_bytes(r.png, 8);
  png_read_info(r.png, r.info);
  return PngInfo{static_cast<int>(png_get_image_width(r.png, r.info)),
                 static_cast<int>(png_get_image_height(r.png, r.info)),
                 png_get_bit_depth(r.png, r.info), png_get_channels(r.png, r.info)};
}

std::vector<std::uint16_t> read_png_gray16(const fs::path& path, int& width, int& height) {
  File f = open_or_throw(path, "rb");
  if (!is_png(f.get())) throw IoError(path.string() + " is not a PNG file");
  PngReader r;
  if (!r.png || !r.info) throw IoError("libpng init failed");
  if (setjmp(png_jmpbuf(r.png))) throw IoError("libpng read failed: " + path.string());
  png_init_io(r.png, f.get());
  png_set_sig_bytes(r.png, 8);
  png_read_info(r.png, r.info);
  if (png_get_color_type(r.png, r.info) != PNG_COLOR_TYPE_GRAY ||
      png_get_bit_depth(r.png, r.info) != 16)
    throw IoError(path.string() + " is not a 16-bit single-channel PNG");
  png_set_swap(r.png);  // network order to host little-endian
  png_read_update_info(r.png, r.info);
  width = static_cast<int>(png_get_image_width(r.png, r.info));
  height = static_cast<int>(png_get_image_height(r.png, r.info));
  std::vector<std::uint16_t> values(static_cast<std::size_t>(width) * height);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y)
    rows[y] = reinterpret_cast<png_bytep>(values.data() + static_cast<std::size_t>(y) * width);
  png_read_image(r.png, rows.data());
  png_read_end(r.png, nullptr);
  return values;
}

void write_png_gray16(const fs::path& path, int width, int height,
                      const std::vector<std::uint16_t>& values) {
  if (values.size() != static_cast<std::size_t>(width) * height)
    throw SizeMismatch("depth buffer does not match its dimensions");
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  auto* base = const_cast<std::uint16_t*>(values.data());
  for (int y = 0; y < height; ++y)
    rows[y] = reinterpret_cast<png_bytep>(base + static_cast<std::size_t>(y) * width);
  write_gray(path, width, height, 16, rows);
}

void write_mask_png(const fs::path& path, const mask::BinaryMask& m) {
  std::vector<std::uint8_t> pixels(m.size());
  const auto bits = m.bits();
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = bits[i] ? 255 : 0;
  std::vector<png_bytep> rows(static_cast<std::size_t>(m.height()));
  for (int y = 0; y < m.height(); ++y)
    rows[y] = pixels.data() + static_cast<std::size_t>(y) * m.width();
  write_gray(path, m.width(), m.height(), 8, rows);
}

geom::DepthImage<double> load_depth_png(const fs::path& path) {
  int width = 0, height = 0;
  const auto raw = read_png_gray16(path, width, height);
  std::vector<double> meters(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) meters[i] = raw[i] * 1e-3;
  return geom::DepthImage<double>::from_values(width, height, std::move(meters));
}

}  // namespace afford::io
