/* Copyright 2026 The PMFNet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include "pmf/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>
#include <vector>

namespace pmf {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void put(Image& img, int x, int y, const Rgb& c) {
  if (x < 0 || y < 0 || x >= img.width || y >= img.height) return;
  for (int ch = 0; ch < 3; ++ch) img.at(y, x, ch) = c[ch];
}

}  // namespace

Image make_image(int width, int height, const Rgb& fill) {
  Image img(height, width, 3, 1);
  for (int ch = 0; ch < 3; ++ch) img.data.col(ch).setConstant(fill[ch]);
  return img;
}

void draw_line(Image& img, double x0, double y0, double x1, double y1,
               double thickness, const Rgb& color) {
  const double r = 0.5 * thickness;
  const double dx = x1 - x0, dy = y1 - y0;
  const double len_sq = dx * dx + dy * dy;
  const int xa = static_cast<int>(std::floor(std::min(x0, x1) - r - 1));
  const int xb = static_cast<int>(std::ceil(std::max(x0, x1) + r + 1));
  const int ya = static_cast<int>(std::floor(std::min(y0, y1) - r - 1));
  const int yb = static_cast<int>(std::ceil(std::max(y0, y1) + r + 1));
  for (int y = std::max(ya, 0); y <= std::min(yb, img.height - 1); ++y) {
    for (int x = std::max(xa, 0); x <= std::min(xb, img.width - 1); ++x) {
      const double px = x + 0.5, py = y + 0.5;
      double t = len_sq > 0 ? ((px - x0) * dx + (py - y0) * dy) / len_sq : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double qx = x0 + t * dx - px, qy = y0 + t * dy - py;
      if (qx * qx + qy * qy <= r * r) put(img, x, y, color);
    }
  }
}

void fill_circle(Image& img, double cx, double cy, double radius, const Rgb& color) {
  draw_line(img, cx, cy, cx, cy, 2.0 * radius, color);
}

void draw_rect(Image& img, const Box& b, double thickness, const Rgb& color) {
  draw_line(img, b.x1, b.y1, b.x2, b.y1, thickness, color);
  draw_line(img, b.x2, b.y1, b.x2, b.y2, thickness, color);
  draw_line(img, b.x2, b.y2, b.x1, b.y2, thickness, color);
  draw_line(img, b.x1, b.y2, b.x1, b.y1, thickness, color);
}

Image grid_to_image(const Grid& grid, int scale) {
  const int h = static_cast<int>(grid.rows()), w = static_cast<int>(grid.cols());
  Image img(h * scale, w * scale, 3, 1);
  for (int y = 0; y < h * scale; ++y) {
    for (int x = 0; x < w * scale; ++x) {
      const float v = static_cast<float>(std::clamp(grid(y / scale, x / scale), 0.0, 1.0));
      put(img, x, y, {v, v, v});
    }
  }
  return img;
}

void write_png(const std::filesystem::path& path, const Image& img) {
  if (img.channels() != 3) throw std::invalid_argument("write_png: expected 3 channels");
  FilePtr file(std::fopen(path.string().c_str(), "wb"));
  if (!file) throw std::runtime_error("cannot open " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng initialisation failed");
  }
  std::vector<png_byte> row(static_cast<std::size_t>(img.width) * 3);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng write error for " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        const float v = std::clamp(img.at(y, x, ch), 0.0f, 1.0f);
        row[static_cast<std::size_t>(x) * 3 + ch] = static_cast<png_byte>(std::lround(v * 255.0f));
      }
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.string().c_str(), "rb"));
  if (!file) throw std::runtime_error("cannot open " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng initialisation failed");
  }
  Image img;
  std::vector<png_byte> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng read error for " + path.string());
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  img = Image(h, w, 3, 1);
  row.resize(png_get_rowbytes(png, info));
  for (int y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < 3; ++ch) {
        img.at(y, x, ch) = row[static_cast<std::size_t>(x) * 3 + ch] / 255.0f;
      }
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace pmf
