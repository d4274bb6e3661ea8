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
#ifndef PMF_IMAGE_HPP_
#define PMF_IMAGE_HPP_

#include <array>
#include <filesystem>

#include "pmf/geometry.hpp"
#include "pmf/spatial_config.hpp"
#include "pmf/tensor.hpp"

namespace pmf {

// RGB image in [0, 1], H x W x 3 at stride 1.
using Image = FeatureMap<float>;
using Rgb = std::array<float, 3>;

Image make_image(int width, int height, const Rgb& fill);

// Pixels whose centre lies within thickness / 2 of the segment.
void draw_line(Image& img, double x0, double y0, double x1, double y1,
               double thickness, const Rgb& color);
void fill_circle(Image& img, double cx, double cy, double radius, const Rgb& color);
void draw_rect(Image& img, const Box& box, double thickness, const Rgb& color);

// Grayscale rendering of a grid, each cell upscaled to scale x scale pixels.
Image grid_to_image(const Grid& grid, int scale = 1);

// 8-bit RGB PNG via libpng.
void write_png(const std::filesystem::path& path, const Image& img);
Image read_png(const std::filesystem::path& path);

}  // namespace pmf

#endif  // PMF_IMAGE_HPP_
