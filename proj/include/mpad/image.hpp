#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mpad::data {

// Single-channel image, row-major, values in [0,1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;

  double at(int i, int j) const { return pixels[static_cast<std::size_t>(i) * width + j]; }
  double& at(int i, int j) { return pixels[static_cast<std::size_t>(i) * width + j]; }

  static Image zeros(int h, int w) { return {h, w, std::vector<double>(static_cast<std::size_t>(h) * w, 0.0)}; }
};

Image bilinear_resize(const Image& src, int out_h, int out_w);

// Rotation about the image center by `degrees`, bilinear resampling,
// zero fill outside the source.
Image rotate(const Image& src, double degrees);

Image flip_horizontal(const Image& src);
Image flip_vertical(const Image& src);

void clip01(Image& img);

// 8-bit grayscale PNG I/O.
Image read_png_gray(const std::string& path);
void write_png_gray(const std::string& path, const Image& img);

// IDX (big-endian) ingestion; pixels scaled to [0,1].
struct IdxData {
  std::vector<Image> images;
  std::vector<int> labels;
};
IdxData load_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace mpad::data
