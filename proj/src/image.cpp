#include "mpad/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>

namespace mpad::data {

Image bilinear_resize(const Image& src, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw std::invalid_argument("bilinear_resize: bad target size");
  Image out = Image::zeros(out_h, out_w);
  const double sy = static_cast<double>(src.height) / out_h;
  const double sx = static_cast<double>(src.width) / out_w;
  for (int i = 0; i < out_h; ++i) {
    double fy = (i + 0.5) * sy - 0.5;
    fy = std::max(0.0, std::min(fy, static_cast<double>(src.height - 1)));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const double wy = fy - y0;
    for (int j = 0; j < out_w; ++j) {
      double fx = (j + 0.5) * sx - 0.5;
      fx = std::max(0.0, std::min(fx, static_cast<double>(src.width - 1)));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wx = fx - x0;
      out.at(i, j) = (1 - wy) * ((1 - wx) * src.at(y0, x0) + wx * src.at(y0, x1)) +
                     wy * ((1 - wx) * src.at(y1, x0) + wx * src.at(y1, x1));
    }
  }
  return out;
}

Image rotate(const Image& src, double degrees) {
  const double rad = degrees * M_PI / 180.0;
  const double c = std::cos(rad), s = std::sin(rad);
  const double cy = (src.height - 1) / 2.0, cx = (src.width - 1) / 2.0;
  Image out = Image::zeros(src.height, src.width);
  for (int i = 0; i < src.height; ++i)
    for (int j = 0; j < src.width; ++j) {
      // Inverse map the output pixel into the source frame.
      const double dy = i - cy, dx = j - cx;
      const double sy = c * dy + s * dx + cy;
      const double sx = -s * dy + c * dx + cx;
      if (sy < 0 || sy > src.height - 1 || sx < 0 || sx > src.width - 1) continue;
      const int y0 = static_cast<int>(sy), x0 = static_cast<int>(sx);
      const int y1 = std::min(y0 + 1, src.height - 1);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const double wy = sy - y0, wx = sx - x0;
      out.at(i, j) = (1 - wy) * ((1 - wx) * src.at(y0, x0) + wx * src.at(y0, x1)) +
                     wy * ((1 - wx) * src.at(y1, x0) + wx * src.at(y1, x1));
    }
  return out;
}

Image flip_horizontal(const Image& src) {
  Image out = Image::zeros(src.height, src.width);
  for (int i = 0; i < src.height; ++i)
    for (int j = 0; j < src.width; ++j) out.at(i, j) = src.at(i, src.width - 1 - j);
  return out;
}

Image flip_vertical(const Image& src) {
  Image out = Image::zeros(src.height, src.width);
  for (int i = 0; i < src.height; ++i)
    for (int j = 0; j < src.width; ++j) out.at(i, j) = src.at(src.height - 1 - i, j);
  return out;
}

void clip01(Image& img) {
  for (double& v : img.pixels) v = std::max(0.0, std::min(1.0, v));
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

Image read_png_gray(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw std::runtime_error("cannot open PNG file: " + path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("failed to decode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  // Normalize any input to 8-bit grayscale.
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_RGB_ALPHA)
    png_set_rgb_to_gray(png, 1, -1.0, -1.0);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_bit_depth(png, info) < 8) png_set_expand_gray_1_2_4_to_8(png);
  png_read_update_info(png, info);

  const int h = static_cast<int>(png_get_image_height(png, info));
  const int w = static_cast<int>(png_get_image_width(png, info));
  std::vector<std::uint8_t> row(static_cast<std::size_t>(w));
  Image img = Image::zeros(h, w);
  for (int i = 0; i < h; ++i) {
    png_read_row(png, row.data(), nullptr);
    for (int j = 0; j < w; ++j) img.at(i, j) = row[j] / 255.0;
  }
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png_gray(const std::string& path, const Image& img) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw std::runtime_error("cannot write PNG file: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png_create_info_struct failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("failed to encode PNG: " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width));
  for (int i = 0; i < img.height; ++i) {
    for (int j = 0; j < img.width; ++j) {
      const double v = std::max(0.0, std::min(1.0, img.at(i, j)));
      row[j] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::string& path) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("truncated IDX file: " + path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace

IdxData load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream imgs(images_path, std::ios::binary);
  if (!imgs) throw std::runtime_error("cannot open IDX image file: " + images_path);
  std::ifstream labs(labels_path, std::ios::binary);
  if (!labs) throw std::runtime_error("cannot open IDX label file: " + labels_path);

  const std::uint32_t img_magic = read_be32(imgs, images_path);
  if (img_magic != 0x00000803u)
    throw std::runtime_error("bad IDX image magic in " + images_path);
  const std::uint32_t n_images = read_be32(imgs, images_path);
  const std::uint32_t h = read_be32(imgs, images_path);
  const std::uint32_t w = read_be32(imgs, images_path);

  const std::uint32_t lab_magic = read_be32(labs, labels_path);
  if (lab_magic != 0x00000801u)
    throw std::runtime_error("bad IDX label magic in " + labels_path);
  const std::uint32_t n_labels = read_be32(labs, labels_path);
  if (n_images != n_labels)
    throw std::runtime_error("IDX count mismatch: " + std::to_string(n_images) +
                             " images vs " + std::to_string(n_labels) + " labels");

  IdxData out;
  out.images.reserve(n_images);
  out.labels.reserve(n_labels);
  std::vector<unsigned char> buf(static_cast<std::size_t>(h) * w);
  for (std::uint32_t i = 0; i < n_images; ++i) {
    imgs.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!imgs) throw std::runtime_error("truncated IDX file: " + images_path);
    Image img = Image::zeros(static_cast<int>(h), static_cast<int>(w));
    for (std::size_t k = 0; k < buf.size(); ++k) img.pixels[k] = buf[k] / 255.0;
    out.images.push_back(std::move(img));
    char lab;
    labs.read(&lab, 1);
    if (!labs) throw std::runtime_error("truncated IDX file: " + labels_path);
    out.labels.push_back(static_cast<unsigned char>(lab));
  }
  return out;
}

}  // namespace mpad::data
