#include <csetjmp>
#include <cstdio>
#include <memory>

#include <png.h>

#include "probedrift/errors.hpp"
#include "probedrift/render.hpp"

namespace probedrift {

RgbImage::RgbImage(int w, int h, Rgb fill) : width(w), height(h) {
  if (w < 1 || h < 1) throw std::invalid_argument("raster dimensions must be positive");
  data.resize(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3);
  for (std::size_t i = 0; i < data.size(); i += 3) std::copy(fill.begin(), fill.end(), data.begin() + i);
}

Rgb RgbImage::at(int x, int y) const {
  const std::size_t o = (static_cast<std::size_t>(y) * width + x) * 3;
  return {data[o], data[o + 1], data[o + 2]};
}

void RgbImage::set(int x, int y, Rgb c) {
  const std::size_t o = (static_cast<std::size_t>(y) * width + x) * 3;
  data[o] = c[0];
  data[o + 1] = c[1];
  data[o + 2] = c[2];
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void write_png(const RgbImage& img, const std::filesystem::path& out) {
  FilePtr fp(std::fopen(out.c_str(), "wb"));
  if (!fp) throw EmitError("cannot open " + out.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, nullptr);
    throw EmitError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw EmitError("failed writing PNG " + out.string());
  }
  png_init_io(png, fp.get());
  png_set_compression_level(png, 6);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    png_write_row(png, const_cast<png_bytep>(img.data.data() + static_cast<std::size_t>(y) * img.width * 3));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(fp.get()) != 0) throw EmitError("failed writing PNG " + out.string());
}

RgbImage read_png(const std::filesystem::path& in) {
  FilePtr fp(std::fopen(in.c_str(), "rb"));
  if (!fp) throw EmitError("cannot open " + in.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw EmitError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw EmitError("failed reading PNG " + in.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_RGB || png_get_bit_depth(png, info) != 8) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw EmitError(in.string() + " is not 8-bit RGB");
  }
  RgbImage img(static_cast<int>(png_get_image_width(png, info)), static_cast<int>(png_get_image_height(png, info)));
  for (int y = 0; y < img.height; ++y)
    png_read_row(png, img.data.data() + static_cast<std::size_t>(y) * img.width * 3, nullptr);
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

}  // namespace probedrift
