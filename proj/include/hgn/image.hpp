#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace hgn {

// Grayscale image, row-major, intensities in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int h, int w, double fill = 0.0)
      : height(h), width(w), pixels(static_cast<std::size_t>(h) * w, fill) {}

  double& at(int y, int x) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  void clamp01();
};

// 8-bit quantization used by the dataset format; k maps back to k/255.
std::uint8_t quantize_u8(double v);

// Stretch intensities so the cumulative histogram is flat (256 bins).
void histogram_equalize(Image& image);

// RGB raster sidekick for visualization output.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> pixels;  // 3 bytes per pixel, row-major

  RgbImage() = default;
  RgbImage(int h, int w)
      : height(h), width(w), pixels(static_cast<std::size_t>(h) * w * 3, 0) {}

  void set(int y, int x, std::uint8_t r, std::uint8_t g, std::uint8_t b);
};

RgbImage to_rgb(const Image& gray, int upscale = 1);
void write_ppm(const RgbImage& image, const std::filesystem::path& path);
RgbImage read_ppm(const std::filesystem::path& path);

}  // namespace hgn
