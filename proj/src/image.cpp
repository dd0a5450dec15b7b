#include "hgn/image.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <string>

#include "hgn/error.hpp"

namespace hgn {

void Image::clamp01() {
  for (double& p : pixels) p = std::clamp(p, 0.0, 1.0);
}

std::uint8_t quantize_u8(double v) {
  double scaled = std::clamp(v, 0.0, 1.0) * 255.0;
  return static_cast<std::uint8_t>(std::lround(scaled));
}

void histogram_equalize(Image& image) {
  if (image.pixels.empty()) return;
  std::array<std::size_t, 256> hist{};
  for (double p : image.pixels) hist[quantize_u8(p)]++;
  std::array<double, 256> cdf{};
  std::size_t running = 0;
  for (int i = 0; i < 256; ++i) {
    running += hist[i];
    cdf[i] = static_cast<double>(running) / static_cast<double>(image.pixels.size());
  }
  for (double& p : image.pixels) p = cdf[quantize_u8(p)];
}

void RgbImage::set(int y, int x, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (y < 0 || y >= height || x < 0 || x >= width) return;
  std::size_t idx = (static_cast<std::size_t>(y) * width + x) * 3;
  pixels[idx] = r;
  pixels[idx + 1] = g;
  pixels[idx + 2] = b;
}

RgbImage to_rgb(const Image& gray, int upscale) {
  RgbImage out(gray.height * upscale, gray.width * upscale);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      std::uint8_t v = quantize_u8(gray.at(y / upscale, x / upscale));
      out.set(y, x, v, v, v);
    }
  }
  return out;
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCategory::io, "cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) raise(ErrorCategory::io, "short write to " + path.string());
}

RgbImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCategory::io, "cannot open " + path.string());
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || maxval != 255 || w <= 0 || h <= 0) {
    raise(ErrorCategory::corrupt, "not a P6/255 ppm: " + path.string());
  }
  in.get();  // single whitespace after header
  RgbImage image(h, w);
  in.read(reinterpret_cast<char*>(image.pixels.data()),
          static_cast<std::streamsize>(image.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(image.pixels.size())) {
    raise(ErrorCategory::truncated, "ppm payload shorter than header declares");
  }
  return image;
}

}  // namespace hgn
