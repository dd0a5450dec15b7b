#include "hgn/visualize.hpp"

#include <cmath>

namespace hgn::eval {
namespace {

constexpr int kUpscale = 4;
constexpr double kArrowLength = 20.0;  // input pixels

struct Color {
  std::uint8_t r, g, b;
};

constexpr Color kGreen{40, 220, 60};
constexpr Color kRed{230, 50, 40};
constexpr Color kBlue{50, 80, 235};

void draw_dot(RgbImage& image, double x, double y, const Color& c, int radius) {
  int cx = static_cast<int>(std::lround(x * kUpscale));
  int cy = static_cast<int>(std::lround(y * kUpscale));
  for (int oy = -radius; oy <= radius; ++oy) {
    for (int ox = -radius; ox <= radius; ++ox) {
      if (ox * ox + oy * oy <= radius * radius) {
        image.set(cy + oy, cx + ox, c.r, c.g, c.b);
      }
    }
  }
}

void draw_segment(RgbImage& image, double x0, double y0, double x1, double y1,
                  const Color& c) {
  double dx = (x1 - x0) * kUpscale, dy = (y1 - y0) * kUpscale;
  int steps = static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy)))) + 1;
  for (int i = 0; i <= steps; ++i) {
    double t = static_cast<double>(i) / steps;
    image.set(static_cast<int>(std::lround((y0 * kUpscale) + t * dy)),
              static_cast<int>(std::lround((x0 * kUpscale) + t * dx)), c.r, c.g, c.b);
  }
}

// In-plane gaze direction from the projection rule: (sin phi cos theta, sin theta).
void draw_gaze_arrow(RgbImage& image, const geom::Point& origin,
                     const geom::GazeAngles& gaze, const Color& c) {
  double ux = std::sin(gaze.phi) * std::cos(gaze.theta);
  double uy = std::sin(gaze.theta);
  double len = std::hypot(ux, uy);
  if (len * kArrowLength < 1.0) {
    draw_dot(image, origin.x, origin.y, c, 3);
    return;
  }
  double tip_x = origin.x + ux * kArrowLength;
  double tip_y = origin.y + uy * kArrowLength;
  draw_segment(image, origin.x, origin.y, tip_x, tip_y, c);
  // Arrow head: two short back-angled strokes.
  double nx = -uy / len, ny = ux / len;
  double bx = tip_x - ux / len * 3.0, by = tip_y - uy / len * 3.0;
  draw_segment(image, tip_x, tip_y, bx + nx * 2.0, by + ny * 2.0, c);
  draw_segment(image, tip_x, tip_y, bx - nx * 2.0, by - ny * 2.0, c);
}

}  // namespace

void visualize(const synth::Sample& sample, const Prediction& prediction,
               const std::filesystem::path& path) {
  RgbImage canvas = to_rgb(sample.image, kUpscale);
  for (const geom::Point& p : prediction.landmarks.points) {
    draw_dot(canvas, p.x, p.y, kGreen, 2);
  }
  draw_gaze_arrow(canvas, prediction.landmarks.points[geom::kEyeballCenterIndex],
                  prediction.gaze, kRed);
  draw_gaze_arrow(canvas, sample.landmarks.points[geom::kEyeballCenterIndex], sample.gaze,
                  kBlue);
  write_ppm(canvas, path);
}

}  // namespace hgn::eval
