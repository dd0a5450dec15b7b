#include "hgn/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "hgn/error.hpp"
#include "hgn/threading.hpp"

namespace hgn::synth {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDegToRad = kPi / 180.0;

double smoothstep(double edge0, double edge1, double x) {
  double t = std::clamp((x - edge0) / (edge1 - edge0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

void draw_line(Image& image, double x0, double y0, double x1, double y1, double value,
               int thickness) {
  double dx = x1 - x0, dy = y1 - y0;
  int steps = static_cast<int>(std::ceil(std::max(std::abs(dx), std::abs(dy)))) + 1;
  for (int i = 0; i <= steps; ++i) {
    double t = static_cast<double>(i) / steps;
    int cx = static_cast<int>(std::lround(x0 + t * dx));
    int cy = static_cast<int>(std::lround(y0 + t * dy));
    for (int oy = 0; oy < thickness; ++oy) {
      for (int ox = 0; ox < thickness; ++ox) {
        int px = cx + ox, py = cy + oy;
        if (px >= 0 && px < image.width && py >= 0 && py < image.height) {
          image.at(py, px) = value;
        }
      }
    }
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (image_h <= 0 || image_w <= 0) raise(ErrorCategory::config, "image size must be positive");
  if (count < 1) raise(ErrorCategory::config, "sample count must be >= 1");
  auto check_range = [](double lo, double hi, const char* what) {
    if (!(lo < hi) || lo <= -80.0 || hi >= 80.0) {
      raise(ErrorCategory::config, std::string(what) + " range must be inside (-80, 80) degrees");
    }
  };
  check_range(theta_min_deg, theta_max_deg, "theta");
  check_range(phi_min_deg, phi_max_deg, "phi");
  if (!(radius_min > 0.0) || !(radius_max >= radius_min)) {
    raise(ErrorCategory::config, "radius range must be positive and ordered");
  }
  if (center_jitter < 0.0) raise(ErrorCategory::config, "center jitter must be >= 0");
  if (!(psi_min > 0.0) || !(psi_max >= psi_min) || psi_max >= kPi / 2.0) {
    raise(ErrorCategory::config, "iris angular radius range must lie in (0, pi/2)");
  }
  if (reallike_fraction < 0.0 || reallike_fraction > 1.0) {
    raise(ErrorCategory::config, "real-like fraction must lie in [0, 1]");
  }
}

Image rasterize_eye(const geom::EyeballState& eye, const geom::GazeAngles& gaze,
                    int height, int width) {
  geom::validate(eye);
  geom::validate(gaze);
  Image image(height, width);
  geom::GazeVector g = geom::angles_to_vector(gaze);
  double r = eye.radius;
  double cos_psi = std::cos(eye.iris_angular_radius);
  double cos_pupil = std::cos(eye.iris_angular_radius * 0.45);
  // Angular half-width of one pixel on the sphere, for edge smoothing.
  double edge = 1.0 / r;

  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double dx = x - eye.center_x;
      double dy = y - eye.center_y;
      double d2 = dx * dx + dy * dy;

      // Skin with a slight vertical gradient.
      double value = 0.58 + 0.05 * (y - eye.center_y) / height;

      // Eyelid aperture: ellipse wider but flatter than the eyeball, so the
      // lids cover the top and bottom of the sphere.
      double ax = dx / (1.35 * r);
      double ay = dy / (0.95 * r);
      double ar2 = ax * ax + ay * ay;
      double aperture = 1.0 - smoothstep(0.96, 1.04, ar2);
      if (aperture > 0.0) {
        double content = value;
        double d = std::sqrt(d2);
        double inside = 1.0 - smoothstep(r - 1.0, r + 1.0, d);
        if (inside > 0.0) {
          double sclera = 0.92 - 0.06 * (d2 / (r * r));
          double eye_value = sclera;
          if (d < r) {
            double dz = -std::sqrt(std::max(r * r - d2, 0.0));
            double along = (dx * g.x + dy * g.y + dz * g.z) / r;
            double iris_cover = smoothstep(cos_psi - edge, cos_psi + edge, along);
            if (iris_cover > 0.0) {
              double ring = (along - cos_psi) / (1.0 - cos_psi);
              double iris = 0.34 - 0.10 * ring;
              double pupil_cover = smoothstep(cos_pupil - edge, cos_pupil + edge, along);
              iris = iris * (1.0 - pupil_cover) + 0.07 * pupil_cover;
              eye_value = sclera * (1.0 - iris_cover) + iris * iris_cover;
            }
          }
          content = content * (1.0 - inside) + eye_value * inside;
        }
        value = value * (1.0 - aperture) + content * aperture;
      }
      // Lid crease shadow just outside the aperture boundary.
      double crease = smoothstep(1.0, 1.12, ar2) * (1.0 - smoothstep(1.35, 1.6, ar2));
      value -= 0.07 * crease;
      image.at(y, x) = std::clamp(value, 0.0, 1.0);
    }
  }
  return image;
}

void blur_121(Image& image, int passes) {
  Image tmp(image.height, image.width);
  for (int p = 0; p < passes; ++p) {
    // Horizontal.
    for (int y = 0; y < image.height; ++y) {
      for (int x = 0; x < image.width; ++x) {
        double l = image.at(y, std::max(0, x - 1));
        double c = image.at(y, x);
        double rr = image.at(y, std::min(image.width - 1, x + 1));
        tmp.at(y, x) = 0.25 * l + 0.5 * c + 0.25 * rr;
      }
    }
    // Vertical.
    for (int y = 0; y < image.height; ++y) {
      for (int x = 0; x < image.width; ++x) {
        double u = tmp.at(std::max(0, y - 1), x);
        double c = tmp.at(y, x);
        double d = tmp.at(std::min(image.height - 1, y + 1), x);
        image.at(y, x) = 0.25 * u + 0.5 * c + 0.25 * d;
      }
    }
  }
}

Image box_downscale2_then_upscale(const Image& image) {
  int hh = image.height / 2, hw = image.width / 2;
  Image small(hh, hw);
  for (int y = 0; y < hh; ++y) {
    for (int x = 0; x < hw; ++x) {
      small.at(y, x) = 0.25 * (image.at(2 * y, 2 * x) + image.at(2 * y, 2 * x + 1) +
                               image.at(2 * y + 1, 2 * x) + image.at(2 * y + 1, 2 * x + 1));
    }
  }
  Image out(image.height, image.width);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      out.at(y, x) = small.at(std::min(y / 2, hh - 1), std::min(x / 2, hw - 1));
    }
  }
  return out;
}

Image augment(const Image& image, Rng& rng, const AugmentPolicy& policy) {
  Image out = image;
  if (rng.bernoulli(policy.blur_prob)) {
    int passes = 1 + static_cast<int>(rng.uniform_index(2));
    blur_121(out, passes);
  }
  if (rng.bernoulli(policy.rescale_prob)) {
    out = box_downscale2_then_upscale(out);
  }
  if (rng.bernoulli(policy.brightness_prob)) {
    double delta = rng.uniform(-0.15, 0.15);
    for (double& p : out.pixels) p += delta;
  }
  if (rng.bernoulli(policy.contrast_prob)) {
    double factor = rng.uniform(0.7, 1.3);
    for (double& p : out.pixels) p = 0.5 + (p - 0.5) * factor;
  }
  if (rng.bernoulli(policy.occlusion_lines_prob)) {
    int lines = 1 + static_cast<int>(rng.uniform_index(3));
    for (int i = 0; i < lines; ++i) {
      double value = rng.bernoulli(0.5) ? 0.08 : 0.9;
      double x0 = rng.uniform(0.0, out.width - 1.0);
      double x1 = rng.uniform(0.0, out.width - 1.0);
      double y0 = rng.uniform(0.0, out.height - 1.0);
      double y1 = rng.uniform(0.0, out.height - 1.0);
      draw_line(out, x0, y0, x1, y1, value, 1 + static_cast<int>(rng.uniform_index(2)));
    }
  }
  out.clamp01();
  return out;
}

Sample degrade_to_reallike(const Sample& sample, Rng& rng, const DegradeSpec& spec) {
  Sample out = sample;
  out.domain = Domain::real_like;
  out.degradation.gaze_sigma = static_cast<float>(spec.gaze_sigma);
  double nt = spec.gaze_sigma > 0.0 ? rng.normal(0.0, spec.gaze_sigma) : 0.0;
  double np = spec.gaze_sigma > 0.0 ? rng.normal(0.0, spec.gaze_sigma) : 0.0;
  out.degradation.noise_theta = static_cast<float>(nt);
  out.degradation.noise_phi = static_cast<float>(np);
  out.gaze.theta += nt;
  out.gaze.phi += np;
  // Keep labels inside the arcsin domain.
  constexpr double kLimit = 80.0 * kDegToRad;
  out.gaze.theta = std::clamp(out.gaze.theta, -kLimit, kLimit);
  out.gaze.phi = std::clamp(out.gaze.phi, -kLimit, kLimit);

  if (rng.bernoulli(spec.occlusion_prob)) {
    out.degradation.occluded = 1;
    // Eyelid-closure band: skin covers the upper part of the eye opening.
    double closure = rng.uniform(0.35, 0.65);
    double cy = sample.landmarks.points[geom::kEyeballCenterIndex].y;
    double r_guess = sample.radius;
    int y_end = static_cast<int>(std::lround(cy - r_guess + closure * 2.0 * r_guess));
    for (int y = 0; y < std::min(out.image.height, y_end); ++y) {
      for (int x = 0; x < out.image.width; ++x) {
        out.image.at(y, x) = 0.56 + 0.03 * smoothstep(y_end - 3.0, y_end + 0.0, y);
      }
    }
  }
  if (rng.bernoulli(spec.blur_prob)) {
    out.degradation.blurred = 1;
    blur_121(out.image, 4);
  }
  out.image.clamp01();
  return out;
}

Sample generate_sample(const SynthConfig& config, std::uint64_t index) {
  config.validate();
  Rng rng = Rng::derive(config.seed, index);

  geom::GazeAngles gaze{rng.uniform(config.theta_min_deg, config.theta_max_deg) * kDegToRad,
                        rng.uniform(config.phi_min_deg, config.phi_max_deg) * kDegToRad};
  geom::EyeballState eye;
  eye.radius = rng.uniform(config.radius_min, config.radius_max);
  eye.center_x = (config.image_w - 1) / 2.0 + rng.uniform(-config.center_jitter, config.center_jitter);
  eye.center_y = (config.image_h - 1) / 2.0 + rng.uniform(-config.center_jitter, config.center_jitter);
  eye.iris_angular_radius = rng.uniform(config.psi_min, config.psi_max);

  Sample s;
  s.gaze = gaze;
  s.radius = eye.radius;
  s.landmarks = geom::project_landmarks(eye, gaze);
  s.image = rasterize_eye(eye, gaze, config.image_h, config.image_w);
  s.image = augment(s.image, rng, config.augment);
  s.domain = Domain::synthetic;
  return s;
}

Dataset generate_dataset(const SynthConfig& config, const std::string& config_echo) {
  config.validate();
  Dataset ds;
  ds.config_echo = config_echo;
  ds.samples.resize(config.count);
  parallel_blocks(config.count, thread_count(), [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t i = begin; i < end; ++i) {
      Sample s = generate_sample(config, i);
      if (config.reallike_fraction > 0.0) {
        // Separate stream so the base sample is unchanged by this decision.
        Rng coin = Rng::derive(config.seed ^ 0x5eedfacedeadbeefULL, i);
        if (coin.uniform() < config.reallike_fraction) {
          s = degrade_to_reallike(s, coin, config.degrade);
        }
      }
      ds.samples[i] = std::move(s);
    }
  });
  if (config.mean_radius_labels && !ds.samples.empty()) {
    double mean = 0.0;
    for (const Sample& s : ds.samples) mean += s.radius;
    mean /= static_cast<double>(ds.samples.size());
    for (Sample& s : ds.samples) s.radius = mean;
  }
  return ds;
}

}  // namespace hgn::synth
