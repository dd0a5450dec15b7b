#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hgn/synthgen.hpp"

using namespace hgn;
using namespace hgn::synth;

namespace {

SynthConfig small_config() {
  SynthConfig cfg;
  cfg.seed = 77;
  cfg.count = 10;
  return cfg;
}

std::vector<char> file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("generate_sample labels are mutually consistent") {
  SynthConfig cfg = small_config();
  cfg.count = 200;
  for (std::uint64_t i = 0; i < cfg.count; ++i) {
    Sample s = generate_sample(cfg, i);
    geom::ReconResult r = geom::reconstruct_gaze(s.landmarks.points[geom::kIrisCenterIndex],
                                                 s.landmarks.points[geom::kEyeballCenterIndex],
                                                 s.radius);
    CHECK(std::abs(r.angles.theta - s.gaze.theta) < 1e-9);
    CHECK(std::abs(r.angles.phi - s.gaze.phi) < 1e-9);
    CHECK(s.domain == Domain::synthetic);
    for (double p : s.image.pixels) {
      CHECK(p >= 0.0);
      CHECK(p <= 1.0);
    }
  }
}

TEST_CASE("generate_sample is deterministic per (seed, index)") {
  SynthConfig cfg = small_config();
  Sample a = generate_sample(cfg, 7);
  Sample b = generate_sample(cfg, 7);
  CHECK(a.image.pixels == b.image.pixels);
  CHECK(a.gaze.theta == b.gaze.theta);
  CHECK(a.radius == b.radius);
  Sample c = generate_sample(cfg, 8);
  CHECK(a.image.pixels != c.image.pixels);
}

TEST_CASE("frontal gaze puts the iris center on the eyeball center") {
  SynthConfig cfg = small_config();
  cfg.theta_min_deg = -1e-9;
  cfg.theta_max_deg = 1e-9;
  cfg.phi_min_deg = -1e-9;
  cfg.phi_max_deg = 1e-9;
  Sample s = generate_sample(cfg, 0);
  CHECK(s.landmarks.points[geom::kIrisCenterIndex].x ==
        doctest::Approx(s.landmarks.points[geom::kEyeballCenterIndex].x).epsilon(1e-9));
  CHECK(s.landmarks.points[geom::kIrisCenterIndex].y ==
        doctest::Approx(s.landmarks.points[geom::kEyeballCenterIndex].y).epsilon(1e-9));
}

TEST_CASE("rasterized eye has dark iris on bright sclera") {
  geom::EyeballState eye{47.5, 31.5, 20.0, 0.35};
  geom::GazeAngles gaze{0.1, -0.2};
  Image img = rasterize_eye(eye, gaze, 64, 96);

  geom::LandmarkSet lm = geom::project_landmarks(eye, gaze);
  int ix = static_cast<int>(std::lround(lm.points[geom::kIrisCenterIndex].x));
  int iy = static_cast<int>(std::lround(lm.points[geom::kIrisCenterIndex].y));
  double iris_value = img.at(iy, ix);

  // Sclera probe: on the circle, opposite side from the iris offset.
  int sx = static_cast<int>(std::lround(eye.center_x - (ix - eye.center_x) * 1.8));
  int sy = static_cast<int>(std::lround(eye.center_y));
  double sclera_value = img.at(sy, sx);
  CHECK(iris_value < sclera_value - 0.2);

  int distinct = 0;
  double first = img.pixels.front();
  for (double p : img.pixels) {
    if (std::abs(p - first) > 0.05) {
      ++distinct;
      break;
    }
  }
  CHECK(distinct > 0);
  for (double p : img.pixels) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("mirroring yaw mirrors the rendered image") {
  // Centered eyeball: center at (W-1)/2 so x -> W-1-x is an exact mirror.
  geom::EyeballState eye{47.5, 31.5, 18.0, 0.35};
  Image a = rasterize_eye(eye, {0.15, 0.3}, 64, 96);
  Image b = rasterize_eye(eye, {0.15, -0.3}, 64, 96);
  double worst = 0.0;
  for (int y = 0; y < a.height; ++y) {
    for (int x = 0; x < a.width; ++x) {
      worst = std::max(worst, std::abs(a.at(y, x) - b.at(y, a.width - 1 - x)));
    }
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("augment: identity at zero probability, brightness shift, rescale oracle") {
  SynthConfig cfg = small_config();
  Sample s = generate_sample(cfg, 0);

  AugmentPolicy off;
  off.blur_prob = off.rescale_prob = off.brightness_prob = off.contrast_prob =
      off.occlusion_lines_prob = 0.0;
  Rng rng(5);
  Image same = augment(s.image, rng, off);
  CHECK(same.pixels == s.image.pixels);

  // Constant image + brightness: still constant, clamped.
  Image constant(16, 16, 0.9);
  AugmentPolicy bright;
  bright.blur_prob = bright.rescale_prob = bright.contrast_prob =
      bright.occlusion_lines_prob = 0.0;
  bright.brightness_prob = 1.0;
  Rng rng2(6);
  Image shifted = augment(constant, rng2, bright);
  double v0 = shifted.pixels.front();
  for (double p : shifted.pixels) CHECK(p == doctest::Approx(v0));
  CHECK(v0 >= 0.0);
  CHECK(v0 <= 1.0);

  // Downscale-then-upscale equals the independent box-filter oracle.
  Image ds = box_downscale2_then_upscale(s.image);
  for (int y = 0; y < s.image.height; y += 2) {
    for (int x = 0; x < s.image.width; x += 2) {
      double mean = 0.25 * (s.image.at(y, x) + s.image.at(y, x + 1) +
                            s.image.at(y + 1, x) + s.image.at(y + 1, x + 1));
      CHECK(ds.at(y, x) == doctest::Approx(mean).epsilon(1e-12));
      CHECK(ds.at(y, x + 1) == doctest::Approx(mean).epsilon(1e-12));
      CHECK(ds.at(y + 1, x) == doctest::Approx(mean).epsilon(1e-12));
      CHECK(ds.at(y + 1, x + 1) == doctest::Approx(mean).epsilon(1e-12));
    }
  }
}

TEST_CASE("degrade_to_reallike: zero spec flips only the domain") {
  SynthConfig cfg = small_config();
  Sample s = generate_sample(cfg, 3);
  Rng rng(9);
  Sample d = degrade_to_reallike(s, rng, {0.0, 0.0, 0.0});
  CHECK(d.domain == Domain::real_like);
  CHECK(d.gaze.theta == s.gaze.theta);
  CHECK(d.gaze.phi == s.gaze.phi);
  CHECK(d.image.pixels == s.image.pixels);
  CHECK(d.degradation.gaze_sigma == 0.0f);
  CHECK(d.degradation.occluded == 0);
  CHECK(d.degradation.blurred == 0);
}

TEST_CASE("degrade_to_reallike noise statistics match the folded-Gaussian mean") {
  SynthConfig cfg = small_config();
  Sample base = generate_sample(cfg, 0);
  DegradeSpec spec{0.1, 0.0, 0.0};
  Rng rng(10);
  const int n = 20000;
  double abs_sum = 0.0, sum = 0.0, sq_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    Sample d = degrade_to_reallike(base, rng, spec);
    double dt = d.gaze.theta - base.gaze.theta;
    double dp = d.gaze.phi - base.gaze.phi;
    abs_sum += 0.5 * (std::abs(dt) + std::abs(dp));
    sum += dt;
    sq_sum += dt * dt;
    CHECK(d.degradation.gaze_sigma == doctest::Approx(0.1f));
    CHECK(d.degradation.noise_theta == doctest::Approx(dt).epsilon(1e-5));
  }
  double folded_mean = abs_sum / n;
  CHECK(folded_mean == doctest::Approx(0.1 * std::sqrt(2.0 / 3.14159265358979)).epsilon(0.05));
  double stddev = std::sqrt(sq_sum / n - (sum / n) * (sum / n));
  CHECK(stddev == doctest::Approx(0.1).epsilon(0.03));
}

TEST_CASE("dataset round trip is bit-exact and errors are distinct") {
  SynthConfig cfg = small_config();
  cfg.reallike_fraction = 0.4;
  cfg.degrade = {0.05, 0.5, 0.5};
  Dataset ds = generate_dataset(cfg, "{\"echo\":1}");
  CHECK(ds.samples.size() == cfg.count);

  auto dir = std::filesystem::temp_directory_path();
  auto p1 = dir / "hgn_ds_a.bin";
  auto p2 = dir / "hgn_ds_b.bin";
  write_dataset(ds, p1);
  Dataset back = read_dataset(p1);
  CHECK(back.config_echo == ds.config_echo);
  REQUIRE(back.samples.size() == ds.samples.size());
  write_dataset(back, p2);
  CHECK(file_bytes(p1) == file_bytes(p2));

  // Same (config, seed) -> bit-identical files.
  Dataset again = generate_dataset(cfg, "{\"echo\":1}");
  auto p3 = dir / "hgn_ds_c.bin";
  write_dataset(again, p3);
  CHECK(file_bytes(p1) == file_bytes(p3));

  // Truncated payload.
  auto size = std::filesystem::file_size(p1);
  std::filesystem::resize_file(p1, size - 7);
  try {
    read_dataset(p1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::truncated);
  }

  // Bad magic.
  {
    std::ofstream out(p1, std::ios::binary);
    out << "WRONG" << std::string(32, '\0');
  }
  try {
    read_dataset(p1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::corrupt);
  }

  // Version mismatch.
  {
    Dataset v = ds;
    v.version = 999;
    write_dataset(v, p1);
  }
  try {
    read_dataset(p1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::version);
  }

  // Header count larger than the payload.
  {
    std::vector<char> bytes = file_bytes(p2);
    // count is a u64 right after magic(5) + version(4) + echo len(4) + echo.
    std::size_t off = 5 + 4 + 4 + ds.config_echo.size();
    bytes[off] = static_cast<char>(ds.samples.size() + 3);
    std::ofstream out(p1, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  try {
    read_dataset(p1);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::truncated);
  }

  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
  std::filesystem::remove(p3);
}

TEST_CASE("real-like fraction and mean-radius relabeling") {
  SynthConfig cfg = small_config();
  cfg.count = 400;
  cfg.reallike_fraction = 0.3;
  cfg.degrade = {0.15, 1.0, 1.0};
  Dataset ds = generate_dataset(cfg, "");
  std::size_t real = 0;
  for (const Sample& s : ds.samples) {
    if (s.domain == Domain::real_like) {
      ++real;
      CHECK(s.degradation.occluded == 1);
      CHECK(s.degradation.blurred == 1);
    }
  }
  double frac = static_cast<double>(real) / static_cast<double>(ds.samples.size());
  CHECK(frac > 0.2);
  CHECK(frac < 0.4);

  SynthConfig mean_cfg = small_config();
  mean_cfg.count = 50;
  mean_cfg.mean_radius_labels = true;
  Dataset mean_ds = generate_dataset(mean_cfg, "");
  for (const Sample& s : mean_ds.samples) {
    CHECK(s.radius == mean_ds.samples.front().radius);
  }
}

TEST_CASE("config validation") {
  SynthConfig bad = small_config();
  bad.theta_min_deg = -85.0;
  CHECK_THROWS_AS(bad.validate(), Error);
  SynthConfig bad2 = small_config();
  bad2.count = 0;
  CHECK_THROWS_AS(bad2.validate(), Error);
  SynthConfig bad3 = small_config();
  bad3.radius_min = -1.0;
  CHECK_THROWS_AS(bad3.validate(), Error);
}
