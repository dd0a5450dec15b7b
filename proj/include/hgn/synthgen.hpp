#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "hgn/geometry.hpp"
#include "hgn/image.hpp"
#include "hgn/rng.hpp"

namespace hgn::synth {

struct AugmentPolicy {
  double blur_prob = 0.5;
  double rescale_prob = 0.5;  // downscale by 2 then upscale by 2
  double brightness_prob = 0.5;
  double contrast_prob = 0.5;
  double occlusion_lines_prob = 0.5;
};

struct DegradeSpec {
  double gaze_sigma = 0.0;      // radians of zero-mean label noise per component
  double occlusion_prob = 0.0;  // eyelid-closure band
  double blur_prob = 0.0;       // heavy blur
};

struct SynthConfig {
  int image_h = 64;
  int image_w = 96;
  double theta_min_deg = -30.0;
  double theta_max_deg = 30.0;
  double phi_min_deg = -40.0;
  double phi_max_deg = 40.0;
  double radius_min = 14.0;  // pixels
  double radius_max = 26.0;
  double center_jitter = 6.0;  // +- pixels around the image center
  double psi_min = 0.30;       // iris angular radius range, radians
  double psi_max = 0.40;
  std::uint64_t seed = 0;
  std::uint64_t count = 1;
  bool mean_radius_labels = false;  // replace radius labels by the dataset mean
  double reallike_fraction = 0.0;   // fraction degraded into the real-like domain
  AugmentPolicy augment;
  DegradeSpec degrade;

  void validate() const;
};

enum class Domain : std::uint8_t { synthetic = 0, real_like = 1 };

struct DegradationRecord {
  float gaze_sigma = 0.0f;   // configured noise level
  float noise_theta = 0.0f;  // actually applied label perturbation
  float noise_phi = 0.0f;
  std::uint8_t occluded = 0;
  std::uint8_t blurred = 0;
};

struct Sample {
  Image image;
  geom::LandmarkSet landmarks;
  double radius = 0.0;
  geom::GazeAngles gaze;
  Domain domain = Domain::synthetic;
  DegradationRecord degradation;
};

inline constexpr std::uint32_t kDatasetVersion = 1;

struct Dataset {
  std::uint32_t version = kDatasetVersion;
  std::string config_echo;
  std::vector<Sample> samples;
};

// Deterministic in (config.seed, index); augmentation included.
Sample generate_sample(const SynthConfig& config, std::uint64_t index);

// Procedural shading: bright sclera disk inside an eyelid aperture, dark
// iris at the projected rim, darker pupil. Intensities in [0, 1].
Image rasterize_eye(const geom::EyeballState& eye, const geom::GazeAngles& gaze,
                    int height, int width);

Image augment(const Image& image, Rng& rng, const AugmentPolicy& policy);

Sample degrade_to_reallike(const Sample& sample, Rng& rng, const DegradeSpec& spec);

// Full pipeline: per-index generation, optional real-like degradation and
// optional mean-radius relabeling. config_echo is stored verbatim.
Dataset generate_dataset(const SynthConfig& config, const std::string& config_echo);

void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

// Shared helpers (also used by augmentation oracles in tests).
Image box_downscale2_then_upscale(const Image& image);
void blur_121(Image& image, int passes);

}  // namespace hgn::synth
