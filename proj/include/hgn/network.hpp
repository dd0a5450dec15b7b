#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hgn/graph.hpp"
#include "hgn/image.hpp"

namespace hgn::net {

// Small convolutional backbone with four output heads:
//   heatmap logits {10, H/2, W/2}, eyeball radius {1}, alpha {2} (log
//   variance per gaze component) and a direct gaze regression {2} used by
//   the baseline / multi-task modes.
//
// Encoder: stride-2 3x3 conv + relu per stage. Decoder for the heatmap
// head: nearest-neighbor 2x upsample + 3x3 conv + relu back to half input
// resolution, then a 1x1 conv to 10 channels. Scalar heads: global average
// pool of the deepest feature + affine. Radius passes through
// softplus + 1 so it stays positive.
struct NetworkConfig {
  int input_h = 64;
  int input_w = 96;
  std::vector<int> stage_channels = {16, 32, 64, 64};
  double radius_bias_init = 19.0;  // softplus(19) + 1 ~ 20 px at start
  std::uint64_t seed = 0;

  int heatmap_height() const { return input_h / 2; }
  int heatmap_width() const { return input_w / 2; }
  double heatmap_scale() const { return 2.0; }

  void validate() const;  // throws config error
};

// Decoder conv widths, deepest first: half the mirrored encoder width
// (floored at 4), except the half-resolution stage which keeps ch[0].
std::vector<int> decoder_channels(const NetworkConfig& config);

struct ParamSet {
  struct Entry {
    std::string name;
    Tensor tensor;
  };
  std::vector<Entry> entries;

  Tensor* find(std::string_view name);
  const Tensor* find(std::string_view name) const;
  std::size_t total_parameters() const;
};

// Deterministic fan-in-scaled initialization; biases zero except the radius
// head bias (see NetworkConfig::radius_bias_init).
ParamSet init_params(const NetworkConfig& config, std::uint64_t seed);

struct NetworkVars {
  Var heatmap_logits;
  Var radius;
  Var alpha;
  Var gaze_direct;
  Var pooled;  // pooled backbone feature, {C}
};

struct ForwardOptions {
  bool heatmaps = true;  // skip the decoder when the mode never reads it
};

// Builds the forward trace on `graph`. `image` must outlive the graph.
NetworkVars forward(Graph& graph, const NetworkConfig& config, const ParamSet& params,
                    const Tensor& image, const ForwardOptions& options = {});

Tensor image_to_tensor(const Image& image);

struct NetworkOutput {
  hm::HeatmapStack heatmap_logits;
  double radius = 0.0;
  std::array<double, 2> alpha{};
  std::array<double, 2> gaze_direct{};
};

// Inference-only convenience; no gradients recorded for parameters.
NetworkOutput run_inference(const NetworkConfig& config, const ParamSet& params,
                            const Image& image);

}  // namespace hgn::net
