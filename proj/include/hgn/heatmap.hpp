#pragma once

#include <cstdint>
#include <vector>

#include "hgn/geometry.hpp"

// Heatmap grid ops. Cell (px, py) of a stack with coordinate scale s
// corresponds to input pixel (px * s, py * s); grids are 0-based.

namespace hgn::hm {

struct HeatmapStack {
  int channels = 0;
  int height = 0;
  int width = 0;
  double scale = 2.0;  // input pixels per heatmap cell
  std::vector<double> data;

  HeatmapStack() = default;
  HeatmapStack(int c, int h, int w, double s = 2.0)
      : channels(c), height(h), width(w), scale(s),
        data(static_cast<std::size_t>(c) * h * w, 0.0) {}

  double& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  std::size_t cells_per_channel() const {
    return static_cast<std::size_t>(height) * width;
  }
};

// Per-channel softmax over the grid, with max subtraction.
HeatmapStack spatial_softmax(const HeatmapStack& logits);

// dL/dlogits from dL/dnormalized (softmax backward, per channel).
HeatmapStack spatial_softmax_backward(const HeatmapStack& normalized,
                                      const HeatmapStack& grad_normalized);

// Expectation of cell coordinates under each channel, in input pixels.
std::vector<geom::Point> soft_argmax(const HeatmapStack& normalized);

// dL/dnormalized from per-point gradients (dx, dy in input pixels).
HeatmapStack soft_argmax_backward(const HeatmapStack& normalized,
                                  const std::vector<geom::Point>& grad_points);

struct RenderResult {
  HeatmapStack stack;
  // Bit i set: channel i had no in-grid Gaussian mass and fell back to a
  // delta at the nearest border cell.
  std::uint16_t degenerate_mask = 0;
};

// Sum-normalized truncated Gaussian per landmark; sigma in heatmap cells.
RenderResult render_target(const geom::LandmarkSet& landmarks, int height, int width,
                           double scale, double sigma_cells);

struct HeatmapLossResult {
  double value = 0.0;
  HeatmapStack grad_pred_normalized;
};

// Summed L1 between normalized stacks (all channels); subgradient 0 at ties.
HeatmapLossResult heatmap_loss(const HeatmapStack& pred_normalized,
                               const HeatmapStack& target_normalized);

struct HeatmapLogitLossResult {
  double value = 0.0;
  HeatmapStack grad_logits;
};

// Convenience composition: softmax forward, L1 loss, backward to logits.
HeatmapLogitLossResult heatmap_loss_from_logits(const HeatmapStack& logits,
                                                const HeatmapStack& target_normalized);

}  // namespace hgn::hm
