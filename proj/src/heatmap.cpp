#include "hgn/heatmap.hpp"

#include <algorithm>
#include <cmath>

#include "hgn/error.hpp"

namespace hgn::hm {
namespace {

void require_same_grid(const HeatmapStack& a, const HeatmapStack& b) {
  if (a.channels != b.channels || a.height != b.height || a.width != b.width) {
    raise(ErrorCategory::contract, "heatmap stacks disagree on resolution");
  }
}

}  // namespace

HeatmapStack spatial_softmax(const HeatmapStack& logits) {
  HeatmapStack out(logits.channels, logits.height, logits.width, logits.scale);
  std::size_t n = logits.cells_per_channel();
  for (int c = 0; c < logits.channels; ++c) {
    const double* src = &logits.data[c * n];
    double* dst = &out.data[c * n];
    double max_logit = src[0];
    for (std::size_t i = 1; i < n; ++i) max_logit = std::max(max_logit, src[i]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dst[i] = std::exp(src[i] - max_logit);
      sum += dst[i];
    }
    double inv = 1.0 / sum;
    for (std::size_t i = 0; i < n; ++i) dst[i] *= inv;
  }
  return out;
}

HeatmapStack spatial_softmax_backward(const HeatmapStack& normalized,
                                      const HeatmapStack& grad_normalized) {
  require_same_grid(normalized, grad_normalized);
  HeatmapStack out(normalized.channels, normalized.height, normalized.width,
                   normalized.scale);
  std::size_t n = normalized.cells_per_channel();
  for (int c = 0; c < normalized.channels; ++c) {
    const double* h = &normalized.data[c * n];
    const double* g = &grad_normalized.data[c * n];
    double* dst = &out.data[c * n];
    double inner = 0.0;
    for (std::size_t i = 0; i < n; ++i) inner += g[i] * h[i];
    for (std::size_t i = 0; i < n; ++i) dst[i] = h[i] * (g[i] - inner);
  }
  return out;
}

std::vector<geom::Point> soft_argmax(const HeatmapStack& normalized) {
  std::vector<geom::Point> points(normalized.channels);
  for (int c = 0; c < normalized.channels; ++c) {
    double ex = 0.0, ey = 0.0;
    for (int y = 0; y < normalized.height; ++y) {
      for (int x = 0; x < normalized.width; ++x) {
        double h = normalized.at(c, y, x);
        ex += h * x;
        ey += h * y;
      }
    }
    points[c] = {ex * normalized.scale, ey * normalized.scale};
  }
  return points;
}

HeatmapStack soft_argmax_backward(const HeatmapStack& normalized,
                                  const std::vector<geom::Point>& grad_points) {
  if (static_cast<int>(grad_points.size()) != normalized.channels) {
    raise(ErrorCategory::contract, "gradient count does not match channels");
  }
  HeatmapStack out(normalized.channels, normalized.height, normalized.width,
                   normalized.scale);
  for (int c = 0; c < normalized.channels; ++c) {
    double gx = grad_points[c].x * normalized.scale;
    double gy = grad_points[c].y * normalized.scale;
    for (int y = 0; y < normalized.height; ++y) {
      for (int x = 0; x < normalized.width; ++x) {
        out.at(c, y, x) = gx * x + gy * y;
      }
    }
  }
  return out;
}

RenderResult render_target(const geom::LandmarkSet& landmarks, int height, int width,
                           double scale, double sigma_cells) {
  if (height <= 0 || width <= 0 || scale <= 0.0 || sigma_cells <= 0.0) {
    raise(ErrorCategory::contract, "invalid heatmap target geometry");
  }
  RenderResult res;
  res.stack = HeatmapStack(geom::kLandmarkCount, height, width, scale);
  double inv_two_sigma2 = 1.0 / (2.0 * sigma_cells * sigma_cells);
  for (int c = 0; c < geom::kLandmarkCount; ++c) {
    double cx = landmarks.points[c].x / scale;
    double cy = landmarks.points[c].y / scale;
    double sum = 0.0;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double dx = x - cx;
        double dy = y - cy;
        double v = std::exp(-(dx * dx + dy * dy) * inv_two_sigma2);
        res.stack.at(c, y, x) = v;
        sum += v;
      }
    }
    if (sum < 1e-12) {
      // Landmark far outside the grid: delta at the nearest border cell.
      res.degenerate_mask |= static_cast<std::uint16_t>(1u << c);
      int bx = std::clamp(static_cast<int>(std::lround(cx)), 0, width - 1);
      int by = std::clamp(static_cast<int>(std::lround(cy)), 0, height - 1);
      std::fill_n(&res.stack.data[c * res.stack.cells_per_channel()],
                  res.stack.cells_per_channel(), 0.0);
      res.stack.at(c, by, bx) = 1.0;
    } else {
      double inv = 1.0 / sum;
      double* dst = &res.stack.data[c * res.stack.cells_per_channel()];
      for (std::size_t i = 0; i < res.stack.cells_per_channel(); ++i) dst[i] *= inv;
    }
  }
  return res;
}

HeatmapLossResult heatmap_loss(const HeatmapStack& pred_normalized,
                               const HeatmapStack& target_normalized) {
  require_same_grid(pred_normalized, target_normalized);
  HeatmapLossResult res;
  res.grad_pred_normalized = HeatmapStack(pred_normalized.channels, pred_normalized.height,
                                          pred_normalized.width, pred_normalized.scale);
  for (std::size_t i = 0; i < pred_normalized.data.size(); ++i) {
    double diff = pred_normalized.data[i] - target_normalized.data[i];
    res.value += std::abs(diff);
    res.grad_pred_normalized.data[i] = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
  }
  return res;
}

HeatmapLogitLossResult heatmap_loss_from_logits(const HeatmapStack& logits,
                                                const HeatmapStack& target_normalized) {
  HeatmapStack normalized = spatial_softmax(logits);
  HeatmapLossResult l1 = heatmap_loss(normalized, target_normalized);
  HeatmapLogitLossResult res;
  res.value = l1.value;
  res.grad_logits = spatial_softmax_backward(normalized, l1.grad_pred_normalized);
  return res;
}

}  // namespace hgn::hm
