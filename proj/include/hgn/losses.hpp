#pragma once

#include <array>

#include "hgn/geometry.hpp"

namespace hgn::loss {

struct LossWeights {
  double beta1 = 5.0;  // heatmap term
  double beta2 = 1.0;  // radius term
  double beta3 = 1.0;  // gaze (or uncertainty) term
};

struct LossBreakdown {
  double heatmap_term = 0.0;
  double radius_term = 0.0;
  double gaze_term = 0.0;  // uncertainty term instead when um_enabled
  double total = 0.0;
  bool um_enabled = false;
  std::array<double, 2> gaze_residuals{0.0, 0.0};
};

struct ValueGrad {
  double value = 0.0;
  double grad = 0.0;  // d value / d first argument
};

// |r_pred - r_gt| with subgradient 0 at equality.
ValueGrad radius_loss(double r_pred, double r_gt);

struct GazeLossResult {
  double value = 0.0;                      // |d_theta| + |d_phi|
  std::array<double, 2> residuals{};       // (|d_theta|, |d_phi|)
  std::array<double, 2> grad_predicted{};  // d value / d predicted component
};

GazeLossResult gaze_loss(const geom::GazeAngles& ground_truth,
                         const geom::GazeAngles& predicted);

LossBreakdown total_loss(double heatmap_term, double radius_term,
                         double gaze_or_um_term, const LossWeights& weights,
                         bool um_enabled);

// alpha = log(variance) per gaze component, clamped before exponentiation;
// gradients are zero at the clamp.
inline constexpr double kAlphaClampLo = -10.0;
inline constexpr double kAlphaClampHi = 10.0;

struct UncertaintyLossResult {
  double value = 0.0;                         // mean over the 2 components
  std::array<double, 2> per_component{};      // e^{-a}(l - 1/2) + a/2
  std::array<double, 2> grad_residual{};      // d value / d residual_k
  std::array<double, 2> grad_alpha{};         // d value / d alpha_k
  std::array<double, 2> alpha_clamped{};
};

UncertaintyLossResult uncertainty_gaze_loss(const std::array<double, 2>& residuals,
                                            const std::array<double, 2>& alpha);

// Gaussian negative log-likelihood with variance e^{alpha}; reference used
// by property tests to compare minimizer structure, not by training.
double gaussian_nll_reference(double residual, double alpha);

}  // namespace hgn::loss
