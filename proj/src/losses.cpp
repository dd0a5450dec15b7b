#include "hgn/losses.hpp"

#include <algorithm>
#include <cmath>

namespace hgn::loss {
namespace {

double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

}  // namespace

ValueGrad radius_loss(double r_pred, double r_gt) {
  double diff = r_pred - r_gt;
  return {std::abs(diff), sign0(diff)};
}

GazeLossResult gaze_loss(const geom::GazeAngles& ground_truth,
                         const geom::GazeAngles& predicted) {
  GazeLossResult res;
  double dt = predicted.theta - ground_truth.theta;
  double dp = predicted.phi - ground_truth.phi;
  res.residuals = {std::abs(dt), std::abs(dp)};
  res.grad_predicted = {sign0(dt), sign0(dp)};
  res.value = res.residuals[0] + res.residuals[1];
  return res;
}

LossBreakdown total_loss(double heatmap_term, double radius_term,
                         double gaze_or_um_term, const LossWeights& weights,
                         bool um_enabled) {
  LossBreakdown b;
  b.heatmap_term = heatmap_term;
  b.radius_term = radius_term;
  b.gaze_term = gaze_or_um_term;
  b.um_enabled = um_enabled;
  b.total = weights.beta1 * heatmap_term + weights.beta2 * radius_term +
            weights.beta3 * gaze_or_um_term;
  return b;
}

UncertaintyLossResult uncertainty_gaze_loss(const std::array<double, 2>& residuals,
                                            const std::array<double, 2>& alpha) {
  UncertaintyLossResult res;
  for (int k = 0; k < 2; ++k) {
    bool clamped = alpha[k] < kAlphaClampLo || alpha[k] > kAlphaClampHi;
    double a = std::clamp(alpha[k], kAlphaClampLo, kAlphaClampHi);
    double inv_var = std::exp(-a);  // e^{-alpha} = 1 / sigma^2
    res.alpha_clamped[k] = a;
    res.per_component[k] = inv_var * (residuals[k] - 0.5) + 0.5 * a;
    res.grad_residual[k] = 0.5 * inv_var;  // 1/2 from the 2-component mean
    res.grad_alpha[k] =
        clamped ? 0.0 : 0.5 * (-inv_var * (residuals[k] - 0.5) + 0.5);
  }
  res.value = 0.5 * (res.per_component[0] + res.per_component[1]);
  return res;
}

double gaussian_nll_reference(double residual, double alpha) {
  constexpr double kLogTwoPi = 1.8378770664093454836;
  return 0.5 * residual * residual * std::exp(-alpha) + 0.5 * alpha + 0.5 * kLogTwoPi;
}

}  // namespace hgn::loss
