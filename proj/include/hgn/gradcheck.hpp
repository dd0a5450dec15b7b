#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hgn/network.hpp"
#include "hgn/rng.hpp"

// Finite-difference verification of the analytic gradients for a full
// forward + loss trace. Central differences, step 1e-5 scaled by parameter
// magnitude.

namespace hgn::net {

// Builds the scalar loss on the trace; must be deterministic in its inputs.
using LossBuilder = std::function<Var(Graph&, const NetworkConfig&, const ParamSet&,
                                      const Tensor& image)>;

struct GradCheckEntry {
  std::string param;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double deviation = 0.0;  // relative with absolute floor
};

struct GradCheckReport {
  double max_deviation = 0.0;
  std::size_t checked = 0;
  std::vector<GradCheckEntry> worst;  // sorted, largest deviation first
  double tolerance = 0.0;
  bool passed() const { return max_deviation <= tolerance; }
};

// Normalized deviation: |a - n| / max(|a|, |n|, abs_floor / rel_tol), so a
// value <= rel_tol accepts both the relative criterion and absolute
// differences below abs_floor.
double gradient_deviation(double analytic, double numeric, double rel_tol, double abs_floor);

// Compares analytic vs numeric pairs; exposed separately so the harness
// itself can be tested against deliberately corrupted gradients.
GradCheckReport compare_gradients(const std::vector<GradCheckEntry>& entries,
                                  double tolerance);

struct GradCheckOptions {
  double tolerance = 1e-3;
  double fd_step = 1e-5;
  double abs_floor = 1e-6;
  std::size_t max_sampled = 400;  // parameters sampled across all arrays
  std::size_t report_worst = 8;
};

GradCheckReport grad_check(const NetworkConfig& config, ParamSet& params,
                           const Tensor& image, const LossBuilder& loss_builder,
                           const GradCheckOptions& options, Rng& rng);

}  // namespace hgn::net
