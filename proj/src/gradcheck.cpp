#include "hgn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "hgn/error.hpp"

namespace hgn::net {

double gradient_deviation(double analytic, double numeric, double rel_tol, double abs_floor) {
  double diff = std::abs(analytic - numeric);
  double scale = std::max({std::abs(analytic), std::abs(numeric), abs_floor / rel_tol});
  return diff / scale;
}

GradCheckReport compare_gradients(const std::vector<GradCheckEntry>& entries,
                                  double tolerance) {
  GradCheckReport report;
  report.tolerance = tolerance;
  report.checked = entries.size();
  report.worst = entries;
  std::sort(report.worst.begin(), report.worst.end(),
            [](const GradCheckEntry& a, const GradCheckEntry& b) {
              return a.deviation > b.deviation;
            });
  if (!report.worst.empty()) report.max_deviation = report.worst.front().deviation;
  if (report.worst.size() > 16) report.worst.resize(16);
  return report;
}

GradCheckReport grad_check(const NetworkConfig& config, ParamSet& params,
                           const Tensor& image, const LossBuilder& loss_builder,
                           const GradCheckOptions& options, Rng& rng) {
  if (params.total_parameters() == 0) {
    raise(ErrorCategory::contract, "empty parameter set");
  }

  // Analytic gradients from one backward pass.
  std::vector<Tensor> analytic;
  analytic.reserve(params.entries.size());
  {
    Graph graph;
    Var loss = loss_builder(graph, config, params, image);
    graph.backward(loss);
    for (const auto& entry : params.entries) {
      analytic.push_back(graph.external_grad(&entry.tensor));
    }
  }

  std::size_t total = params.total_parameters();
  std::size_t samples = std::min(options.max_sampled, total);
  std::vector<GradCheckEntry> entries;
  entries.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t flat = rng.uniform_index(total);
    std::size_t array = 0;
    while (flat >= params.entries[array].tensor.numel()) {
      flat -= params.entries[array].tensor.numel();
      ++array;
    }
    double& slot = params.entries[array].tensor.values[flat];
    double saved = slot;
    double step = options.fd_step * std::max(1.0, std::abs(saved));

    slot = saved + step;
    double up;
    {
      Graph g;
      up = g.value(loss_builder(g, config, params, image)).values[0];
    }
    slot = saved - step;
    double down;
    {
      Graph g;
      down = g.value(loss_builder(g, config, params, image)).values[0];
    }
    slot = saved;

    GradCheckEntry e;
    e.param = params.entries[array].name;
    e.index = flat;
    e.analytic = analytic[array].values[flat];
    e.numeric = (up - down) / (2.0 * step);
    e.deviation = gradient_deviation(e.analytic, e.numeric, options.tolerance, options.abs_floor);
    entries.push_back(std::move(e));
  }
  GradCheckReport report = compare_gradients(entries, options.tolerance);
  if (report.worst.size() > options.report_worst) report.worst.resize(options.report_worst);
  return report;
}

}  // namespace hgn::net
