#include "hgn/eval.hpp"

#include <algorithm>
#include <cmath>

#include "hgn/error.hpp"
#include "hgn/threading.hpp"

namespace hgn::eval {
namespace {

// Neumaier-compensated sum; keeps the mean permutation-independent far
// below the 1e-12 contract.
double compensated_mean(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0, comp = 0.0;
  for (double v : values) {
    double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  return (sum + comp) / static_cast<double>(values.size());
}

}  // namespace

double quality_scalar(const std::array<double, 2>& alpha) {
  // Raw head output: the [-10, 10] clamp guards the loss evaluation, not
  // the reported quality, and clamping here would flatten every saturated
  // sample onto one value.
  return 0.5 * (std::exp(-alpha[0]) + std::exp(-alpha[1]));
}

Prediction predict(const net::NetworkConfig& config, const net::ParamSet& params,
                   const synth::Sample& sample, train::Mode mode, bool hist_eq) {
  Image input = sample.image;
  if (hist_eq) histogram_equalize(input);
  net::NetworkOutput out = net::run_inference(config, params, input);

  Prediction pred;
  pred.radius = out.radius;
  pred.alpha = out.alpha;

  hm::HeatmapStack normalized = hm::spatial_softmax(out.heatmap_logits);
  normalized.scale = config.heatmap_scale();
  std::vector<geom::Point> points = hm::soft_argmax(normalized);
  for (int i = 0; i < geom::kLandmarkCount; ++i) pred.landmarks.points[i] = points[i];

  if (train::mode_uses_reconstruction(mode)) {
    geom::ReconResult recon = geom::reconstruct_gaze(
        pred.landmarks.points[geom::kIrisCenterIndex],
        pred.landmarks.points[geom::kEyeballCenterIndex], pred.radius);
    pred.gaze = recon.angles;
  } else {
    pred.gaze = {out.gaze_direct[0], out.gaze_direct[1]};
  }
  return pred;
}

EvalReport summarize(std::vector<double> per_sample_deg) {
  EvalReport report;
  report.count = per_sample_deg.size();
  report.mean_deg = compensated_mean(per_sample_deg);
  std::vector<double> sorted = per_sample_deg;
  std::sort(sorted.begin(), sorted.end());
  if (!sorted.empty()) {
    std::size_t n = sorted.size();
    report.median_deg = n % 2 == 1 ? sorted[n / 2]
                                   : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  }
  report.per_sample_deg = std::move(per_sample_deg);
  return report;
}

EvalReport evaluate(const net::NetworkConfig& config, const net::ParamSet& params,
                    const synth::Dataset& dataset, train::Mode mode, bool hist_eq) {
  if (dataset.samples.empty()) {
    raise(ErrorCategory::config, "cannot evaluate an empty dataset");
  }
  std::vector<double> errors(dataset.samples.size(), 0.0);
  parallel_blocks(dataset.samples.size(), thread_count(),
                  [&](std::size_t begin, std::size_t end, int) {
                    for (std::size_t i = begin; i < end; ++i) {
                      Prediction p = predict(config, params, dataset.samples[i], mode, hist_eq);
                      errors[i] = geom::angular_error_deg(dataset.samples[i].gaze, p.gaze);
                    }
                  });
  EvalReport report = summarize(std::move(errors));
  report.mode = train::to_string(mode);
  return report;
}

QualityReport quality_report(const net::NetworkConfig& config, const net::ParamSet& params,
                             const synth::Dataset& dataset,
                             const std::vector<double>& quantiles, bool hist_eq,
                             std::size_t bins) {
  if (dataset.samples.empty()) {
    raise(ErrorCategory::config, "cannot build a quality report for an empty dataset");
  }
  if (bins == 0) raise(ErrorCategory::config, "histogram needs at least one bin");
  for (double q : quantiles) {
    if (q < 0.0 || q > 1.0) raise(ErrorCategory::config, "quantiles must lie in [0, 1]");
  }

  QualityReport report;
  report.quality.assign(dataset.samples.size(), 0.0);
  parallel_blocks(dataset.samples.size(), thread_count(),
                  [&](std::size_t begin, std::size_t end, int) {
                    for (std::size_t i = begin; i < end; ++i) {
                      Prediction p = predict(config, params, dataset.samples[i],
                                             train::Mode::hgn_um, hist_eq);
                      report.quality[i] = quality_scalar(p.alpha);
                    }
                  });

  report.sorted_indices.resize(report.quality.size());
  for (std::size_t i = 0; i < report.sorted_indices.size(); ++i) report.sorted_indices[i] = i;
  std::sort(report.sorted_indices.begin(), report.sorted_indices.end(),
            [&](std::size_t a, std::size_t b) {
              if (report.quality[a] != report.quality[b]) {
                return report.quality[a] < report.quality[b];
              }
              return a < b;
            });

  report.bin_lo = *std::min_element(report.quality.begin(), report.quality.end());
  report.bin_hi = *std::max_element(report.quality.begin(), report.quality.end());
  report.bin_counts.assign(bins, 0);
  double span = report.bin_hi - report.bin_lo;
  for (double q : report.quality) {
    std::size_t b = span > 0.0
                        ? std::min(bins - 1, static_cast<std::size_t>((q - report.bin_lo) / span *
                                                                      static_cast<double>(bins)))
                        : 0;
    report.bin_counts[b]++;
  }

  auto accumulate_domain = [&](synth::Domain domain) {
    DomainStats stats;
    double sum = 0.0;
    for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
      if (dataset.samples[i].domain != domain) continue;
      sum += report.quality[i];
      stats.count++;
    }
    if (stats.count > 0) {
      stats.mean = sum / static_cast<double>(stats.count);
      double var = 0.0;
      for (std::size_t i = 0; i < dataset.samples.size(); ++i) {
        if (dataset.samples[i].domain != domain) continue;
        double d = report.quality[i] - stats.mean;
        var += d * d;
      }
      stats.stddev = std::sqrt(var / static_cast<double>(stats.count));
    }
    return stats;
  };
  report.synthetic = accumulate_domain(synth::Domain::synthetic);
  report.reallike = accumulate_domain(synth::Domain::real_like);

  for (double q : quantiles) {
    std::size_t pos = static_cast<std::size_t>(
        std::lround(q * static_cast<double>(report.sorted_indices.size() - 1)));
    report.quantile_indices.emplace_back(q, report.sorted_indices[pos]);
  }
  return report;
}

}  // namespace hgn::eval
