#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "hgn/trainer.hpp"

namespace hgn::eval {

struct Prediction {
  geom::LandmarkSet landmarks;  // soft-argmax decode
  double radius = 0.0;
  geom::GazeAngles gaze;  // reconstruction route in HGN modes, direct head otherwise
  std::array<double, 2> alpha{};
};

Prediction predict(const net::NetworkConfig& config, const net::ParamSet& params,
                   const synth::Sample& sample, train::Mode mode, bool hist_eq);

// Mean per-sample e^{-alpha} over the 2 components, from the raw head output.
double quality_scalar(const std::array<double, 2>& alpha);

struct EvalReport {
  double mean_deg = 0.0;
  double median_deg = 0.0;
  std::vector<double> per_sample_deg;
  std::string mode;
  std::string dataset_id;
  std::size_t count = 0;
};

// Compensated mean + exact median over the given errors.
EvalReport summarize(std::vector<double> per_sample_deg);

EvalReport evaluate(const net::NetworkConfig& config, const net::ParamSet& params,
                    const synth::Dataset& dataset, train::Mode mode, bool hist_eq);

struct DomainStats {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

struct QualityReport {
  std::vector<double> quality;             // per sample, dataset order
  std::vector<std::size_t> sorted_indices; // ascending quality
  std::vector<std::size_t> bin_counts;
  double bin_lo = 0.0;
  double bin_hi = 0.0;
  DomainStats synthetic;
  DomainStats reallike;
  std::vector<std::pair<double, std::size_t>> quantile_indices;  // (q, sample index)
};

QualityReport quality_report(const net::NetworkConfig& config, const net::ParamSet& params,
                             const synth::Dataset& dataset,
                             const std::vector<double>& quantiles, bool hist_eq,
                             std::size_t bins = 20);

}  // namespace hgn::eval
