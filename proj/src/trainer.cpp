#include "hgn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hgn/error.hpp"
#include "hgn/eval.hpp"
#include "hgn/heatmap.hpp"
#include "hgn/threading.hpp"

namespace hgn::train {
namespace {

constexpr std::uint64_t kValSplitStream = 0x76616c73ULL;   // validation split
constexpr std::uint64_t kEpochShuffleStream = 0x65706f63ULL;

}  // namespace

SampleTermVars build_sample_terms(net::Graph& graph, const net::NetworkConfig& net_config,
                                  const net::ParamSet& params, const net::Tensor& image,
                                  const synth::Sample& sample, Mode mode, double sigma_hm,
                                  const BatchMask& mask) {
  net::ForwardOptions options;
  bool needs_decode = mode_uses_reconstruction(mode);
  bool needs_heatmap_loss = mode_uses_heatmap_loss(mode) && mask.heatmaps;
  options.heatmaps = needs_decode || needs_heatmap_loss;
  net::NetworkVars vars = net::forward(graph, net_config, params, image, options);

  SampleTermVars terms;
  terms.alpha = vars.alpha;

  net::Var normalized;
  if (options.heatmaps) normalized = graph.spatial_softmax(vars.heatmap_logits);

  if (needs_heatmap_loss) {
    hm::RenderResult target =
        hm::render_target(sample.landmarks, net_config.heatmap_height(),
                          net_config.heatmap_width(), net_config.heatmap_scale(), sigma_hm);
    terms.heatmap = graph.heatmap_l1(normalized, target.stack);
  }
  if (mode_uses_radius_loss(mode) && mask.radius) {
    terms.radius = graph.sum(graph.abs_diff(vars.radius, net::Tensor::scalar(sample.radius)));
  }
  if (mask.gaze) {
    net::Tensor gaze_target = net::Tensor::from({2}, {sample.gaze.theta, sample.gaze.phi});
    net::Var residuals;
    if (needs_decode) {
      net::Var points = graph.soft_argmax(normalized, net_config.heatmap_scale());
      net::Var angles = graph.reconstruct_gaze(points, vars.radius);
      residuals = graph.abs_diff(angles, std::move(gaze_target));
    } else {
      residuals = graph.abs_diff(vars.gaze_direct, std::move(gaze_target));
    }
    terms.gaze = mode_uses_uncertainty(mode)
                     ? graph.uncertainty_loss(residuals, vars.alpha)
                     : graph.sum(residuals);
  }
  return terms;
}

Mode parse_mode(const std::string& name) {
  if (name == "B") return Mode::baseline;
  if (name == "B+U") return Mode::baseline_unity;
  if (name == "HGN") return Mode::hgn;
  if (name == "HGN+UM") return Mode::hgn_um;
  if (name == "MTL") return Mode::mtl;
  if (name == "MTL-wo-radius") return Mode::mtl_wo_radius;
  if (name == "MTL-wo-lmks") return Mode::mtl_wo_lmks;
  raise(ErrorCategory::config, "unknown mode '" + name + "'");
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::baseline: return "B";
    case Mode::baseline_unity: return "B+U";
    case Mode::hgn: return "HGN";
    case Mode::hgn_um: return "HGN+UM";
    case Mode::mtl: return "MTL";
    case Mode::mtl_wo_radius: return "MTL-wo-radius";
    case Mode::mtl_wo_lmks: return "MTL-wo-lmks";
  }
  return "?";
}

bool mode_uses_reconstruction(Mode mode) {
  return mode == Mode::hgn || mode == Mode::hgn_um;
}

bool mode_uses_heatmap_loss(Mode mode) {
  return mode == Mode::hgn || mode == Mode::hgn_um || mode == Mode::mtl ||
         mode == Mode::mtl_wo_radius;
}

bool mode_uses_radius_loss(Mode mode) {
  return mode == Mode::hgn || mode == Mode::hgn_um || mode == Mode::mtl ||
         mode == Mode::mtl_wo_lmks;
}

bool mode_uses_uncertainty(Mode mode) { return mode == Mode::hgn_um; }

void TrainConfig::validate() const {
  if (epochs < 0) raise(ErrorCategory::config, "epochs must be >= 0");
  if (!(learning_rate > 0.0)) raise(ErrorCategory::config, "learning rate must be positive");
  if (!(decay_factor > 0.0)) raise(ErrorCategory::config, "decay factor must be positive");
  if (batch_size < 1) raise(ErrorCategory::config, "batch size must be >= 1");
  if (weight_decay < 0.0) raise(ErrorCategory::config, "weight decay must be >= 0");
  if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
    raise(ErrorCategory::config, "adam betas must lie in (0, 1)");
  }
  if (!(adam_eps > 0.0)) raise(ErrorCategory::config, "adam epsilon must be positive");
  if (mix_ratio < 0.0 || mix_ratio > 1.0) {
    raise(ErrorCategory::config, "mix ratio must lie in [0, 1]");
  }
  if (pretrain_epochs < 0) raise(ErrorCategory::config, "pretrain epochs must be >= 0");
  if (val_fraction < 0.0 || val_fraction >= 1.0) {
    raise(ErrorCategory::config, "validation fraction must lie in [0, 1)");
  }
  if (!(sigma_hm > 0.0)) raise(ErrorCategory::config, "sigma_hm must be positive");
  for (std::size_t i = 1; i < decay_epochs.size(); ++i) {
    if (decay_epochs[i] <= decay_epochs[i - 1]) {
      raise(ErrorCategory::config, "decay epochs must be strictly increasing");
    }
  }
}

double lr_at_epoch(const TrainConfig& config, int epoch) {
  if (epoch < 0 || epoch >= config.epochs) {
    raise(ErrorCategory::contract, "epoch outside the configured schedule");
  }
  int decays = 0;
  for (int e : config.decay_epochs) {
    if (epoch >= e) ++decays;
  }
  if (decays == 0) return config.learning_rate;
  double inv = 1.0 / config.decay_factor;
  double rounded = std::round(inv);
  if (std::abs(inv - rounded) < 1e-9 && rounded > 1.0) {
    // 1/factor is an integer: one division by the exact integer power keeps
    // the 1e-4 -> 1e-5 -> 1e-6 schedule bit-exact.
    double divisor = 1.0;
    for (int i = 0; i < decays; ++i) divisor *= rounded;
    return config.learning_rate / divisor;
  }
  return config.learning_rate * std::pow(config.decay_factor, decays);
}

BatchMask mask_for(synth::Domain domain) {
  if (domain == synth::Domain::synthetic) return {true, true, true};
  return {false, false, true};
}

std::vector<std::vector<const synth::Sample*>> mix_batches(
    const std::vector<const synth::Sample*>& synthetic,
    const std::vector<const synth::Sample*>& reallike, double ratio, int batch_size,
    Rng& rng) {
  if (batch_size < 1) raise(ErrorCategory::config, "batch size must be >= 1");
  if (ratio < 0.0 || ratio > 1.0) raise(ErrorCategory::config, "mix ratio must lie in [0, 1]");
  int per_synth = static_cast<int>(std::ceil(ratio * batch_size));
  int per_real = batch_size - per_synth;
  if (per_synth > 0 && synthetic.empty()) {
    raise(ErrorCategory::config, "mix ratio requires synthetic samples but none were given");
  }
  if (per_real > 0 && reallike.empty()) {
    raise(ErrorCategory::config, "mix ratio requires real-like samples but none were given");
  }

  std::vector<const synth::Sample*> synth_pool = synthetic;
  std::vector<const synth::Sample*> real_pool = reallike;
  rng.shuffle(synth_pool);
  rng.shuffle(real_pool);

  std::size_t limit = static_cast<std::size_t>(-1);
  if (per_synth > 0) limit = std::min(limit, synth_pool.size() / per_synth);
  if (per_real > 0) limit = std::min(limit, real_pool.size() / per_real);
  if (limit == static_cast<std::size_t>(-1)) limit = 0;

  std::vector<std::vector<const synth::Sample*>> batches(limit);
  for (std::size_t b = 0; b < limit; ++b) {
    auto& batch = batches[b];
    batch.reserve(batch_size);
    for (int i = 0; i < per_synth; ++i) batch.push_back(synth_pool[b * per_synth + i]);
    for (int i = 0; i < per_real; ++i) batch.push_back(real_pool[b * per_real + i]);
  }
  return batches;
}

AdamState AdamState::init(const net::ParamSet& params) {
  AdamState state;
  state.m.reserve(params.entries.size());
  state.v.reserve(params.entries.size());
  for (const auto& e : params.entries) {
    state.m.push_back(net::Tensor::zeros(e.tensor.shape));
    state.v.push_back(net::Tensor::zeros(e.tensor.shape));
  }
  return state;
}

StepResult train_step(const net::NetworkConfig& net_config, const TrainConfig& config,
                      const loss::LossWeights& weights, net::ParamSet& params,
                      AdamState& adam, const std::vector<const synth::Sample*>& batch,
                      double lr) {
  if (batch.empty()) raise(ErrorCategory::contract, "empty batch");

  // Supervised-sample counts per term (mean over supervised samples).
  std::size_t n_heat = 0, n_radius = 0, n_gaze = 0;
  for (const synth::Sample* s : batch) {
    BatchMask mask = mask_for(s->domain);
    if (mode_uses_heatmap_loss(config.mode) && mask.heatmaps) ++n_heat;
    if (mode_uses_radius_loss(config.mode) && mask.radius) ++n_radius;
    if (mask.gaze) ++n_gaze;
  }
  double c_heat = n_heat ? weights.beta1 / static_cast<double>(n_heat) : 0.0;
  double c_radius = n_radius ? weights.beta2 / static_cast<double>(n_radius) : 0.0;
  double c_gaze = n_gaze ? weights.beta3 / static_cast<double>(n_gaze) : 0.0;

  int threads = thread_count();
  int blocks = std::max(1, std::min<int>(threads, static_cast<int>(batch.size())));
  struct BlockAcc {
    std::vector<net::Tensor> grads;
    double heat = 0.0, radius = 0.0, gaze = 0.0;
    double q_synth = 0.0, q_real = 0.0;
    std::size_t n_synth = 0, n_real = 0;
    std::string failure;
  };
  std::vector<BlockAcc> acc(blocks);
  for (auto& a : acc) {
    a.grads.reserve(params.entries.size());
    for (const auto& e : params.entries) a.grads.push_back(net::Tensor::zeros(e.tensor.shape));
  }

  parallel_blocks(batch.size(), threads, [&](std::size_t begin, std::size_t end, int block) {
    BlockAcc& local = acc[block];
    for (std::size_t i = begin; i < end; ++i) {
      const synth::Sample& sample = *batch[i];
      BatchMask mask = mask_for(sample.domain);
      Image input = sample.image;
      if (config.hist_eq) histogram_equalize(input);
      net::Tensor image = net::image_to_tensor(input);
      net::Graph graph;
      SampleTermVars terms;
      try {
        terms = build_sample_terms(graph, net_config, params, image, sample, config.mode,
                                   config.sigma_hm, mask);
      } catch (const std::exception& e) {
        // Never let an exception escape a worker thread.
        if (local.failure.empty()) local.failure = e.what();
        return;
      }

      auto term_value = [&](net::Var v, const char* name) {
        if (!v.valid()) return 0.0;
        double value = graph.value(v).values[0];
        if (!std::isfinite(value) && local.failure.empty()) {
          local.failure = std::string("non-finite ") + name;
        }
        return value;
      };
      double heat = term_value(terms.heatmap, "heatmap loss");
      double radius = term_value(terms.radius, "radius loss");
      double gaze = term_value(terms.gaze, "gaze loss");
      if (!local.failure.empty()) return;
      local.heat += heat;
      local.radius += radius;
      local.gaze += gaze;

      const net::Tensor& alpha = graph.value(terms.alpha);
      double quality = 0.5 * (std::exp(-alpha.values[0]) + std::exp(-alpha.values[1]));
      if (sample.domain == synth::Domain::synthetic) {
        local.q_synth += quality;
        local.n_synth++;
      } else {
        local.q_real += quality;
        local.n_real++;
      }

      std::vector<std::pair<net::Var, double>> weighted;
      if (terms.heatmap.valid()) weighted.emplace_back(terms.heatmap, c_heat);
      if (terms.radius.valid()) weighted.emplace_back(terms.radius, c_radius);
      if (terms.gaze.valid()) weighted.emplace_back(terms.gaze, c_gaze);
      if (weighted.empty()) continue;
      net::Var root = graph.weighted_sum(weighted);
      graph.backward(root);
      for (std::size_t p = 0; p < params.entries.size(); ++p) {
        graph.external_grad_into(&params.entries[p].tensor, local.grads[p]);
      }
    }
  });

  for (const auto& a : acc) {
    if (!a.failure.empty()) {
      raise(ErrorCategory::contract, "training step failed: " + a.failure);
    }
  }

  StepResult result;
  double sum_heat = 0.0, sum_radius = 0.0, sum_gaze = 0.0;
  for (const auto& a : acc) {
    sum_heat += a.heat;
    sum_radius += a.radius;
    sum_gaze += a.gaze;
    result.quality_sum_synth += a.q_synth;
    result.quality_sum_real += a.q_real;
    result.count_synth += a.n_synth;
    result.count_real += a.n_real;
  }
  double heat_mean = n_heat ? sum_heat / static_cast<double>(n_heat) : 0.0;
  double radius_mean = n_radius ? sum_radius / static_cast<double>(n_radius) : 0.0;
  double gaze_mean = n_gaze ? sum_gaze / static_cast<double>(n_gaze) : 0.0;
  result.breakdown = loss::total_loss(heat_mean, radius_mean, gaze_mean, weights,
                                      mode_uses_uncertainty(config.mode));

  // Merge block gradients in block order, then one ADAM update.
  for (std::size_t p = 0; p < params.entries.size(); ++p) {
    net::Tensor& grad = acc[0].grads[p];
    for (int b = 1; b < blocks; ++b) {
      for (std::size_t i = 0; i < grad.numel(); ++i) grad.values[i] += acc[b].grads[p].values[i];
    }
    if (!grad.all_finite()) {
      raise(ErrorCategory::contract,
            "non-finite gradient for " + params.entries[p].name + " during training");
    }
  }
  adam_update(params, adam, acc[0].grads, lr, config);
  return result;
}

void adam_update(net::ParamSet& params, AdamState& adam,
                 const std::vector<net::Tensor>& grads, double lr,
                 const TrainConfig& config) {
  if (grads.size() != params.entries.size()) {
    raise(ErrorCategory::contract, "gradient list does not match parameter entries");
  }
  adam.step++;
  double bc1 = 1.0 - std::pow(config.adam_beta1, static_cast<double>(adam.step));
  double bc2 = 1.0 - std::pow(config.adam_beta2, static_cast<double>(adam.step));
  for (std::size_t p = 0; p < params.entries.size(); ++p) {
    net::Tensor& param = params.entries[p].tensor;
    net::Tensor& m = adam.m[p];
    net::Tensor& v = adam.v[p];
    for (std::size_t i = 0; i < param.numel(); ++i) {
      double g = grads[p].values[i];
      m.values[i] = config.adam_beta1 * m.values[i] + (1.0 - config.adam_beta1) * g;
      v.values[i] = config.adam_beta2 * v.values[i] + (1.0 - config.adam_beta2) * g * g;
      double mhat = m.values[i] / bc1;
      double vhat = v.values[i] / bc2;
      param.values[i] -= lr * (mhat / (std::sqrt(vhat) + config.adam_eps) +
                               config.weight_decay * param.values[i]);
    }
  }
}

TrainResult train(const net::NetworkConfig& net_config, const TrainConfig& config,
                  const loss::LossWeights& weights, const TrainInputs& data,
                  const CheckpointHook& checkpoint_hook) {
  net_config.validate();
  config.validate();

  bool needs_synth = mode_uses_heatmap_loss(config.mode) || mode_uses_radius_loss(config.mode);
  std::size_t n_synth = data.synthetic ? data.synthetic->samples.size() : 0;
  std::size_t n_real = data.reallike ? data.reallike->samples.size() : 0;
  if (needs_synth && n_synth == 0) {
    raise(ErrorCategory::config,
          to_string(config.mode) + " mode needs synthetic supervision but got none");
  }
  if (n_synth == 0 && n_real == 0) {
    raise(ErrorCategory::config, "no training data");
  }

  TrainResult result;
  result.params = net::init_params(net_config, net_config.seed);
  if (config.epochs == 0) return result;

  // Held-out split of the synthetic set for the per-epoch metric.
  std::vector<const synth::Sample*> synth_train, val;
  if (n_synth > 0) {
    std::vector<std::size_t> order(n_synth);
    for (std::size_t i = 0; i < n_synth; ++i) order[i] = i;
    Rng split_rng = Rng::derive(config.seed, kValSplitStream);
    split_rng.shuffle(order);
    std::size_t n_val = static_cast<std::size_t>(config.val_fraction * n_synth);
    for (std::size_t i = 0; i < n_synth; ++i) {
      const synth::Sample* s = &data.synthetic->samples[order[i]];
      (i < n_val ? val : synth_train).push_back(s);
    }
  }
  std::vector<const synth::Sample*> real_train;
  real_train.reserve(n_real);
  for (std::size_t i = 0; i < n_real; ++i) real_train.push_back(&data.reallike->samples[i]);

  synth::Dataset val_set;
  for (const synth::Sample* s : val) val_set.samples.push_back(*s);

  AdamState adam = AdamState::init(result.params);
  std::uint64_t epoch_counter = 0;

  auto run_epoch = [&](const TrainConfig& phase_config, double ratio, double lr) {
    Rng shuffle_rng = Rng::derive(config.seed ^ kEpochShuffleStream, epoch_counter++);
    auto batches = mix_batches(synth_train, real_train, ratio, config.batch_size, shuffle_rng);
    EpochMetrics metrics;
    std::size_t steps = 0;
    double q_synth = 0.0, q_real = 0.0;
    std::size_t qn_synth = 0, qn_real = 0;
    for (const auto& batch : batches) {
      StepResult step =
          train_step(net_config, phase_config, weights, result.params, adam, batch, lr);
      metrics.heatmap_term += step.breakdown.heatmap_term;
      metrics.radius_term += step.breakdown.radius_term;
      metrics.gaze_term += step.breakdown.gaze_term;
      metrics.total += step.breakdown.total;
      q_synth += step.quality_sum_synth;
      q_real += step.quality_sum_real;
      qn_synth += step.count_synth;
      qn_real += step.count_real;
      ++steps;
    }
    if (steps > 0) {
      metrics.heatmap_term /= static_cast<double>(steps);
      metrics.radius_term /= static_cast<double>(steps);
      metrics.gaze_term /= static_cast<double>(steps);
      metrics.total /= static_cast<double>(steps);
    }
    metrics.mean_quality_synth = qn_synth ? q_synth / static_cast<double>(qn_synth) : 0.0;
    metrics.mean_quality_reallike = qn_real ? q_real / static_cast<double>(qn_real) : 0.0;
    metrics.lr = lr;
    return metrics;
  };

  // Synthetic-only pretraining (not logged; warmup phase). The uncertainty
  // term stays off here: it models the noisy-label regime, which the clean
  // synthetic phase does not have, and keeping it on just drags alpha down.
  if (config.pretrain_epochs > 0 && !synth_train.empty()) {
    TrainConfig pretrain_config = config;
    if (pretrain_config.mode == Mode::hgn_um) pretrain_config.mode = Mode::hgn;
    for (int e = 0; e < config.pretrain_epochs; ++e) {
      run_epoch(pretrain_config, 1.0, config.learning_rate);
    }
  }

  double main_ratio = real_train.empty() ? 1.0 : (synth_train.empty() ? 0.0 : config.mix_ratio);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double lr = lr_at_epoch(config, epoch);
    EpochMetrics metrics = run_epoch(config, main_ratio, lr);
    metrics.epoch = epoch;
    if (!val_set.samples.empty()) {
      eval::EvalReport report =
          eval::evaluate(net_config, result.params, val_set, config.mode, config.hist_eq);
      metrics.val_angular_deg = report.mean_deg;
    }
    result.log.push_back(metrics);
    if (checkpoint_hook && config.checkpoint_every > 0 &&
        (epoch + 1) % config.checkpoint_every == 0) {
      checkpoint_hook(epoch, result.params);
    }
  }
  return result;
}

std::string format_metrics_line(const EpochMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d %.10g %.10g %.10g %.10g %.10g %.10g %.10g %.10g",
                m.epoch, m.lr, m.heatmap_term, m.radius_term, m.gaze_term, m.total,
                m.val_angular_deg, m.mean_quality_synth, m.mean_quality_reallike);
  return buf;
}

void append_metrics(const std::filesystem::path& path, const std::vector<EpochMetrics>& log) {
  std::ofstream out(path, std::ios::app);
  if (!out) raise(ErrorCategory::io, "cannot open " + path.string() + " for appending");
  for (const auto& m : log) out << format_metrics_line(m) << "\n";
  if (!out) raise(ErrorCategory::io, "short write to " + path.string());
}

}  // namespace hgn::train
