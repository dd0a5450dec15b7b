#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hgn/losses.hpp"
#include "hgn/network.hpp"
#include "hgn/rng.hpp"
#include "hgn/synthgen.hpp"

namespace hgn::train {

// B         direct gaze regression only
// B+U       same loss as B; the synthetic set is simply part of the data
// HGN       heatmap + radius supervision, gaze through reconstruction
// HGN+UM    HGN with the uncertainty-weighted gaze term
// MTL       heatmap + radius + direct gaze, no reconstruction
// MTL-wo-radius / MTL-wo-lmks: MTL with one auxiliary head dropped
enum class Mode {
  baseline,
  baseline_unity,
  hgn,
  hgn_um,
  mtl,
  mtl_wo_radius,
  mtl_wo_lmks,
};

Mode parse_mode(const std::string& name);  // throws config error
std::string to_string(Mode mode);

bool mode_uses_reconstruction(Mode mode);
bool mode_uses_heatmap_loss(Mode mode);
bool mode_uses_radius_loss(Mode mode);
bool mode_uses_uncertainty(Mode mode);

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 1e-4;
  std::vector<int> decay_epochs = {20, 60};
  double decay_factor = 0.1;
  int batch_size = 64;
  double weight_decay = 5e-5;  // decoupled
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  double mix_ratio = 0.5;  // synthetic fraction per batch
  Mode mode = Mode::hgn;
  int pretrain_epochs = 10;  // synthetic-only warmup
  std::uint64_t seed = 0;
  double val_fraction = 0.1;  // held-out split of the synthetic set
  int checkpoint_every = 0;   // epochs between checkpoint hook calls; 0 = never
  bool hist_eq = false;       // histogram-equalize inputs (train and eval alike)
  double sigma_hm = 2.0;      // target Gaussian width, heatmap cells

  void validate() const;
};

// Piecewise-constant step schedule; the decay applies from the named epoch.
double lr_at_epoch(const TrainConfig& config, int epoch);

struct BatchMask {
  bool heatmaps = false;
  bool radius = false;
  bool gaze = false;
};

BatchMask mask_for(synth::Domain domain);

// Per-epoch batch plan: each batch holds ceil(ratio * B) synthetic samples,
// the rest real-like; each set is consumed at most once per epoch.
std::vector<std::vector<const synth::Sample*>> mix_batches(
    const std::vector<const synth::Sample*>& synthetic,
    const std::vector<const synth::Sample*>& reallike, double ratio, int batch_size,
    Rng& rng);

struct AdamState {
  std::vector<net::Tensor> m;
  std::vector<net::Tensor> v;
  long step = 0;

  static AdamState init(const net::ParamSet& params);
};

// One bias-corrected ADAM step with decoupled weight decay; grads aligned
// with the parameter entries.
void adam_update(net::ParamSet& params, AdamState& adam,
                 const std::vector<net::Tensor>& grads, double lr,
                 const TrainConfig& config);

struct StepResult {
  loss::LossBreakdown breakdown;
  double quality_sum_synth = 0.0;  // sum of per-sample mean e^{-alpha}
  double quality_sum_real = 0.0;
  std::size_t count_synth = 0;
  std::size_t count_real = 0;
};

// Per-sample loss terms on an existing trace. Vars are invalid when the
// (mode, mask) combination leaves a term inactive.
struct SampleTermVars {
  net::Var heatmap;
  net::Var radius;
  net::Var gaze;  // plain L1 or the uncertainty term
  net::Var alpha;
};

SampleTermVars build_sample_terms(net::Graph& graph, const net::NetworkConfig& net_config,
                                  const net::ParamSet& params, const net::Tensor& image,
                                  const synth::Sample& sample, Mode mode, double sigma_hm,
                                  const BatchMask& mask);

// One ADAM update over the batch; throws a contract error naming the first
// loss term that went non-finite.
StepResult train_step(const net::NetworkConfig& net_config, const TrainConfig& config,
                      const loss::LossWeights& weights, net::ParamSet& params,
                      AdamState& adam, const std::vector<const synth::Sample*>& batch,
                      double lr);

struct EpochMetrics {
  int epoch = 0;
  double lr = 0.0;
  double heatmap_term = 0.0;
  double radius_term = 0.0;
  double gaze_term = 0.0;  // uncertainty term in HGN+UM
  double total = 0.0;
  double val_angular_deg = 0.0;
  double mean_quality_synth = 0.0;
  double mean_quality_reallike = 0.0;
};

struct TrainInputs {
  const synth::Dataset* synthetic = nullptr;
  const synth::Dataset* reallike = nullptr;
};

struct TrainResult {
  net::ParamSet params;
  std::vector<EpochMetrics> log;
};

using CheckpointHook = std::function<void(int epoch, const net::ParamSet&)>;

TrainResult train(const net::NetworkConfig& net_config, const TrainConfig& config,
                  const loss::LossWeights& weights, const TrainInputs& data,
                  const CheckpointHook& checkpoint_hook = nullptr);

// Fixed-format metrics log, one line per epoch:
//   epoch lr L_h L_r L_g L_total val_angular_deg mean_quality_synth mean_quality_reallike
void append_metrics(const std::filesystem::path& path, const std::vector<EpochMetrics>& log);
std::string format_metrics_line(const EpochMetrics& m);

}  // namespace hgn::train
