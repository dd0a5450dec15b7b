#include "hgn/network.hpp"

#include <cmath>

#include "hgn/error.hpp"
#include "hgn/rng.hpp"

namespace hgn::net {
namespace {

Tensor he_normal(Rng& rng, std::vector<std::size_t> shape, std::size_t fan_in) {
  Tensor t = Tensor::zeros(std::move(shape));
  double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& v : t.values) v = rng.normal(0.0, stddev);
  return t;
}

}  // namespace

void NetworkConfig::validate() const {
  if (stage_channels.empty()) {
    raise(ErrorCategory::config, "at least one conv stage is required");
  }
  for (int c : stage_channels) {
    if (c <= 0) raise(ErrorCategory::config, "stage channel counts must be positive");
  }
  int factor = 1 << stage_channels.size();
  if (input_h <= 0 || input_w <= 0 || input_h % factor != 0 || input_w % factor != 0) {
    raise(ErrorCategory::config,
          "input size must be divisible by 2^stages (" + std::to_string(factor) + ")");
  }
}

Tensor* ParamSet::find(std::string_view name) {
  for (auto& e : entries) {
    if (e.name == name) return &e.tensor;
  }
  return nullptr;
}

const Tensor* ParamSet::find(std::string_view name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e.tensor;
  }
  return nullptr;
}

std::size_t ParamSet::total_parameters() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.tensor.numel();
  return n;
}

std::vector<int> decoder_channels(const NetworkConfig& config) {
  int stages = static_cast<int>(config.stage_channels.size());
  std::vector<int> out;
  for (int j = 0; j + 1 < stages; ++j) {
    bool last = j + 2 == stages;
    int mirrored = config.stage_channels[stages - 2 - j];
    out.push_back(last ? config.stage_channels[0] : std::max(4, mirrored / 2));
  }
  return out;
}

ParamSet init_params(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  ParamSet params;
  auto push = [&params](std::string name, Tensor t) {
    params.entries.push_back({std::move(name), std::move(t)});
  };

  const auto& ch = config.stage_channels;
  int stages = static_cast<int>(ch.size());
  int prev = 1;
  for (int i = 0; i < stages; ++i) {
    std::size_t fan_in = static_cast<std::size_t>(prev) * 9;
    push("enc" + std::to_string(i) + ".w",
         he_normal(rng, {static_cast<std::size_t>(ch[i]), static_cast<std::size_t>(prev), 3, 3},
                   fan_in));
    push("enc" + std::to_string(i) + ".b", Tensor::zeros({static_cast<std::size_t>(ch[i])}));
    prev = ch[i];
  }
  std::vector<int> dec_ch = decoder_channels(config);
  int dec_in = ch[stages - 1];
  for (int j = 0; j + 1 < stages; ++j) {
    int dec_out = dec_ch[j];
    std::size_t fan_in = static_cast<std::size_t>(dec_in) * 9;
    push("dec" + std::to_string(j) + ".w",
         he_normal(rng, {static_cast<std::size_t>(dec_out), static_cast<std::size_t>(dec_in), 3, 3},
                   fan_in));
    push("dec" + std::to_string(j) + ".b", Tensor::zeros({static_cast<std::size_t>(dec_out)}));
    dec_in = dec_out;
  }
  push("heat.w", he_normal(rng, {static_cast<std::size_t>(geom::kLandmarkCount),
                                 static_cast<std::size_t>(dec_in), 1, 1},
                           static_cast<std::size_t>(dec_in)));
  push("heat.b", Tensor::zeros({static_cast<std::size_t>(geom::kLandmarkCount)}));

  std::size_t feat = static_cast<std::size_t>(ch[stages - 1]);
  push("radius.w", he_normal(rng, {1, feat}, feat));
  Tensor radius_bias = Tensor::zeros({1});
  radius_bias.values[0] = config.radius_bias_init;
  push("radius.b", std::move(radius_bias));
  push("alpha.w", he_normal(rng, {2, feat}, feat));
  push("alpha.b", Tensor::zeros({2}));
  push("gaze.w", he_normal(rng, {2, feat}, feat));
  push("gaze.b", Tensor::zeros({2}));
  return params;
}

Tensor image_to_tensor(const Image& image) {
  Tensor t = Tensor::zeros({1, static_cast<std::size_t>(image.height),
                            static_cast<std::size_t>(image.width)});
  t.values = image.pixels;
  return t;
}

NetworkVars forward(Graph& graph, const NetworkConfig& config, const ParamSet& params,
                    const Tensor& image, const ForwardOptions& options) {
  config.validate();
  if (image.shape.size() != 3 || image.shape[0] != 1 ||
      image.shape[1] != static_cast<std::size_t>(config.input_h) ||
      image.shape[2] != static_cast<std::size_t>(config.input_w)) {
    raise(ErrorCategory::contract, "image shape does not match network config");
  }
  auto var_of = [&](std::string_view name) {
    const Tensor* t = params.find(name);
    if (!t) raise(ErrorCategory::contract, "missing parameter " + std::string(name));
    return graph.external(t, true);
  };

  Var x = graph.external(&image, false);
  int stages = static_cast<int>(config.stage_channels.size());
  for (int i = 0; i < stages; ++i) {
    std::string base = "enc" + std::to_string(i);
    x = graph.relu(graph.conv2d(x, var_of(base + ".w"), var_of(base + ".b"), 2));
  }
  Var deepest = x;

  NetworkVars out;
  if (options.heatmaps) {
    Var d = deepest;
    for (int j = 0; j + 1 < stages; ++j) {
      std::string base = "dec" + std::to_string(j);
      d = graph.relu(graph.conv2d(graph.upsample_nearest2x(d), var_of(base + ".w"),
                                  var_of(base + ".b"), 1));
    }
    out.heatmap_logits = graph.conv2d(d, var_of("heat.w"), var_of("heat.b"), 1);
  }
  out.pooled = graph.global_avg_pool(deepest);
  out.radius = graph.offset(
      graph.softplus(graph.affine(out.pooled, var_of("radius.w"), var_of("radius.b"))), 1.0);
  out.alpha = graph.affine(out.pooled, var_of("alpha.w"), var_of("alpha.b"));
  out.gaze_direct = graph.affine(out.pooled, var_of("gaze.w"), var_of("gaze.b"));
  return out;
}

NetworkOutput run_inference(const NetworkConfig& config, const ParamSet& params,
                            const Image& image) {
  Tensor input = image_to_tensor(image);
  Graph graph;
  NetworkVars vars = forward(graph, config, params, input);

  NetworkOutput out;
  const Tensor& logits = graph.value(vars.heatmap_logits);
  out.heatmap_logits = hm::HeatmapStack(static_cast<int>(logits.shape[0]),
                                        static_cast<int>(logits.shape[1]),
                                        static_cast<int>(logits.shape[2]),
                                        config.heatmap_scale());
  out.heatmap_logits.data = logits.values;
  out.radius = graph.value(vars.radius).values[0];
  const Tensor& alpha = graph.value(vars.alpha);
  out.alpha = {alpha.values[0], alpha.values[1]};
  const Tensor& gaze = graph.value(vars.gaze_direct);
  out.gaze_direct = {gaze.values[0], gaze.values[1]};
  if (!logits.all_finite() || !std::isfinite(out.radius) ||
      !std::isfinite(out.alpha[0]) || !std::isfinite(out.alpha[1]) ||
      !std::isfinite(out.gaze_direct[0]) || !std::isfinite(out.gaze_direct[1])) {
    raise(ErrorCategory::contract, "non-finite network output");
  }
  return out;
}

}  // namespace hgn::net
