#include "hgn/config_io.hpp"

#include <fstream>

#include "hgn/error.hpp"

namespace hgn::cfg {
namespace {

using nlohmann::json;

template <typename T>
void read_key(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    raise(ErrorCategory::config, std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_pair(const json& j, const char* key, double& lo, double& hi) {
  if (!j.contains(key)) return;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2) {
    raise(ErrorCategory::config, std::string("'") + key + "' must be a [lo, hi] pair");
  }
  lo = v[0].get<double>();
  hi = v[1].get<double>();
}

}  // namespace

FullConfig parse_config(const json& j) {
  FullConfig c;
  if (j.contains("synth")) {
    const json& s = j.at("synth");
    read_key(s, "image_h", c.synth.image_h);
    read_key(s, "image_w", c.synth.image_w);
    read_pair(s, "theta_deg", c.synth.theta_min_deg, c.synth.theta_max_deg);
    read_pair(s, "phi_deg", c.synth.phi_min_deg, c.synth.phi_max_deg);
    read_pair(s, "radius", c.synth.radius_min, c.synth.radius_max);
    read_key(s, "center_jitter", c.synth.center_jitter);
    read_pair(s, "psi", c.synth.psi_min, c.synth.psi_max);
    read_key(s, "seed", c.synth.seed);
    read_key(s, "count", c.synth.count);
    read_key(s, "mean_radius_labels", c.synth.mean_radius_labels);
    read_key(s, "reallike_fraction", c.synth.reallike_fraction);
    if (s.contains("augment")) {
      const json& a = s.at("augment");
      read_key(a, "blur", c.synth.augment.blur_prob);
      read_key(a, "rescale", c.synth.augment.rescale_prob);
      read_key(a, "brightness", c.synth.augment.brightness_prob);
      read_key(a, "contrast", c.synth.augment.contrast_prob);
      read_key(a, "occlusion_lines", c.synth.augment.occlusion_lines_prob);
    }
    if (s.contains("degrade")) {
      const json& d = s.at("degrade");
      read_key(d, "gaze_sigma", c.synth.degrade.gaze_sigma);
      read_key(d, "occlusion", c.synth.degrade.occlusion_prob);
      read_key(d, "blur", c.synth.degrade.blur_prob);
    }
  }
  if (j.contains("net")) {
    const json& n = j.at("net");
    read_key(n, "input_h", c.network.input_h);
    read_key(n, "input_w", c.network.input_w);
    read_key(n, "stage_channels", c.network.stage_channels);
    read_key(n, "radius_bias_init", c.network.radius_bias_init);
    read_key(n, "seed", c.network.seed);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    read_key(t, "epochs", c.train.epochs);
    read_key(t, "lr", c.train.learning_rate);
    read_key(t, "decay_epochs", c.train.decay_epochs);
    read_key(t, "decay_factor", c.train.decay_factor);
    read_key(t, "batch_size", c.train.batch_size);
    read_key(t, "weight_decay", c.train.weight_decay);
    read_key(t, "adam_beta1", c.train.adam_beta1);
    read_key(t, "adam_beta2", c.train.adam_beta2);
    read_key(t, "adam_eps", c.train.adam_eps);
    read_key(t, "mix_ratio", c.train.mix_ratio);
    if (t.contains("mode")) c.train.mode = train::parse_mode(t.at("mode").get<std::string>());
    read_key(t, "pretrain_epochs", c.train.pretrain_epochs);
    read_key(t, "seed", c.train.seed);
    read_key(t, "val_fraction", c.train.val_fraction);
    read_key(t, "checkpoint_every", c.train.checkpoint_every);
    read_key(t, "hist_eq", c.train.hist_eq);
    read_key(t, "sigma_hm", c.train.sigma_hm);
  }
  if (j.contains("loss")) {
    const json& l = j.at("loss");
    read_key(l, "beta1", c.weights.beta1);
    read_key(l, "beta2", c.weights.beta2);
    read_key(l, "beta3", c.weights.beta3);
  }
  return c;
}

FullConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCategory::io, "cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    raise(ErrorCategory::config, "config is not valid json: " + std::string(e.what()));
  }
  return parse_config(j);
}

json to_json(const FullConfig& c) {
  json j;
  j["synth"] = {
      {"image_h", c.synth.image_h},
      {"image_w", c.synth.image_w},
      {"theta_deg", {c.synth.theta_min_deg, c.synth.theta_max_deg}},
      {"phi_deg", {c.synth.phi_min_deg, c.synth.phi_max_deg}},
      {"radius", {c.synth.radius_min, c.synth.radius_max}},
      {"center_jitter", c.synth.center_jitter},
      {"psi", {c.synth.psi_min, c.synth.psi_max}},
      {"seed", c.synth.seed},
      {"count", c.synth.count},
      {"mean_radius_labels", c.synth.mean_radius_labels},
      {"reallike_fraction", c.synth.reallike_fraction},
      {"augment",
       {{"blur", c.synth.augment.blur_prob},
        {"rescale", c.synth.augment.rescale_prob},
        {"brightness", c.synth.augment.brightness_prob},
        {"contrast", c.synth.augment.contrast_prob},
        {"occlusion_lines", c.synth.augment.occlusion_lines_prob}}},
      {"degrade",
       {{"gaze_sigma", c.synth.degrade.gaze_sigma},
        {"occlusion", c.synth.degrade.occlusion_prob},
        {"blur", c.synth.degrade.blur_prob}}},
  };
  j["net"] = {
      {"input_h", c.network.input_h},
      {"input_w", c.network.input_w},
      {"stage_channels", c.network.stage_channels},
      {"radius_bias_init", c.network.radius_bias_init},
      {"seed", c.network.seed},
  };
  j["train"] = {
      {"epochs", c.train.epochs},
      {"lr", c.train.learning_rate},
      {"decay_epochs", c.train.decay_epochs},
      {"decay_factor", c.train.decay_factor},
      {"batch_size", c.train.batch_size},
      {"weight_decay", c.train.weight_decay},
      {"adam_beta1", c.train.adam_beta1},
      {"adam_beta2", c.train.adam_beta2},
      {"adam_eps", c.train.adam_eps},
      {"mix_ratio", c.train.mix_ratio},
      {"mode", train::to_string(c.train.mode)},
      {"pretrain_epochs", c.train.pretrain_epochs},
      {"seed", c.train.seed},
      {"val_fraction", c.train.val_fraction},
      {"checkpoint_every", c.train.checkpoint_every},
      {"hist_eq", c.train.hist_eq},
      {"sigma_hm", c.train.sigma_hm},
  };
  j["loss"] = {
      {"beta1", c.weights.beta1},
      {"beta2", c.weights.beta2},
      {"beta3", c.weights.beta3},
  };
  return j;
}

std::string canonical_echo(const FullConfig& config) { return to_json(config).dump(); }

}  // namespace hgn::cfg
