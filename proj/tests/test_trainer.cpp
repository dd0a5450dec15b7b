#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hgn/eval.hpp"
#include "hgn/trainer.hpp"

using namespace hgn;
using namespace hgn::train;

namespace {

net::NetworkConfig toy_net() {
  net::NetworkConfig cfg;
  cfg.input_h = 16;
  cfg.input_w = 24;
  cfg.stage_channels = {6, 10};
  cfg.radius_bias_init = 4.0;
  cfg.seed = 5;
  return cfg;
}

synth::SynthConfig toy_synth(std::uint64_t seed, std::uint64_t count) {
  synth::SynthConfig cfg;
  cfg.image_h = 16;
  cfg.image_w = 24;
  cfg.radius_min = 4.0;
  cfg.radius_max = 7.0;
  cfg.center_jitter = 1.5;
  cfg.psi_min = 0.3;
  cfg.psi_max = 0.4;
  cfg.seed = seed;
  cfg.count = count;
  cfg.augment.blur_prob = 0.0;
  cfg.augment.rescale_prob = 0.0;
  cfg.augment.brightness_prob = 0.2;
  cfg.augment.contrast_prob = 0.2;
  cfg.augment.occlusion_lines_prob = 0.0;
  return cfg;
}

TrainConfig toy_train(Mode mode) {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.learning_rate = 1e-3;
  cfg.decay_epochs = {};
  cfg.batch_size = 8;
  cfg.mix_ratio = 1.0;
  cfg.mode = mode;
  cfg.pretrain_epochs = 0;
  cfg.seed = 11;
  cfg.val_fraction = 0.2;
  cfg.sigma_hm = 1.5;
  return cfg;
}

}  // namespace

TEST_CASE("mode strings round trip") {
  for (const char* name :
       {"B", "B+U", "HGN", "HGN+UM", "MTL", "MTL-wo-radius", "MTL-wo-lmks"}) {
    CHECK(to_string(parse_mode(name)) == name);
  }
  CHECK_THROWS_AS(parse_mode("bogus"), Error);
}

TEST_CASE("lr schedule reproduces the published step decays exactly") {
  TrainConfig cfg;  // epochs 100, lr 1e-4, decay {20, 60} by 0.1
  CHECK(lr_at_epoch(cfg, 0) == 1e-4);
  CHECK(lr_at_epoch(cfg, 19) == 1e-4);
  CHECK(lr_at_epoch(cfg, 20) == 1e-5);
  CHECK(lr_at_epoch(cfg, 59) == 1e-5);
  CHECK(lr_at_epoch(cfg, 60) == 1e-6);
  CHECK(lr_at_epoch(cfg, 99) == 1e-6);
  CHECK_THROWS_AS(lr_at_epoch(cfg, -1), Error);
  CHECK_THROWS_AS(lr_at_epoch(cfg, 100), Error);

  TrainConfig odd;
  odd.decay_factor = 0.37;
  odd.decay_epochs = {5};
  odd.epochs = 10;
  CHECK(lr_at_epoch(odd, 7) == doctest::Approx(1e-4 * 0.37).epsilon(1e-15));
}

TEST_CASE("mix_batches composition and determinism") {
  synth::Dataset synth_set = synth::generate_dataset(toy_synth(1, 40), "");
  synth::Dataset real_set = synth::generate_dataset(toy_synth(2, 24), "");
  std::vector<const synth::Sample*> synth_ptr, real_ptr;
  for (const auto& s : synth_set.samples) synth_ptr.push_back(&s);
  for (const auto& s : real_set.samples) real_ptr.push_back(&s);

  Rng rng(3);
  auto batches = mix_batches(synth_ptr, real_ptr, 0.5, 8, rng);
  CHECK(batches.size() == 6);  // limited by the real set: 24 / 4
  for (const auto& batch : batches) {
    REQUIRE(batch.size() == 8);
    int synth_count = 0;
    for (const synth::Sample* s : batch) {
      bool is_synth = false;
      for (const synth::Sample* t : synth_ptr) {
        if (t == s) is_synth = true;
      }
      if (is_synth) ++synth_count;
    }
    CHECK(synth_count == 4);
  }

  Rng pure_rng(4);
  auto pure = mix_batches(synth_ptr, {}, 1.0, 8, pure_rng);
  CHECK(pure.size() == 5);

  Rng r1(9), r2(9);
  auto a = mix_batches(synth_ptr, real_ptr, 0.5, 8, r1);
  auto b = mix_batches(synth_ptr, real_ptr, 0.5, 8, r2);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
  }

  Rng r3(10);
  CHECK_THROWS_AS(mix_batches(synth_ptr, {}, 0.5, 8, r3), Error);
}

TEST_CASE("adam matches a hand-computed trace on a quadratic") {
  // Single parameter x, objective f(x) = (x - 3)^2 / 2, gradient x - 3.
  net::ParamSet params;
  params.entries.push_back({"x", net::Tensor::scalar(0.0)});
  AdamState adam = AdamState::init(params);

  TrainConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.0;
  cfg.adam_beta1 = 0.9;
  cfg.adam_beta2 = 0.999;
  cfg.adam_eps = 1e-8;

  // Hand trace (scalar formulas, independent of the implementation).
  double x = 0.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 3; ++t) {
    double g = x - 3.0;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    double mhat = m / (1.0 - std::pow(0.9, t));
    double vhat = v / (1.0 - std::pow(0.999, t));
    x -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);

    double g_impl = params.entries[0].tensor.values[0] - 3.0;
    adam_update(params, adam, {net::Tensor::scalar(g_impl)}, 0.1, cfg);
    CHECK(std::abs(params.entries[0].tensor.values[0] - x) < 1e-10);
  }
}

TEST_CASE("train_step: zero lr leaves parameters unchanged but reports losses") {
  net::NetworkConfig ncfg = toy_net();
  net::ParamSet params = net::init_params(ncfg, 5);
  net::ParamSet before = params;
  AdamState adam = AdamState::init(params);
  TrainConfig cfg = toy_train(Mode::hgn);
  cfg.weight_decay = 0.0;
  synth::Dataset data = synth::generate_dataset(toy_synth(5, 8), "");
  std::vector<const synth::Sample*> batch;
  for (const auto& s : data.samples) batch.push_back(&s);

  StepResult res = train_step(ncfg, cfg, {}, params, adam, batch, 0.0);
  CHECK(res.breakdown.total > 0.0);
  CHECK(res.breakdown.heatmap_term > 0.0);
  for (std::size_t i = 0; i < params.entries.size(); ++i) {
    CHECK(params.entries[i].tensor.values == before.entries[i].tensor.values);
  }
}

TEST_CASE("train_step masking: real-like batches supervise gaze only") {
  net::NetworkConfig ncfg = toy_net();
  net::ParamSet params = net::init_params(ncfg, 6);
  AdamState adam = AdamState::init(params);
  synth::Dataset data = synth::generate_dataset(toy_synth(6, 8), "");
  std::vector<synth::Sample> reallike;
  Rng rng(7);
  for (const auto& s : data.samples) {
    reallike.push_back(synth::degrade_to_reallike(s, rng, {0.05, 0.0, 0.0}));
  }
  std::vector<const synth::Sample*> batch;
  for (const auto& s : reallike) batch.push_back(&s);

  SUBCASE("HGN: heatmap and radius terms are exactly zero") {
    TrainConfig cfg = toy_train(Mode::hgn);
    StepResult res = train_step(ncfg, cfg, {}, params, adam, batch, 1e-3);
    CHECK(res.breakdown.heatmap_term == 0.0);
    CHECK(res.breakdown.radius_term == 0.0);
    CHECK(res.breakdown.gaze_term > 0.0);
  }

  SUBCASE("MTL: heatmap-head gradients are exactly zero") {
    TrainConfig cfg = toy_train(Mode::mtl);
    net::Tensor image = net::image_to_tensor(reallike[0].image);
    net::Graph g;
    SampleTermVars terms = build_sample_terms(g, ncfg, params, image, reallike[0], Mode::mtl,
                                              cfg.sigma_hm, mask_for(reallike[0].domain));
    CHECK_FALSE(terms.heatmap.valid());
    CHECK_FALSE(terms.radius.valid());
    REQUIRE(terms.gaze.valid());
    g.backward(terms.gaze);
    for (const char* name : {"heat.w", "heat.b", "dec0.w", "dec0.b"}) {
      net::Tensor grad = g.external_grad(params.find(name));
      for (double v : grad.values) CHECK(v == 0.0);
    }
    // The direct gaze path still trains the backbone.
    net::Tensor enc = g.external_grad(params.find("enc0.w"));
    bool any = false;
    for (double v : enc.values) any = any || v != 0.0;
    CHECK(any);
  }

  SUBCASE("HGN: heatmap-head gradients flow only through reconstruction") {
    TrainConfig cfg = toy_train(Mode::hgn);
    net::Tensor image = net::image_to_tensor(reallike[0].image);
    net::Graph g;
    SampleTermVars terms = build_sample_terms(g, ncfg, params, image, reallike[0], Mode::hgn,
                                              cfg.sigma_hm, mask_for(reallike[0].domain));
    CHECK_FALSE(terms.heatmap.valid());
    REQUIRE(terms.gaze.valid());
    g.backward(terms.gaze);
    net::Tensor heat = g.external_grad(params.find("heat.w"));
    bool any = false;
    for (double v : heat.values) any = any || v != 0.0;
    CHECK(any);
  }
}

TEST_CASE("train_step aborts with the offending term on non-finite loss") {
  net::NetworkConfig ncfg = toy_net();
  net::ParamSet params = net::init_params(ncfg, 8);
  // A poisoned radius bias survives the relu path and reaches the losses.
  params.find("radius.b")->values[0] = std::numeric_limits<double>::quiet_NaN();
  AdamState adam = AdamState::init(params);
  synth::Dataset data = synth::generate_dataset(toy_synth(8, 4), "");
  std::vector<const synth::Sample*> batch;
  for (const auto& s : data.samples) batch.push_back(&s);
  TrainConfig cfg = toy_train(Mode::hgn);
  try {
    train_step(ncfg, cfg, {}, params, adam, batch, 1e-3);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::contract);
    CHECK(std::string(e.what()).find("radius") != std::string::npos);
  }
}

TEST_CASE("single-sample overfit drives the HGN loss down") {
  net::NetworkConfig ncfg = toy_net();
  ncfg.stage_channels = {8, 16};
  net::ParamSet params = net::init_params(ncfg, 9);
  AdamState adam = AdamState::init(params);
  TrainConfig cfg = toy_train(Mode::hgn);
  cfg.learning_rate = 1e-2;
  cfg.weight_decay = 0.0;
  cfg.sigma_hm = 2.0;
  synth::SynthConfig scfg = toy_synth(9, 1);
  scfg.augment.brightness_prob = 0.0;
  scfg.augment.contrast_prob = 0.0;
  synth::Dataset data = synth::generate_dataset(scfg, "");
  std::vector<const synth::Sample*> batch{&data.samples[0]};

  double first = 0.0, last = 0.0;
  double radius_term = 0.0, gaze_term = 0.0;
  for (int step = 0; step < 200; ++step) {
    double lr = cfg.learning_rate;
    if (step >= 100) lr *= 0.1;
    if (step >= 160) lr *= 0.1;
    StepResult res = train_step(ncfg, cfg, {}, params, adam, batch, lr);
    if (step == 0) first = res.breakdown.total;
    last = res.breakdown.total;
    radius_term = res.breakdown.radius_term;
    gaze_term = res.breakdown.gaze_term;
  }
  // Thresholds frozen from a pilot of this exact fixture (seed 9): after
  // 200 steps the pilot sits at total 6.94 (first-step 20.4), radius 1e-4,
  // gaze 9.6e-3. The heatmap density term floors near 1.4; the geometric
  // terms overfit to ~zero.
  CHECK(last < 0.45 * first);
  CHECK(last < 7.5);
  CHECK(radius_term < 0.02);
  CHECK(gaze_term < 0.05);
}

TEST_CASE("train handles epochs=0, logs one row per epoch, and validates inputs") {
  net::NetworkConfig ncfg = toy_net();
  synth::Dataset data = synth::generate_dataset(toy_synth(10, 24), "");
  TrainInputs inputs;
  inputs.synthetic = &data;

  TrainConfig zero = toy_train(Mode::hgn);
  zero.epochs = 0;
  TrainResult res0 = hgn::train::train(ncfg, zero, {}, inputs);
  CHECK(res0.log.empty());
  net::ParamSet fresh = net::init_params(ncfg, ncfg.seed);
  CHECK(res0.params.entries[0].tensor.values == fresh.entries[0].tensor.values);

  TrainConfig two = toy_train(Mode::hgn);
  TrainResult res2 = hgn::train::train(ncfg, two, {}, inputs);
  CHECK(res2.log.size() == 2);
  CHECK(res2.log[0].epoch == 0);
  CHECK(res2.log[1].epoch == 1);
  CHECK(res2.log[1].val_angular_deg > 0.0);

  // Reconstruction modes need synthetic supervision.
  synth::Dataset empty;
  TrainInputs bad;
  bad.synthetic = &empty;
  CHECK_THROWS_AS(hgn::train::train(ncfg, two, {}, bad), Error);
}

TEST_CASE("training is reproducible for a fixed seed") {
  net::NetworkConfig ncfg = toy_net();
  synth::Dataset data = synth::generate_dataset(toy_synth(11, 24), "");
  TrainInputs inputs;
  inputs.synthetic = &data;
  TrainConfig cfg = toy_train(Mode::hgn_um);

  TrainResult a = hgn::train::train(ncfg, cfg, {}, inputs);
  TrainResult b = hgn::train::train(ncfg, cfg, {}, inputs);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(format_metrics_line(a.log[i]) == format_metrics_line(b.log[i]));
  }
  for (std::size_t p = 0; p < a.params.entries.size(); ++p) {
    CHECK(a.params.entries[p].tensor.values == b.params.entries[p].tensor.values);
  }
}

TEST_CASE("HGN with uncertainty disabled reproduces the weighted-sum total") {
  net::NetworkConfig ncfg = toy_net();
  net::ParamSet params = net::init_params(ncfg, 12);
  AdamState adam = AdamState::init(params);
  synth::Dataset data = synth::generate_dataset(toy_synth(12, 8), "");
  std::vector<const synth::Sample*> batch;
  for (const auto& s : data.samples) batch.push_back(&s);

  TrainConfig cfg = toy_train(Mode::hgn);
  loss::LossWeights weights;  // (5, 1, 1)
  StepResult res = train_step(ncfg, cfg, weights, params, adam, batch, 0.0);
  double expected = 5.0 * res.breakdown.heatmap_term + res.breakdown.radius_term +
                    res.breakdown.gaze_term;
  CHECK(res.breakdown.total == doctest::Approx(expected).epsilon(1e-12));
  CHECK_FALSE(res.breakdown.um_enabled);
}
