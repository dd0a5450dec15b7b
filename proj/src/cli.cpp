#include "hgn/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hgn/checkpoint.hpp"
#include "hgn/config_io.hpp"
#include "hgn/eval.hpp"
#include "hgn/gradcheck.hpp"
#include "hgn/visualize.hpp"

namespace hgn::cli {
namespace {

using nlohmann::json;

cfg::FullConfig load_or_default(const std::string& config_path) {
  if (config_path.empty()) return {};
  return cfg::load_config_file(config_path);
}

cfg::FullConfig config_from_echo(const std::string& echo) {
  try {
    return cfg::parse_config(json::parse(echo));
  } catch (const json::exception& e) {
    raise(ErrorCategory::corrupt, "config echo is not valid json: " + std::string(e.what()));
  }
}

void check_dataset_matches_net(const synth::Dataset& ds, const net::NetworkConfig& net_cfg) {
  if (ds.samples.empty()) return;
  const Image& img = ds.samples.front().image;
  if (img.height != net_cfg.input_h || img.width != net_cfg.input_w) {
    raise(ErrorCategory::config,
          "dataset image size " + std::to_string(img.height) + "x" + std::to_string(img.width) +
              " does not match network input " + std::to_string(net_cfg.input_h) + "x" +
              std::to_string(net_cfg.input_w));
  }
}

std::vector<double> parse_quantiles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    try {
      out.push_back(std::stod(token));
    } catch (const std::exception&) {
      raise(ErrorCategory::usage, "bad quantile '" + token + "'");
    }
  }
  if (out.empty()) raise(ErrorCategory::usage, "no quantiles given");
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) raise(ErrorCategory::io, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) raise(ErrorCategory::io, "short write to " + path.string());
}

std::string report_text(const eval::EvalReport& report, const std::string& dataset_id,
                        bool per_sample) {
  std::ostringstream out;
  out << "mode=" << report.mode << "\n";
  out << "dataset=" << dataset_id << "\n";
  out << "count=" << report.count << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", report.mean_deg);
  out << "mean_deg=" << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%.6f", report.median_deg);
  out << "median_deg=" << buf << "\n";
  if (per_sample) {
    out << "per_sample=index,error_deg\n";
    for (std::size_t i = 0; i < report.per_sample_deg.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%zu,%.6f", i, report.per_sample_deg[i]);
      out << buf << "\n";
    }
  }
  return out.str();
}

int cmd_generate(const std::string& config_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed, std::optional<std::uint64_t> count) {
  cfg::FullConfig config = load_or_default(config_path);
  if (seed) config.synth.seed = *seed;
  if (count) config.synth.count = *count;
  synth::Dataset ds = synth::generate_dataset(config.synth, cfg::canonical_echo(config));
  synth::write_dataset(ds, out_path);
  std::size_t reallike = 0;
  for (const auto& s : ds.samples) {
    if (s.domain == synth::Domain::real_like) ++reallike;
  }
  std::cout << "wrote " << ds.samples.size() << " samples (" << reallike << " real-like) to "
            << out_path << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& dataset_path,
              const std::string& real_dataset_path, const std::string& out_path,
              const std::string& metrics_path, std::optional<std::uint64_t> seed) {
  cfg::FullConfig config = load_or_default(config_path);
  if (seed) {
    config.train.seed = *seed;
    config.network.seed = *seed;
  }
  synth::Dataset synthetic = synth::read_dataset(dataset_path);
  check_dataset_matches_net(synthetic, config.network);
  synth::Dataset reallike;
  train::TrainInputs inputs;
  inputs.synthetic = &synthetic;
  if (!real_dataset_path.empty()) {
    reallike = synth::read_dataset(real_dataset_path);
    check_dataset_matches_net(reallike, config.network);
    inputs.reallike = &reallike;
  }

  std::string echo = cfg::canonical_echo(config);
  train::CheckpointHook hook;
  if (config.train.checkpoint_every > 0) {
    hook = [&](int epoch, const net::ParamSet& params) {
      net::save_checkpoint(out_path + ".epoch" + std::to_string(epoch), echo, params);
    };
  }
  train::TrainResult result =
      train::train(config.network, config.train, config.weights, inputs, hook);
  net::save_checkpoint(out_path, echo, result.params);
  if (!metrics_path.empty()) train::append_metrics(metrics_path, result.log);
  if (!result.log.empty()) {
    std::cout << "final val_angular_deg=" << result.log.back().val_angular_deg << "\n";
  }
  std::cout << "wrote checkpoint to " << out_path << "\n";
  return 0;
}

struct LoadedCheckpoint {
  cfg::FullConfig config;
  net::ParamSet params;
};

LoadedCheckpoint load_for_inference(const std::string& checkpoint_path) {
  net::Checkpoint ck = net::load_checkpoint(checkpoint_path);
  LoadedCheckpoint out;
  out.config = config_from_echo(ck.config_echo);
  out.params = std::move(ck.params);
  return out;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& dataset_path,
             const std::string& out_path, const std::string& mode_override, bool per_sample) {
  LoadedCheckpoint ck = load_for_inference(checkpoint_path);
  train::Mode mode = ck.config.train.mode;
  if (!mode_override.empty() && train::parse_mode(mode_override) != mode) {
    raise(ErrorCategory::config, "requested mode " + mode_override +
                                     " does not match checkpoint mode " + train::to_string(mode));
  }
  synth::Dataset ds = synth::read_dataset(dataset_path);
  if (ds.samples.empty()) raise(ErrorCategory::config, "dataset has no samples");
  check_dataset_matches_net(ds, ck.config.network);
  eval::EvalReport report =
      eval::evaluate(ck.config.network, ck.params, ds, mode, ck.config.train.hist_eq);
  report.dataset_id = dataset_path;
  std::string text = report_text(report, dataset_path, per_sample);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    write_text(out_path, text);
  }
  return 0;
}

int cmd_quality(const std::string& checkpoint_path, const std::string& dataset_path,
                const std::string& out_dir, const std::string& quantiles_csv) {
  LoadedCheckpoint ck = load_for_inference(checkpoint_path);
  if (!train::mode_uses_uncertainty(ck.config.train.mode)) {
    raise(ErrorCategory::config,
          "checkpoint was not trained with the uncertainty module (mode " +
              train::to_string(ck.config.train.mode) + ")");
  }
  synth::Dataset ds = synth::read_dataset(dataset_path);
  if (ds.samples.empty()) raise(ErrorCategory::config, "dataset has no samples");
  check_dataset_matches_net(ds, ck.config.network);
  std::vector<double> quantiles = parse_quantiles(quantiles_csv);

  std::filesystem::create_directories(out_dir);
  eval::QualityReport report = eval::quality_report(ck.config.network, ck.params, ds, quantiles,
                                                    ck.config.train.hist_eq);

  std::ostringstream hist;
  hist << "# quality histogram: bin_lo bin_hi count\n";
  double span = report.bin_hi - report.bin_lo;
  std::size_t bins = report.bin_counts.size();
  for (std::size_t b = 0; b < bins; ++b) {
    double lo = report.bin_lo + span * static_cast<double>(b) / static_cast<double>(bins);
    double hi = report.bin_lo + span * static_cast<double>(b + 1) / static_cast<double>(bins);
    hist << lo << " " << hi << " " << report.bin_counts[b] << "\n";
  }
  hist << "# synthetic mean=" << report.synthetic.mean << " std=" << report.synthetic.stddev
       << " count=" << report.synthetic.count << "\n";
  hist << "# reallike mean=" << report.reallike.mean << " std=" << report.reallike.stddev
       << " count=" << report.reallike.count << "\n";
  write_text(std::filesystem::path(out_dir) / "histogram.txt", hist.str());

  json manifest;
  manifest["dataset"] = dataset_path;
  manifest["count"] = ds.samples.size();
  json gallery = json::array();
  for (const auto& [q, index] : report.quantile_indices) {
    char name[64];
    std::snprintf(name, sizeof(name), "q%.3f_sample%zu.ppm", q, index);
    write_ppm(to_rgb(ds.samples[index].image, 4), std::filesystem::path(out_dir) / name);
    gallery.push_back({{"quantile", q},
                       {"sample_index", index},
                       {"quality", report.quality[index]},
                       {"image", name}});
  }
  manifest["gallery"] = gallery;
  write_text(std::filesystem::path(out_dir) / "manifest.json", manifest.dump(2) + "\n");
  std::cout << "wrote quality report to " << out_dir << "\n";
  return 0;
}

int cmd_viz(const std::string& checkpoint_path, const std::string& dataset_path,
            std::size_t index, const std::string& out_path) {
  LoadedCheckpoint ck = load_for_inference(checkpoint_path);
  synth::Dataset ds = synth::read_dataset(dataset_path);
  if (index >= ds.samples.size()) {
    raise(ErrorCategory::config, "sample index " + std::to_string(index) + " out of range (" +
                                     std::to_string(ds.samples.size()) + " samples)");
  }
  check_dataset_matches_net(ds, ck.config.network);
  eval::Prediction pred = eval::predict(ck.config.network, ck.params, ds.samples[index],
                                        ck.config.train.mode, ck.config.train.hist_eq);
  eval::visualize(ds.samples[index], pred, out_path);
  std::cout << "wrote overlay to " << out_path << "\n";
  return 0;
}

int cmd_gradcheck(const std::string& config_path, double tolerance, std::size_t samples,
                  std::uint64_t seed) {
  cfg::FullConfig config = load_or_default(config_path);
  config.synth.image_h = config.network.input_h;
  config.synth.image_w = config.network.input_w;
  synth::Sample sample = synth::generate_sample(config.synth, 0);

  net::ParamSet params = net::init_params(config.network, seed);
  Image input = sample.image;
  if (config.train.hist_eq) histogram_equalize(input);
  net::Tensor image = net::image_to_tensor(input);

  double sigma_hm = config.train.sigma_hm;
  loss::LossWeights weights = config.weights;
  net::LossBuilder builder = [&sample, sigma_hm, weights](
                                 net::Graph& g, const net::NetworkConfig& ncfg,
                                 const net::ParamSet& p, const net::Tensor& img) {
    train::SampleTermVars terms = train::build_sample_terms(
        g, ncfg, p, img, sample, train::Mode::hgn_um, sigma_hm, {true, true, true});
    return g.weighted_sum({{terms.heatmap, weights.beta1},
                           {terms.radius, weights.beta2},
                           {terms.gaze, weights.beta3}});
  };
  net::GradCheckOptions options;
  options.tolerance = tolerance;
  options.max_sampled = samples;
  Rng rng(seed);
  net::GradCheckReport report =
      net::grad_check(config.network, params, image, builder, options, rng);
  std::printf("checked %zu sampled parameters, max deviation %.3e (tolerance %.1e)\n",
              report.checked, report.max_deviation, report.tolerance);
  for (const auto& e : report.worst) {
    std::printf("  %-12s [%6zu] analytic % .6e numeric % .6e deviation %.3e\n",
                e.param.c_str(), e.index, e.analytic, e.numeric, e.deviation);
  }
  std::printf("%s\n", report.passed() ? "PASS" : "FAIL");
  return report.passed() ? 0 : 1;
}

int cmd_ablate(const std::string& config_path, const std::string& dataset_path,
               const std::string& real_dataset_path, const std::string& modes_csv,
               int seeds, const std::string& out_path) {
  if (seeds < 1) raise(ErrorCategory::usage, "--seeds must be >= 1");
  cfg::FullConfig config = load_or_default(config_path);
  synth::Dataset synthetic = synth::read_dataset(dataset_path);
  check_dataset_matches_net(synthetic, config.network);
  synth::Dataset reallike;
  train::TrainInputs inputs;
  inputs.synthetic = &synthetic;
  if (!real_dataset_path.empty()) {
    reallike = synth::read_dataset(real_dataset_path);
    check_dataset_matches_net(reallike, config.network);
    inputs.reallike = &reallike;
  }

  std::vector<train::Mode> modes;
  {
    std::stringstream ss(modes_csv);
    std::string token;
    while (std::getline(ss, token, ',')) {
      if (!token.empty()) modes.push_back(train::parse_mode(token));
    }
  }
  if (modes.empty()) raise(ErrorCategory::usage, "no modes requested");

  std::ostringstream table;
  table << "# mode seeds mean_deg std_deg per_seed\n";
  for (train::Mode mode : modes) {
    std::vector<double> errors;
    for (int s = 0; s < seeds; ++s) {
      cfg::FullConfig run = config;
      run.train.mode = mode;
      run.train.seed = config.train.seed + static_cast<std::uint64_t>(s);
      run.network.seed = config.network.seed + static_cast<std::uint64_t>(s);
      train::TrainResult result =
          train::train(run.network, run.train, run.weights, inputs, nullptr);
      errors.push_back(result.log.empty() ? 0.0 : result.log.back().val_angular_deg);
    }
    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= static_cast<double>(errors.size());
    double var = 0.0;
    for (double e : errors) var += (e - mean) * (e - mean);
    double stddev = std::sqrt(var / static_cast<double>(errors.size()));
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-14s %d %.4f %.4f", train::to_string(mode).c_str(),
                  seeds, mean, stddev);
    table << buf;
    for (double e : errors) {
      std::snprintf(buf, sizeof(buf), " %.4f", e);
      table << buf;
    }
    table << "\n";
  }
  if (out_path.empty()) {
    std::cout << table.str();
  } else {
    write_text(out_path, table.str());
    std::cout << "wrote ablation table to " << out_path << "\n";
  }
  return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"geometry-guided gaze estimation toolkit (HGN_THREADS caps worker threads)"};
  app.require_subcommand(1);

  std::string config_path, dataset_path, real_dataset_path, out_path, metrics_path;
  std::string checkpoint_path, mode_override, quantiles_csv = "0,0.25,0.5,0.75,1";
  std::string modes_csv = "B,B+U,HGN,HGN+UM";
  std::uint64_t seed_value = 0, count_value = 0;
  bool seed_given = false, count_given = false, per_sample = false;
  std::size_t index = 0, gc_samples = 250;
  double tolerance = 1e-3;
  int seeds = 3;

  CLI::App* generate = app.add_subcommand("generate", "render a synthetic eye dataset");
  generate->add_option("--config", config_path, "config file (json)");
  generate->add_option("--out", out_path, "output dataset path")->required();
  generate->add_option("--seed", seed_value, "override synth seed")
      ->each([&](const std::string&) { seed_given = true; });
  generate->add_option("--count", count_value, "override sample count")
      ->each([&](const std::string&) { count_given = true; });

  CLI::App* train_cmd = app.add_subcommand("train", "train a model");
  train_cmd->add_option("--config", config_path, "config file (json)");
  train_cmd->add_option("--dataset", dataset_path, "synthetic dataset")->required();
  train_cmd->add_option("--real-dataset", real_dataset_path, "real-like dataset");
  train_cmd->add_option("--out", out_path, "checkpoint output path")->required();
  train_cmd->add_option("--metrics", metrics_path, "metrics log path (appended)");
  train_cmd->add_option("--seed", seed_value, "override train+net seed")
      ->each([&](const std::string&) { seed_given = true; });

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--checkpoint", checkpoint_path, "checkpoint path")->required();
  eval_cmd->add_option("--dataset", dataset_path, "dataset path")->required();
  eval_cmd->add_option("--out", out_path, "report output path (stdout when omitted)");
  eval_cmd->add_option("--mode", mode_override, "expected mode (must match checkpoint)");
  eval_cmd->add_flag("--per-sample", per_sample, "append per-sample errors");

  CLI::App* quality = app.add_subcommand("quality", "quality histogram + quantile gallery");
  quality->add_option("--checkpoint", checkpoint_path, "checkpoint path")->required();
  quality->add_option("--dataset", dataset_path, "dataset path")->required();
  quality->add_option("--out", out_path, "output directory")->required();
  quality->add_option("--quantiles", quantiles_csv, "comma-separated quantiles in [0,1]");

  CLI::App* viz = app.add_subcommand("viz", "landmark + gaze overlay for one sample");
  viz->add_option("--checkpoint", checkpoint_path, "checkpoint path")->required();
  viz->add_option("--dataset", dataset_path, "dataset path")->required();
  viz->add_option("--index", index, "sample index")->required();
  viz->add_option("--out", out_path, "output image (ppm)")->required();

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference gradient check");
  gradcheck->add_option("--config", config_path, "config file (json)");
  gradcheck->add_option("--tolerance", tolerance, "max allowed relative deviation");
  gradcheck->add_option("--samples", gc_samples, "parameters to sample");
  gradcheck->add_option("--seed", seed_value, "rng seed");

  CLI::App* ablate = app.add_subcommand("ablate", "train the mode matrix and tabulate errors");
  ablate->add_option("--config", config_path, "config file (json)");
  ablate->add_option("--dataset", dataset_path, "synthetic dataset")->required();
  ablate->add_option("--real-dataset", real_dataset_path, "real-like dataset");
  ablate->add_option("--modes", modes_csv, "comma-separated mode list");
  ablate->add_option("--seeds", seeds, "seeds per mode");
  ablate->add_option("--out", out_path, "table output path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(generate)) {
      return cmd_generate(config_path, out_path,
                          seed_given ? std::optional<std::uint64_t>(seed_value) : std::nullopt,
                          count_given ? std::optional<std::uint64_t>(count_value) : std::nullopt);
    }
    if (app.got_subcommand(train_cmd)) {
      return cmd_train(config_path, dataset_path, real_dataset_path, out_path, metrics_path,
                       seed_given ? std::optional<std::uint64_t>(seed_value) : std::nullopt);
    }
    if (app.got_subcommand(eval_cmd)) {
      return cmd_eval(checkpoint_path, dataset_path, out_path, mode_override, per_sample);
    }
    if (app.got_subcommand(quality)) {
      return cmd_quality(checkpoint_path, dataset_path, out_path, quantiles_csv);
    }
    if (app.got_subcommand(viz)) {
      return cmd_viz(checkpoint_path, dataset_path, index, out_path);
    }
    if (app.got_subcommand(gradcheck)) {
      return cmd_gradcheck(config_path, tolerance, gc_samples, seed_value);
    }
    if (app.got_subcommand(ablate)) {
      return cmd_ablate(config_path, dataset_path, real_dataset_path, modes_csv, seeds, out_path);
    }
  } catch (const Error& e) {
    std::cerr << "error: category=" << to_string(e.category()) << " " << e.what() << "\n";
    return e.category() == ErrorCategory::usage ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: category=internal " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace hgn::cli
