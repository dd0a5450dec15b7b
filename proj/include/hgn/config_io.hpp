#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "hgn/losses.hpp"
#include "hgn/network.hpp"
#include "hgn/synthgen.hpp"
#include "hgn/trainer.hpp"

namespace hgn::cfg {

struct FullConfig {
  synth::SynthConfig synth;
  net::NetworkConfig network;
  train::TrainConfig train;
  loss::LossWeights weights;
};

// Missing keys keep their defaults; present keys are type-checked.
FullConfig parse_config(const nlohmann::json& j);
FullConfig load_config_file(const std::filesystem::path& path);

nlohmann::json to_json(const FullConfig& config);

// Key-sorted single-line JSON; the string stored in dataset and checkpoint
// headers.
std::string canonical_echo(const FullConfig& config);

}  // namespace hgn::cfg
