#pragma once

#include <filesystem>
#include <string>

#include "hgn/network.hpp"

// Checkpoint container: magic "HGNCK", u32 version, length-prefixed config
// echo (canonical JSON text), u32 array count, then per array a
// length-prefixed name, u64 element count and f64 little-endian values.

namespace hgn::net {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::string config_echo;
  ParamSet params;
};

void save_checkpoint(const std::filesystem::path& path, const std::string& config_echo,
                     const ParamSet& params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hgn::net
