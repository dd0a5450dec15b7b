#include "hgn/checkpoint.hpp"

#include <fstream>

#include "hgn/serialize.hpp"

namespace hgn::net {
namespace {

constexpr char kMagic[5] = {'H', 'G', 'N', 'C', 'K'};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const std::string& config_echo,
                     const ParamSet& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCategory::io, "cannot open " + path.string() + " for writing");
  io::write_bytes(out, kMagic, sizeof(kMagic));
  io::write_u32(out, kCheckpointVersion);
  io::write_u32(out, static_cast<std::uint32_t>(config_echo.size()));
  io::write_bytes(out, config_echo.data(), config_echo.size());
  io::write_u32(out, static_cast<std::uint32_t>(params.entries.size()));
  for (const auto& e : params.entries) {
    io::write_u16(out, static_cast<std::uint16_t>(e.name.size()));
    io::write_bytes(out, e.name.data(), e.name.size());
    io::write_u64(out, e.tensor.numel());
    // Shape is stored so arbitrary layer geometry round-trips.
    io::write_u16(out, static_cast<std::uint16_t>(e.tensor.shape.size()));
    for (std::size_t d : e.tensor.shape) io::write_u64(out, d);
    for (double v : e.tensor.values) io::write_f64(out, v);
  }
  out.flush();
  if (!out) raise(ErrorCategory::io, "short write to " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCategory::io, "cannot open " + path.string());
  char magic[5];
  io::read_bytes(in, magic, sizeof(magic));
  for (int i = 0; i < 5; ++i) {
    if (magic[i] != kMagic[i]) raise(ErrorCategory::corrupt, "not a checkpoint file");
  }
  std::uint32_t version = io::read_u32(in);
  if (version != kCheckpointVersion) {
    raise(ErrorCategory::version,
          "checkpoint version " + std::to_string(version) + " unsupported");
  }
  Checkpoint ck;
  std::uint32_t echo_len = io::read_u32(in);
  ck.config_echo.resize(echo_len);
  io::read_bytes(in, ck.config_echo.data(), echo_len);
  std::uint32_t count = io::read_u32(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    ParamSet::Entry e;
    std::uint16_t name_len = io::read_u16(in);
    e.name.resize(name_len);
    io::read_bytes(in, e.name.data(), name_len);
    std::uint64_t numel = io::read_u64(in);
    std::uint16_t rank = io::read_u16(in);
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(io::read_u64(in));
    if (shape_numel(shape) != numel) {
      raise(ErrorCategory::corrupt, "parameter shape disagrees with element count");
    }
    std::vector<double> values(numel);
    for (auto& v : values) v = io::read_f64(in);
    e.tensor = Tensor::from(std::move(shape), std::move(values));
    ck.params.entries.push_back(std::move(e));
  }
  return ck;
}

}  // namespace hgn::net
