#include <fstream>

#include "hgn/serialize.hpp"
#include "hgn/synthgen.hpp"

// Dataset file layout (little-endian):
//   magic "HGNDS", u32 version, u32 echo length + config echo text,
//   u64 sample count, then per sample:
//     u16 H, u16 W, H*W u8 pixels (row-major),
//     10 x 2 f32 landmarks (x, y), f32 radius, 2 f32 gaze (theta, phi),
//     u8 domain tag, f32 gaze_sigma, f32 noise_theta, f32 noise_phi,
//     u8 occluded, u8 blurred.

namespace hgn::synth {
namespace {

constexpr char kMagic[5] = {'H', 'G', 'N', 'D', 'S'};

}  // namespace

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCategory::io, "cannot open " + path.string() + " for writing");
  io::write_bytes(out, kMagic, sizeof(kMagic));
  io::write_u32(out, dataset.version);
  io::write_u32(out, static_cast<std::uint32_t>(dataset.config_echo.size()));
  io::write_bytes(out, dataset.config_echo.data(), dataset.config_echo.size());
  io::write_u64(out, dataset.samples.size());
  for (const Sample& s : dataset.samples) {
    io::write_u16(out, static_cast<std::uint16_t>(s.image.height));
    io::write_u16(out, static_cast<std::uint16_t>(s.image.width));
    for (double p : s.image.pixels) io::write_u8(out, quantize_u8(p));
    for (const geom::Point& pt : s.landmarks.points) {
      io::write_f32(out, static_cast<float>(pt.x));
      io::write_f32(out, static_cast<float>(pt.y));
    }
    io::write_f32(out, static_cast<float>(s.radius));
    io::write_f32(out, static_cast<float>(s.gaze.theta));
    io::write_f32(out, static_cast<float>(s.gaze.phi));
    io::write_u8(out, static_cast<std::uint8_t>(s.domain));
    io::write_f32(out, s.degradation.gaze_sigma);
    io::write_f32(out, s.degradation.noise_theta);
    io::write_f32(out, s.degradation.noise_phi);
    io::write_u8(out, s.degradation.occluded);
    io::write_u8(out, s.degradation.blurred);
  }
  out.flush();
  if (!out) raise(ErrorCategory::io, "short write to " + path.string());
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCategory::io, "cannot open " + path.string());
  char magic[5];
  io::read_bytes(in, magic, sizeof(magic));
  for (int i = 0; i < 5; ++i) {
    if (magic[i] != kMagic[i]) raise(ErrorCategory::corrupt, "not a dataset file");
  }
  Dataset ds;
  ds.version = io::read_u32(in);
  if (ds.version != kDatasetVersion) {
    raise(ErrorCategory::version, "dataset version " + std::to_string(ds.version) + " unsupported");
  }
  std::uint32_t echo_len = io::read_u32(in);
  ds.config_echo.resize(echo_len);
  io::read_bytes(in, ds.config_echo.data(), echo_len);
  std::uint64_t count = io::read_u64(in);
  ds.samples.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Sample s;
    int h = io::read_u16(in);
    int w = io::read_u16(in);
    if (h == 0 || w == 0) raise(ErrorCategory::corrupt, "zero-sized sample image");
    s.image = Image(h, w);
    for (double& p : s.image.pixels) {
      p = static_cast<double>(io::read_u8(in)) / 255.0;
    }
    for (geom::Point& pt : s.landmarks.points) {
      pt.x = io::read_f32(in);
      pt.y = io::read_f32(in);
    }
    s.radius = io::read_f32(in);
    s.gaze.theta = io::read_f32(in);
    s.gaze.phi = io::read_f32(in);
    std::uint8_t domain = io::read_u8(in);
    if (domain > 1) raise(ErrorCategory::corrupt, "unknown domain tag");
    s.domain = static_cast<Domain>(domain);
    s.degradation.gaze_sigma = io::read_f32(in);
    s.degradation.noise_theta = io::read_f32(in);
    s.degradation.noise_phi = io::read_f32(in);
    s.degradation.occluded = io::read_u8(in);
    s.degradation.blurred = io::read_u8(in);
    ds.samples.push_back(std::move(s));
  }
  // The declared count was honored if we got here; a trailing byte means a
  // corrupt writer rather than truncation.
  char extra;
  if (in.read(&extra, 1); in.gcount() != 0) {
    raise(ErrorCategory::corrupt, "payload longer than the declared sample count");
  }
  return ds;
}

}  // namespace hgn::synth
