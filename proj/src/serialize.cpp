#include "hgn/serialize.hpp"

#include <array>
#include <cstring>

namespace hgn::io {
namespace {

template <typename T, std::size_t N>
void write_le(std::ostream& out, T v) {
  std::array<unsigned char, N> bytes;
  for (std::size_t i = 0; i < N; ++i) {
    bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), N);
  if (!out) raise(ErrorCategory::io, "write failed");
}

template <typename T, std::size_t N>
T read_le(std::istream& in) {
  std::array<unsigned char, N> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), N);
  if (in.gcount() != static_cast<std::streamsize>(N)) {
    raise(ErrorCategory::truncated, "stream ended inside a fixed-width field");
  }
  T v = 0;
  for (std::size_t i = 0; i < N; ++i) {
    v |= static_cast<T>(bytes[i]) << (8 * i);
  }
  return v;
}

}  // namespace

void write_u8(std::ostream& out, std::uint8_t v) { write_le<std::uint8_t, 1>(out, v); }
void write_u16(std::ostream& out, std::uint16_t v) { write_le<std::uint16_t, 2>(out, v); }
void write_u32(std::ostream& out, std::uint32_t v) { write_le<std::uint32_t, 4>(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { write_le<std::uint64_t, 8>(out, v); }

void write_f32(std::ostream& out, float v) {
  write_u32(out, std::bit_cast<std::uint32_t>(v));
}

void write_f64(std::ostream& out, double v) {
  write_u64(out, std::bit_cast<std::uint64_t>(v));
}

void write_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) raise(ErrorCategory::io, "write failed");
}

std::uint8_t read_u8(std::istream& in) { return read_le<std::uint8_t, 1>(in); }
std::uint16_t read_u16(std::istream& in) { return read_le<std::uint16_t, 2>(in); }
std::uint32_t read_u32(std::istream& in) { return read_le<std::uint32_t, 4>(in); }
std::uint64_t read_u64(std::istream& in) { return read_le<std::uint64_t, 8>(in); }

float read_f32(std::istream& in) {
  return std::bit_cast<float>(read_u32(in));
}

double read_f64(std::istream& in) {
  return std::bit_cast<double>(read_u64(in));
}

void read_bytes(std::istream& in, void* data, std::size_t n) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (in.gcount() != static_cast<std::streamsize>(n)) {
    raise(ErrorCategory::truncated, "stream ended inside a payload block");
  }
}

}  // namespace hgn::io
