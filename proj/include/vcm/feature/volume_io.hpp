#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "vcm/core/types.hpp"
#include "vcm/util/binary_io.hpp"

// Quantized volume file, little-endian:
//   "VCMQ" | version u32 (=1) | bit_depth u8 | C u32 | h u32 | w u32
//   | float32 x (2C + 3) params as in the VCMS container | C*h*w u8 samples

namespace vcm {

inline constexpr std::string_view kVolumeMagic = "VCMQ";

struct QuantizedVolume {
  SampleVolume samples;
  QuantParams params;
};

inline std::vector<std::uint8_t> encode_volume(const QuantizedVolume& v) {
  validate(v.params);
  if (v.params.mean.size() != v.samples.dims.channels) fail(ErrorCode::BadParams, "params do not cover every channel");
  io::Writer w;
  w.tag(kVolumeMagic);
  w.u32(1);
  w.u8(static_cast<std::uint8_t>(v.params.bit_depth));
  w.u32(v.samples.dims.channels);
  w.u32(v.samples.dims.height);
  w.u32(v.samples.dims.width);
  for (std::size_t c = 0; c < v.samples.dims.channels; ++c) {
    w.f32(v.params.mean[c]);
    w.f32(v.params.stddev[c]);
  }
  w.f32(v.params.z_min);
  w.f32(v.params.z_max);
  w.f32(v.params.z_th);
  w.bytes(v.samples.samples);
  return std::move(w).take();
}

inline QuantizedVolume decode_volume(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes);
  if (bytes.size() < kVolumeMagic.size() || !r.tag(kVolumeMagic)) fail(ErrorCode::BadMagic, "not a VCMQ volume");
  if (r.u32() != 1) fail(ErrorCode::BadVersion, "unsupported VCMQ version");
  QuantizedVolume v;
  v.params.bit_depth = r.u8();
  auto& d = v.samples.dims;
  d.channels = r.u32();
  d.height = r.u32();
  d.width = r.u32();
  if (d.channels == 0 || d.height == 0 || d.width == 0) fail(ErrorCode::InvariantViolation, "zero dimension");
  if (std::uint64_t{d.channels} * 8 > r.remaining()) fail(ErrorCode::TruncatedFile, "volume ends inside params");
  v.params.mean.resize(d.channels);
  v.params.stddev.resize(d.channels);
  for (std::size_t c = 0; c < d.channels; ++c) {
    v.params.mean[c] = r.f32();
    v.params.stddev[c] = r.f32();
  }
  v.params.z_min = r.f32();
  v.params.z_max = r.f32();
  v.params.z_th = r.f32();
  validate(v.params);
  if (r.remaining() != d.count())
    fail(r.remaining() < d.count() ? ErrorCode::TruncatedFile : ErrorCode::SizeMismatch,
         "volume payload has " + std::to_string(r.remaining()) + " bytes, expected " + std::to_string(d.count()));
  auto s = r.bytes(d.count());
  v.samples.samples.assign(s.begin(), s.end());
  return v;
}

inline void write_volume(const QuantizedVolume& v, const std::filesystem::path& path) {
  io::write_file(path, encode_volume(v));
}

inline QuantizedVolume read_volume(const std::filesystem::path& path) {
  try {
    return decode_volume(io::read_file(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

}  // namespace vcm
