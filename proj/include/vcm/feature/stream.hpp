#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vcm/core/types.hpp"
#include "vcm/feature/arith_coder.hpp"
#include "vcm/feature/packing.hpp"
#include "vcm/util/binary_io.hpp"
#include "vcm/util/digest.hpp"

// VCMS container, little-endian:
//   "VCMS" | version u32 | layout u8 | bit_depth u8 | C u32 | h u32 | w u32
//   | float32 x (2C + 3): mean_0, stddev_0, ..., mean_{C-1}, stddev_{C-1}, z_min, z_max, z_th
//   | has_permutation u8 | (u16 x C when present)
//   | payload_bits u64 | crc32 u32 of the decoded samples | payload bytes

namespace vcm {

inline constexpr std::string_view kStreamMagic = "VCMS";
inline constexpr std::uint32_t kStreamVersion = 1;

struct CodedFeatureStream {
  FrameLayout layout = FrameLayout::Temporal;
  TensorDims dims;
  QuantParams params;
  std::optional<std::vector<std::uint16_t>> permutation;
  std::uint64_t payload_bits = 0;
  std::uint32_t crc = 0;
  std::vector<std::uint8_t> payload;
};

inline CodedFeatureStream entropy_encode(const PackedFrameSet& frames) {
  validate(frames.params);
  if (frames.params.mean.size() != frames.dims.channels)
    fail(ErrorCode::BadParams, "quant params must cover every channel");
  const auto geometry = frame_geometry(frames.layout, frames.dims);
  if (geometry.size() != frames.frames.size()) fail(ErrorCode::DimMismatch, "frame count does not match layout");
  for (std::size_t i = 0; i < geometry.size(); ++i) {
    const auto& f = frames.frames[i];
    if (f.width != geometry[i].first || f.height != geometry[i].second || f.samples.size() != std::size_t{f.width} * f.height)
      fail(ErrorCode::DimMismatch, "frame " + std::to_string(i) + " does not match layout geometry");
  }
  if (frames.permutation) validate_permutation(*frames.permutation, frames.dims.channels);

  const auto samples = to_yuv400(frames);
  if (frames.params.bit_depth == 2)
    for (auto s : samples)
      if (s > 3) fail(ErrorCode::BadParams, "2-bit frame set holds a sample above 3");
  auto coded = arith::compress(samples);
  return CodedFeatureStream{frames.layout,       frames.dims, frames.params, frames.permutation, coded.payload_bits,
                            digest::crc32(samples), std::move(coded.payload)};
}

inline PackedFrameSet entropy_decode(const CodedFeatureStream& s) {
  std::size_t count = 0;
  for (auto [w, h] : frame_geometry(s.layout, s.dims)) count += std::size_t{w} * h;
  auto samples = arith::decompress(s.payload, count);
  if (digest::crc32(samples) != s.crc) fail(ErrorCode::CorruptStream, "checksum mismatch after decoding");
  return from_yuv400(samples, s.layout, s.dims, s.permutation, s.params);
}

inline std::vector<std::uint8_t> serialize(const CodedFeatureStream& s) {
  io::Writer w;
  w.tag(kStreamMagic);
  w.u32(kStreamVersion);
  w.u8(static_cast<std::uint8_t>(s.layout));
  w.u8(static_cast<std::uint8_t>(s.params.bit_depth));
  w.u32(s.dims.channels);
  w.u32(s.dims.height);
  w.u32(s.dims.width);
  for (std::size_t c = 0; c < s.dims.channels; ++c) {
    w.f32(s.params.mean.at(c));
    w.f32(s.params.stddev.at(c));
  }
  w.f32(s.params.z_min);
  w.f32(s.params.z_max);
  w.f32(s.params.z_th);
  w.u8(s.permutation ? 1 : 0);
  if (s.permutation)
    for (auto v : *s.permutation) w.u16(v);
  w.u64(s.payload_bits);
  w.u32(s.crc);
  w.bytes(s.payload);
  return std::move(w).take();
}

inline CodedFeatureStream parse_stream(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes);
  if (bytes.size() < kStreamMagic.size() || !r.tag(kStreamMagic)) fail(ErrorCode::BadMagic, "not a VCMS stream");
  const auto version = r.u32();
  if (version != kStreamVersion) fail(ErrorCode::BadVersion, "unsupported VCMS version " + std::to_string(version));
  CodedFeatureStream s;
  const auto layout = r.u8();
  if (layout > 2) fail(ErrorCode::CorruptStream, "unknown layout tag " + std::to_string(layout));
  s.layout = static_cast<FrameLayout>(layout);
  s.params.bit_depth = r.u8();
  s.dims.channels = r.u32();
  s.dims.height = r.u32();
  s.dims.width = r.u32();
  if (s.dims.channels == 0 || s.dims.height == 0 || s.dims.width == 0) fail(ErrorCode::CorruptStream, "zero dimension");
  if (std::uint64_t{s.dims.channels} * 8 > r.remaining()) fail(ErrorCode::TruncatedFile, "stream ends inside params");
  s.params.mean.resize(s.dims.channels);
  s.params.stddev.resize(s.dims.channels);
  for (std::size_t c = 0; c < s.dims.channels; ++c) {
    s.params.mean[c] = r.f32();
    s.params.stddev[c] = r.f32();
  }
  s.params.z_min = r.f32();
  s.params.z_max = r.f32();
  s.params.z_th = r.f32();
  validate(s.params);
  const auto has_perm = r.u8();
  if (has_perm > 1) fail(ErrorCode::CorruptStream, "bad permutation flag");
  if (has_perm) {
    std::vector<std::uint16_t> perm(s.dims.channels);
    for (auto& v : perm) v = r.u16();
    validate_permutation(perm, s.dims.channels);
    s.permutation = std::move(perm);
  }
  s.payload_bits = r.u64();
  s.crc = r.u32();
  const auto payload = r.bytes(r.remaining());
  s.payload.assign(payload.begin(), payload.end());
  if ((s.payload_bits + 7) / 8 != s.payload.size())
    fail(ErrorCode::CorruptStream, "payload length does not match recorded bit count");
  return s;
}

inline void write_stream(const CodedFeatureStream& s, const std::filesystem::path& path) {
  io::write_file(path, serialize(s));
}

inline CodedFeatureStream read_stream(const std::filesystem::path& path) {
  try {
    return parse_stream(io::read_file(path));
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

}  // namespace vcm
