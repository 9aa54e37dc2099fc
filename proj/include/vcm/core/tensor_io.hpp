#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vcm/core/types.hpp"
#include "vcm/util/binary_io.hpp"

namespace vcm {

// VCMF layout, little-endian:
//   "VCMF" | version u32 (=1) | dtype u32 (0 = float32) | C u32 | h u32 | w u32 | C*h*w float32
inline constexpr std::string_view kTensorMagic = "VCMF";
inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr std::uint32_t kDtypeFloat32 = 0;
inline constexpr std::size_t kTensorHeaderBytes = 24;
inline constexpr std::uint64_t kDefaultElementLimit = std::uint64_t{1} << 31;

inline std::vector<std::uint8_t> encode_feature_tensor(const FeatureTensor& t) {
  io::Writer w;
  w.tag(kTensorMagic);
  w.u32(kTensorVersion);
  w.u32(kDtypeFloat32);
  w.u32(t.dims().channels);
  w.u32(t.dims().height);
  w.u32(t.dims().width);
  for (float v : t.values()) w.f32(v);
  return std::move(w).take();
}

inline FeatureTensor decode_feature_tensor(std::span<const std::uint8_t> bytes,
                                           std::uint64_t element_limit = kDefaultElementLimit) {
  io::Reader r(bytes);
  if (bytes.size() < kTensorMagic.size() || !r.tag(kTensorMagic)) fail(ErrorCode::BadMagic, "not a VCMF tensor file");
  const auto version = r.u32();
  if (version != kTensorVersion) fail(ErrorCode::BadVersion, "unsupported VCMF version " + std::to_string(version));
  const auto dtype = r.u32();
  if (dtype != kDtypeFloat32) fail(ErrorCode::UnsupportedDtype, "dtype code " + std::to_string(dtype));
  TensorDims dims;
  dims.channels = r.u32();
  dims.height = r.u32();
  dims.width = r.u32();
  const std::uint64_t count = std::uint64_t{dims.channels} * dims.height * dims.width;
  if (count > element_limit)
    fail(ErrorCode::DimOverflow, to_string(dims) + " exceeds limit of " + std::to_string(element_limit) + " elements");
  if (r.remaining() < count * 4)
    fail(ErrorCode::TruncatedFile,
         "payload has " + std::to_string(r.remaining()) + " bytes, expected " + std::to_string(count * 4));
  if (r.remaining() > count * 4)
    fail(ErrorCode::SizeMismatch, std::to_string(r.remaining() - count * 4) + " trailing bytes after payload");
  std::vector<float> values(count);
  for (auto& v : values) v = r.f32();
  return FeatureTensor(dims, std::move(values));
}

inline FeatureTensor read_feature_tensor(const std::filesystem::path& path,
                                         std::uint64_t element_limit = kDefaultElementLimit) {
  const auto bytes = io::read_file(path);
  try {
    return decode_feature_tensor(bytes, element_limit);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

inline void write_feature_tensor(const FeatureTensor& t, const std::filesystem::path& path) {
  io::write_file(path, encode_feature_tensor(t));
}

}  // namespace vcm
