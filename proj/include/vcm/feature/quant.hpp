#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vcm/core/types.hpp"

namespace vcm {

struct NormalizedFeatures {
  FeatureTensor z;
  QuantParams params;
};

struct NormalizedLevels {
  std::vector<FeatureTensor> z;
  QuantParams params;
};

/// Per-channel standardization z = (x - mean) / stddev with population
/// statistics pooled over every given tensor (one tensor, or the levels of a
/// feature pyramid sharing a channel count). Zero-variance channels map to
/// z = 0. The global z range is recorded for 8-bit quantization.
inline NormalizedLevels normalize_levels(std::span<const FeatureTensor> levels, float z_th = 1.5f, int bit_depth = 8) {
  if (levels.empty()) fail(ErrorCode::InvariantViolation, "nothing to normalize");
  const std::uint32_t channels = levels.front().dims().channels;
  for (const auto& t : levels)
    if (t.dims().channels != channels) fail(ErrorCode::DimMismatch, "levels disagree on channel count");
  QuantParams params;
  params.mean.resize(channels);
  params.stddev.resize(channels);
  params.z_th = z_th;
  params.bit_depth = bit_depth;

  for (std::size_t c = 0; c < channels; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& t : levels) {
      for (float v : t.channel(c)) sum += v;
      n += t.dims().plane();
    }
    const auto mean = static_cast<float>(sum / static_cast<double>(n));
    double ss = 0.0;
    for (const auto& t : levels)
      for (float v : t.channel(c)) ss += (static_cast<double>(v) - mean) * (static_cast<double>(v) - mean);
    params.mean[c] = mean;
    params.stddev[c] = static_cast<float>(std::sqrt(ss / static_cast<double>(n)));
  }

  NormalizedLevels out;
  float lo = INFINITY, hi = -INFINITY;
  for (const auto& t : levels) {
    const std::size_t plane = t.dims().plane();
    std::vector<float> z(t.values().size());
    for (std::size_t c = 0; c < channels; ++c) {
      const auto ch = t.channel(c);
      const float mean = params.mean[c], stddev = params.stddev[c];
      for (std::size_t i = 0; i < plane; ++i)
        z[c * plane + i] =
            stddev > 0.0f ? static_cast<float>((static_cast<double>(ch[i]) - mean) / static_cast<double>(stddev)) : 0.0f;
    }
    const auto [mn, mx] = std::minmax_element(z.begin(), z.end());
    lo = std::min(lo, *mn);
    hi = std::max(hi, *mx);
    out.z.emplace_back(t.dims(), std::move(z));
  }
  params.z_min = lo;
  params.z_max = hi;
  validate(params);
  out.params = std::move(params);
  return out;
}

inline NormalizedFeatures normalize(const FeatureTensor& t, float z_th = 1.5f, int bit_depth = 8) {
  auto n = normalize_levels(std::span<const FeatureTensor>(&t, 1), z_th, bit_depth);
  return {std::move(n.z.front()), std::move(n.params)};
}

inline FeatureTensor denormalize(const FeatureTensor& z, const QuantParams& params) {
  validate(params);
  const auto& dims = z.dims();
  if (params.mean.size() != dims.channels)
    fail(ErrorCode::BadParams, "params cover " + std::to_string(params.mean.size()) + " channels, tensor has " +
                                   std::to_string(dims.channels));
  std::vector<float> x(z.values().size());
  const std::size_t plane = dims.plane();
  for (std::size_t c = 0; c < dims.channels; ++c) {
    const double mean = params.mean[c];
    const double stddev = params.stddev[c];
    const auto ch = z.channel(c);
    for (std::size_t i = 0; i < plane; ++i) x[c * plane + i] = static_cast<float>(ch[i] * stddev + mean);
  }
  return FeatureTensor(dims, std::move(x));
}

// Scalar forms. Rounding is half away from zero; output clamps to [0, 255].
inline std::uint8_t quantize_8bit_value(double z, double z_min, double z_max) noexcept {
  const double q = std::round(255.0 * (z - z_min) / (z_max - z_min));
  return static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
}

inline double dequantize_8bit_value(std::uint8_t q, double z_min, double z_max) noexcept {
  return z_min + static_cast<double>(q) * (z_max - z_min) / 255.0;
}

// 0: z < -th, 1: -th <= z < 0, 2: 0 <= z < th, 3: z >= th
inline std::uint8_t quantize_2bit_value(double z, double z_th) noexcept {
  if (z < -z_th) return 0;
  if (z < 0.0) return 1;
  if (z < z_th) return 2;
  return 3;
}

// Level centers of a uniform step of z_th: -3th/2, -th/2, th/2, 3th/2.
inline double dequantize_2bit_value(std::uint8_t q, double z_th) noexcept {
  return (static_cast<double>(q) - 1.5) * z_th;
}

inline SampleVolume quantize_8bit(const FeatureTensor& z, const QuantParams& params) {
  if (!(params.z_max > params.z_min))
    fail(ErrorCode::DegenerateRange, "z_max must exceed z_min for 8-bit quantization");
  SampleVolume out{z.dims(), std::vector<std::uint8_t>(z.values().size())};
  const auto vals = z.values();
  for (std::size_t i = 0; i < vals.size(); ++i) out.samples[i] = quantize_8bit_value(vals[i], params.z_min, params.z_max);
  return out;
}

inline SampleVolume quantize_2bit(const FeatureTensor& z, double z_th) {
  if (!(z_th > 0.0)) fail(ErrorCode::BadParams, "z_th must be > 0");
  SampleVolume out{z.dims(), std::vector<std::uint8_t>(z.values().size())};
  const auto vals = z.values();
  for (std::size_t i = 0; i < vals.size(); ++i) out.samples[i] = quantize_2bit_value(vals[i], z_th);
  return out;
}

/// Quantizes with the mode named by params.bit_depth.
inline SampleVolume quantize(const FeatureTensor& z, const QuantParams& params) {
  validate(params);
  return params.bit_depth == 8 ? quantize_8bit(z, params) : quantize_2bit(z, params.z_th);
}

inline FeatureTensor dequantize_8bit(const SampleVolume& s, const QuantParams& params) {
  validate(params);
  if (s.samples.size() != s.dims.count()) fail(ErrorCode::BadParams, "sample count does not match dims");
  std::vector<float> z(s.samples.size());
  for (std::size_t i = 0; i < z.size(); ++i)
    z[i] = static_cast<float>(dequantize_8bit_value(s.samples[i], params.z_min, params.z_max));
  return FeatureTensor(s.dims, std::move(z));
}

inline FeatureTensor dequantize_2bit(const SampleVolume& s, const QuantParams& params) {
  validate(params);
  if (s.samples.size() != s.dims.count()) fail(ErrorCode::BadParams, "sample count does not match dims");
  std::vector<float> z(s.samples.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (s.samples[i] > 3) fail(ErrorCode::BadParams, "2-bit sample out of range at index " + std::to_string(i));
    z[i] = static_cast<float>(dequantize_2bit_value(s.samples[i], params.z_th));
  }
  return FeatureTensor(s.dims, std::move(z));
}

inline FeatureTensor dequantize(const SampleVolume& s, const QuantParams& params) {
  validate(params);
  return params.bit_depth == 8 ? dequantize_8bit(s, params) : dequantize_2bit(s, params);
}

/// Uncompressed payload size of a C x h x w volume at the given sample depth.
inline std::uint64_t raw_size_bits(const TensorDims& dims, int bit_depth) {
  if (bit_depth != 2 && bit_depth != 8 && bit_depth != 32)
    fail(ErrorCode::InvariantViolation, "bit depth must be 2, 8 or 32");
  return std::uint64_t{dims.channels} * dims.height * dims.width * static_cast<std::uint64_t>(bit_depth);
}

}  // namespace vcm
