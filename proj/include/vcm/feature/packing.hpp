#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vcm/core/types.hpp"

namespace vcm {

/// Channel tile: the C values at one spatial position form a rows x cols tile,
/// channel c at (c / cols, c % cols). cols = ceil(sqrt(C)), so C = 64 gives 8x8.
struct TileShape {
  std::uint32_t rows = 1;
  std::uint32_t cols = 1;

  static TileShape for_channels(std::uint32_t channels) {
    auto cols = static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(channels))));
    while (std::uint64_t{cols} * cols < channels) ++cols;
    while (cols > 1 && std::uint64_t{cols - 1} * (cols - 1) >= channels) --cols;
    return {(channels + cols - 1) / cols, cols};
  }
};

namespace detail {

inline void check_volume(const SampleVolume& s) {
  if (s.dims.channels == 0 || s.dims.height == 0 || s.dims.width == 0 || s.samples.size() != s.dims.count())
    fail(ErrorCode::DimMismatch, "sample volume " + to_string(s.dims) + " holds " + std::to_string(s.samples.size()) +
                                     " samples");
}

// Writes `s` tiled into `frame` with its top-left corner at (x0, y0).
inline void tile_into(const SampleVolume& s, TileShape tile, Frame& frame, std::uint32_t x0, std::uint32_t y0) {
  const auto& d = s.dims;
  for (std::uint32_t c = 0; c < d.channels; ++c) {
    const std::uint32_t dr = c / tile.cols;
    const std::uint32_t dc = c % tile.cols;
    for (std::uint32_t y = 0; y < d.height; ++y)
      for (std::uint32_t x = 0; x < d.width; ++x)
        frame.samples[std::size_t{y0 + tile.rows * y + dr} * frame.width + x0 + tile.cols * x + dc] =
            s.samples[c * d.plane() + std::size_t{y} * d.width + x];
  }
}

inline SampleVolume untile_from(const Frame& frame, TensorDims d, TileShape tile, std::uint32_t x0, std::uint32_t y0) {
  SampleVolume s{d, std::vector<std::uint8_t>(d.count())};
  for (std::uint32_t c = 0; c < d.channels; ++c) {
    const std::uint32_t dr = c / tile.cols;
    const std::uint32_t dc = c % tile.cols;
    for (std::uint32_t y = 0; y < d.height; ++y)
      for (std::uint32_t x = 0; x < d.width; ++x)
        s.samples[c * d.plane() + std::size_t{y} * d.width + x] =
            frame.samples[std::size_t{y0 + tile.rows * y + dr} * frame.width + x0 + tile.cols * x + dc];
  }
  return s;
}

inline void check_frames(const PackedFrameSet& p, FrameLayout expected, std::size_t count) {
  if (p.layout != expected)
    fail(ErrorCode::DimMismatch, "frame set layout is " + to_string(p.layout) + ", expected " + to_string(expected));
  if (p.frames.size() != count)
    fail(ErrorCode::DimMismatch, "expected " + std::to_string(count) + " frames, got " + std::to_string(p.frames.size()));
}

}  // namespace detail

// ---- spatial tiling of 64-channel maps into one 8h x 8w frame ------------

inline PackedFrameSet pack_spatial_tiled(const SampleVolume& s, QuantParams params) {
  detail::check_volume(s);
  if (s.dims.channels != 64)
    fail(ErrorCode::WrongChannelCount, "spatial tiling needs 64 channels, got " + std::to_string(s.dims.channels));
  Frame f{8 * s.dims.width, 8 * s.dims.height, std::vector<std::uint8_t>(s.dims.count())};
  detail::tile_into(s, {8, 8}, f, 0, 0);
  return PackedFrameSet{{std::move(f)}, FrameLayout::SpatialTiled, s.dims, std::nullopt, std::move(params)};
}

inline SampleVolume unpack_spatial_tiled(const PackedFrameSet& p) {
  detail::check_frames(p, FrameLayout::SpatialTiled, 1);
  if (p.dims.channels != 64) fail(ErrorCode::WrongChannelCount, "spatial tiling needs 64 channels");
  const auto& f = p.frames[0];
  if (f.width != 8 * p.dims.width || f.height != 8 * p.dims.height || f.samples.size() != p.dims.count())
    fail(ErrorCode::DimMismatch, "tiled frame size does not match dims " + to_string(p.dims));
  return detail::untile_from(f, p.dims, {8, 8}, 0, 0);
}

// ---- multi-scale: P2..P6 into one frame -----------------------------------

inline constexpr std::size_t kPyramidLevels = 5;  // P2, P3, P4, P5, P6

struct MultiscaleSamples {
  std::array<SampleVolume, kPyramidLevels> levels;
};

/// Dims of P2..P6 given P2: each level halves the previous (integer division, min 1).
inline std::array<TensorDims, kPyramidLevels> pyramid_dims(TensorDims p2) {
  std::array<TensorDims, kPyramidLevels> out{};
  out[0] = p2;
  for (std::size_t k = 1; k < kPyramidLevels; ++k)
    out[k] = {p2.channels, std::max<std::uint32_t>(1, out[k - 1].height / 2),
              std::max<std::uint32_t>(1, out[k - 1].width / 2)};
  return out;
}

struct MultiscaleLayout {
  std::uint32_t frame_width = 0;
  std::uint32_t frame_height = 0;
  TileShape tile;
  std::array<std::pair<std::uint32_t, std::uint32_t>, kPyramidLevels> origin{};  // (x, y) of each block
};

/// P2's tiled block sits at the left; a right column, as wide as P3's block,
/// stacks P3, P4, P5, P6 top to bottom. Unused area is zero.
inline MultiscaleLayout multiscale_layout(TensorDims p2) {
  const auto dims = pyramid_dims(p2);
  MultiscaleLayout l;
  l.tile = TileShape::for_channels(p2.channels);
  const std::uint32_t w2 = l.tile.cols * p2.width;
  const std::uint32_t h2 = l.tile.rows * p2.height;
  l.origin[0] = {0, 0};
  std::uint32_t y = 0;
  for (std::size_t k = 1; k < kPyramidLevels; ++k) {
    l.origin[k] = {w2, y};
    y += l.tile.rows * dims[k].height;
  }
  l.frame_width = w2 + l.tile.cols * dims[1].width;
  l.frame_height = std::max(h2, y);
  return l;
}

inline PackedFrameSet pack_multiscale(const MultiscaleSamples& ms, QuantParams params) {
  for (const auto& lvl : ms.levels) detail::check_volume(lvl);
  const auto expected = pyramid_dims(ms.levels[0].dims);
  for (std::size_t k = 0; k < kPyramidLevels; ++k)
    if (!(ms.levels[k].dims == expected[k]))
      fail(ErrorCode::DimMismatch, "P" + std::to_string(k + 2) + " is " + to_string(ms.levels[k].dims) + ", expected " +
                                       to_string(expected[k]));
  const auto layout = multiscale_layout(ms.levels[0].dims);
  Frame f{layout.frame_width, layout.frame_height,
          std::vector<std::uint8_t>(std::size_t{layout.frame_width} * layout.frame_height, 0)};
  for (std::size_t k = 0; k < kPyramidLevels; ++k)
    detail::tile_into(ms.levels[k], layout.tile, f, layout.origin[k].first, layout.origin[k].second);
  return PackedFrameSet{{std::move(f)}, FrameLayout::Multiscale, ms.levels[0].dims, std::nullopt, std::move(params)};
}

inline MultiscaleSamples unpack_multiscale(const PackedFrameSet& p) {
  detail::check_frames(p, FrameLayout::Multiscale, 1);
  const auto layout = multiscale_layout(p.dims);
  const auto& f = p.frames[0];
  if (f.width != layout.frame_width || f.height != layout.frame_height ||
      f.samples.size() != std::size_t{f.width} * f.height)
    fail(ErrorCode::DimMismatch, "multiscale frame size does not match P2 dims " + to_string(p.dims));
  const auto dims = pyramid_dims(p.dims);
  MultiscaleSamples ms;
  for (std::size_t k = 0; k < kPyramidLevels; ++k)
    ms.levels[k] = detail::untile_from(f, dims[k], layout.tile, layout.origin[k].first, layout.origin[k].second);
  return ms;
}

// ---- temporal: one frame per channel --------------------------------------

inline void validate_permutation(const std::vector<std::uint16_t>& perm, std::size_t channels) {
  if (perm.size() != channels)
    fail(ErrorCode::BadParams, "permutation has " + std::to_string(perm.size()) + " entries for " +
                                   std::to_string(channels) + " channels");
  std::vector<bool> seen(channels, false);
  for (auto v : perm) {
    if (v >= channels || seen[v]) fail(ErrorCode::BadParams, "permutation is not a bijection");
    seen[v] = true;
  }
}

/// Frame k holds channel perm[k] (channel k when no permutation is given).
inline PackedFrameSet pack_temporal(const SampleVolume& s, QuantParams params,
                                    std::optional<std::vector<std::uint16_t>> permutation = std::nullopt) {
  detail::check_volume(s);
  if (permutation) validate_permutation(*permutation, s.dims.channels);
  PackedFrameSet p{{}, FrameLayout::Temporal, s.dims, std::move(permutation), std::move(params)};
  p.frames.reserve(s.dims.channels);
  for (std::uint32_t k = 0; k < s.dims.channels; ++k) {
    const auto ch = s.channel(p.permutation ? (*p.permutation)[k] : k);
    p.frames.push_back(Frame{s.dims.width, s.dims.height, {ch.begin(), ch.end()}});
  }
  return p;
}

inline SampleVolume unpack_temporal(const PackedFrameSet& p) {
  detail::check_frames(p, FrameLayout::Temporal, p.dims.channels);
  if (p.permutation) validate_permutation(*p.permutation, p.dims.channels);
  SampleVolume s{p.dims, std::vector<std::uint8_t>(p.dims.count())};
  for (std::uint32_t k = 0; k < p.dims.channels; ++k) {
    const auto& f = p.frames[k];
    if (f.width != p.dims.width || f.height != p.dims.height || f.samples.size() != p.dims.plane())
      fail(ErrorCode::DimMismatch, "frame " + std::to_string(k) + " does not match dims " + to_string(p.dims));
    const std::size_t c = p.permutation ? (*p.permutation)[k] : k;
    std::copy(f.samples.begin(), f.samples.end(), s.samples.begin() + static_cast<std::ptrdiff_t>(c * p.dims.plane()));
  }
  return s;
}

/// Frame sizes implied by a layout and its dims, in frame order.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> frame_geometry(FrameLayout layout, TensorDims dims) {
  switch (layout) {
    case FrameLayout::SpatialTiled:
      if (dims.channels != 64) fail(ErrorCode::WrongChannelCount, "spatial tiling needs 64 channels");
      return {{8 * dims.width, 8 * dims.height}};
    case FrameLayout::Multiscale: {
      const auto l = multiscale_layout(dims);
      return {{l.frame_width, l.frame_height}};
    }
    case FrameLayout::Temporal:
      return std::vector<std::pair<std::uint32_t, std::uint32_t>>(dims.channels, {dims.width, dims.height});
  }
  fail(ErrorCode::BadParams, "unknown layout");
}

/// Headerless planar 8-bit luma-only frames, concatenated in order.
inline std::vector<std::uint8_t> to_yuv400(const PackedFrameSet& p) {
  std::vector<std::uint8_t> out;
  out.reserve(p.sample_count());
  for (const auto& f : p.frames) out.insert(out.end(), f.samples.begin(), f.samples.end());
  return out;
}

/// Rebuilds frames from YUV400 bytes; layout, dims, permutation and params come from the caller.
inline PackedFrameSet from_yuv400(std::span<const std::uint8_t> bytes, FrameLayout layout, TensorDims dims,
                                  std::optional<std::vector<std::uint16_t>> permutation, QuantParams params) {
  PackedFrameSet p{{}, layout, dims, std::move(permutation), std::move(params)};
  std::size_t pos = 0;
  for (auto [w, h] : frame_geometry(layout, dims)) {
    const std::size_t n = std::size_t{w} * h;
    if (pos + n > bytes.size()) fail(ErrorCode::TruncatedFile, "YUV400 data ends inside a frame");
    p.frames.push_back(Frame{w, h, {bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                                    bytes.begin() + static_cast<std::ptrdiff_t>(pos + n)}});
    pos += n;
  }
  if (pos != bytes.size()) fail(ErrorCode::SizeMismatch, "YUV400 data has trailing bytes");
  return p;
}

}  // namespace vcm
