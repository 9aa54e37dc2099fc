#pragma once

#include <cstdint>

#include "vcm/error.hpp"

namespace vcm {

/// Bits per pixel of the SOURCE image. Never pass the scaled or padded encode size.
inline double bpp(std::uint64_t bitstream_bits, std::uint64_t source_width, std::uint64_t source_height) {
  const std::uint64_t pixels = source_width * source_height;
  if (pixels == 0) fail(ErrorCode::ZeroPixels, "source image has no pixels");
  if (bitstream_bits == 0) fail(ErrorCode::InvariantViolation, "bitstream must have at least one bit");
  return static_cast<double>(bitstream_bits) / static_cast<double>(pixels);
}

/// Bits per second for a clip of frame_count frames played at fps.
inline double bitrate(std::uint64_t total_bits, std::uint64_t frame_count, double fps) {
  if (frame_count == 0) fail(ErrorCode::ZeroFrames, "clip has no frames");
  if (!(fps > 0.0)) fail(ErrorCode::InvariantViolation, "fps must be > 0");
  return static_cast<double>(total_bits) * fps / static_cast<double>(frame_count);
}

}  // namespace vcm
