#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "vcm/core/types.hpp"
#include "vcm/util/binary_io.hpp"

namespace vcm {

/// 8-bit 4:2:0 picture: full-resolution Y, Cb and Cr at ceil(w/2) x ceil(h/2).
struct RawImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::array<Plane<std::uint8_t>, 3> planes;

  static RawImage blank(std::uint32_t w, std::uint32_t h, std::uint8_t luma = 0, std::uint8_t chroma = 128) {
    RawImage img;
    img.width = w;
    img.height = h;
    img.planes[0] = Plane<std::uint8_t>(w, h, luma);
    img.planes[1] = Plane<std::uint8_t>(chroma_extent(w), chroma_extent(h), chroma);
    img.planes[2] = Plane<std::uint8_t>(chroma_extent(w), chroma_extent(h), chroma);
    return img;
  }

  static constexpr std::uint32_t chroma_extent(std::uint32_t luma) noexcept { return (luma + 1) / 2; }
  static std::size_t frame_bytes(std::uint32_t w, std::uint32_t h) noexcept {
    return std::size_t{w} * h + 2 * std::size_t{chroma_extent(w)} * chroma_extent(h);
  }

  friend bool operator==(const RawImage&, const RawImage&) = default;
};

// ---- planar YUV 4:2:0 files, frames concatenated ----------------------------

inline std::vector<RawImage> decode_yuv420(std::span<const std::uint8_t> bytes, std::uint32_t w, std::uint32_t h) {
  if (w == 0 || h == 0) fail(ErrorCode::ZeroPixels, "image dims must be >= 1");
  const std::size_t fb = RawImage::frame_bytes(w, h);
  if (bytes.empty() || bytes.size() % fb != 0)
    fail(ErrorCode::SizeMismatch, "YUV420 data of " + std::to_string(bytes.size()) + " bytes is not a whole number of " +
                                      std::to_string(w) + "x" + std::to_string(h) + " frames");
  std::vector<RawImage> frames;
  for (std::size_t pos = 0; pos < bytes.size();) {
    auto img = RawImage::blank(w, h);
    for (auto& p : img.planes) {
      std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(pos), p.samples.size(), p.samples.begin());
      pos += p.samples.size();
    }
    frames.push_back(std::move(img));
  }
  return frames;
}

inline std::vector<std::uint8_t> encode_yuv420(std::span<const RawImage> frames) {
  std::vector<std::uint8_t> out;
  for (const auto& img : frames)
    for (const auto& p : img.planes) out.insert(out.end(), p.samples.begin(), p.samples.end());
  return out;
}

inline std::vector<RawImage> read_yuv420(const std::filesystem::path& path, std::uint32_t w, std::uint32_t h) {
  try {
    return decode_yuv420(io::read_file(path), w, h);
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

inline void write_yuv420(const std::filesystem::path& path, std::span<const RawImage> frames) {
  io::write_file(path, encode_yuv420(frames));
}

// ---- resampling ------------------------------------------------------------

/// Bilinear resampling with pixel-center alignment and edge clamping.
inline Plane<std::uint8_t> resize_plane(const Plane<std::uint8_t>& src, std::uint32_t dw, std::uint32_t dh) {
  if (src.width == dw && src.height == dh) return src;
  Plane<std::uint8_t> dst(dw, dh);
  const double sx = static_cast<double>(src.width) / dw;
  const double sy = static_cast<double>(src.height) / dh;
  auto coord = [](double pos, std::uint32_t extent, std::uint32_t& i0, std::uint32_t& i1, double& frac) {
    pos = std::clamp(pos, 0.0, static_cast<double>(extent - 1));
    i0 = static_cast<std::uint32_t>(pos);
    i1 = std::min(i0 + 1, extent - 1);
    frac = pos - i0;
  };
  for (std::uint32_t y = 0; y < dh; ++y) {
    std::uint32_t y0, y1;
    double fy;
    coord((y + 0.5) * sy - 0.5, src.height, y0, y1, fy);
    for (std::uint32_t x = 0; x < dw; ++x) {
      std::uint32_t x0, x1;
      double fx;
      coord((x + 0.5) * sx - 0.5, src.width, x0, x1, fx);
      const double top = src.at(x0, y0) * (1.0 - fx) + src.at(x1, y0) * fx;
      const double bottom = src.at(x0, y1) * (1.0 - fx) + src.at(x1, y1) * fx;
      const double v = top * (1.0 - fy) + bottom * fy;
      dst.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
    }
  }
  return dst;
}

inline RawImage resize_image(const RawImage& img, std::uint32_t w, std::uint32_t h) {
  if (w == 0 || h == 0) fail(ErrorCode::ZeroPixels, "target dims must be >= 1");
  RawImage out;
  out.width = w;
  out.height = h;
  out.planes[0] = resize_plane(img.planes[0], w, h);
  out.planes[1] = resize_plane(img.planes[1], RawImage::chroma_extent(w), RawImage::chroma_extent(h));
  out.planes[2] = resize_plane(img.planes[2], RawImage::chroma_extent(w), RawImage::chroma_extent(h));
  return out;
}

/// Encode-side dimension at a scale: round(extent * percent / 100), at least 1.
inline std::uint32_t scaled_extent(std::uint32_t extent, int percent) {
  const auto v = std::llround(static_cast<double>(extent) * percent / 100.0);
  return static_cast<std::uint32_t>(std::max<long long>(1, v));
}

inline RawImage scale_image(const RawImage& img, int percent) {
  if (!is_valid_scale(percent)) fail(ErrorCode::InvariantViolation, "scale must be 25, 50, 75 or 100");
  if (percent == 100) return img;
  return resize_image(img, scaled_extent(img.width, percent), scaled_extent(img.height, percent));
}

// ---- even-dimension border padding ------------------------------------------

struct PadRecord {
  std::uint32_t right = 0;
  std::uint32_t bottom = 0;

  friend bool operator==(const PadRecord&, const PadRecord&) = default;
};

/// Replicates the last column and/or row so both dims are even. The chroma
/// planes already cover ceil(w/2) x ceil(h/2) and are left unchanged.
inline std::pair<RawImage, PadRecord> pad_to_even(const RawImage& img) {
  PadRecord rec{img.width % 2, img.height % 2};
  if (rec.right == 0 && rec.bottom == 0) return {img, rec};
  RawImage out = img;
  out.width = img.width + rec.right;
  out.height = img.height + rec.bottom;
  Plane<std::uint8_t> y(out.width, out.height);
  for (std::uint32_t r = 0; r < out.height; ++r)
    for (std::uint32_t c = 0; c < out.width; ++c)
      y.at(c, r) = img.planes[0].at(std::min(c, img.width - 1), std::min(r, img.height - 1));
  out.planes[0] = std::move(y);
  return {std::move(out), rec};
}

inline RawImage crop_pad(const RawImage& img, PadRecord rec) {
  if (rec.right == 0 && rec.bottom == 0) return img;
  if (rec.right > 1 || rec.bottom > 1 || img.width <= rec.right || img.height <= rec.bottom)
    fail(ErrorCode::InvariantViolation, "pad record does not fit image");
  RawImage out = img;
  out.width = img.width - rec.right;
  out.height = img.height - rec.bottom;
  Plane<std::uint8_t> y(out.width, out.height);
  for (std::uint32_t r = 0; r < out.height; ++r)
    for (std::uint32_t c = 0; c < out.width; ++c) y.at(c, r) = img.planes[0].at(c, r);
  out.planes[0] = std::move(y);
  if (out.planes[1].width != RawImage::chroma_extent(out.width) ||
      out.planes[1].height != RawImage::chroma_extent(out.height))
    fail(ErrorCode::DimMismatch, "chroma planes do not match cropped dims");
  return out;
}

}  // namespace vcm
