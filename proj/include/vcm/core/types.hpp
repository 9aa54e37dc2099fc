#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vcm/error.hpp"

namespace vcm {

// Closed real rectangle in source-image pixel coordinates.
struct BoundingBox {
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;

  double width() const noexcept { return x_max - x_min; }
  double height() const noexcept { return y_max - y_min; }
  double area() const noexcept { return width() * height(); }

  BoundingBox scaled(double sx, double sy) const noexcept {
    return {x_min * sx, y_min * sy, x_max * sx, y_max * sy};
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

inline bool is_valid(const BoundingBox& b) noexcept {
  return std::isfinite(b.x_min) && std::isfinite(b.y_min) && std::isfinite(b.x_max) && std::isfinite(b.y_max) &&
         b.x_min >= 0 && b.y_min >= 0 && b.x_max > b.x_min && b.y_max > b.y_min;
}

struct Detection {
  std::string image_id;
  int class_id = 0;
  BoundingBox box;
  double score = 0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

struct GroundTruthBox {
  std::string image_id;
  int class_id = 0;
  BoundingBox box;

  friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

struct TrackedBox {
  int frame_index = 0;
  long long track_id = 0;
  int class_id = 0;
  BoundingBox box;
  double score = 1.0;

  friend bool operator==(const TrackedBox&, const TrackedBox&) = default;
};

inline std::string invariant_problem(const Detection& d) {
  if (d.image_id.empty()) return "empty image_id";
  if (d.class_id < 0) return "negative class_id";
  if (!is_valid(d.box)) return "invalid bbox";
  if (!(d.score >= 0.0 && d.score <= 1.0)) return "score outside [0,1]";
  return {};
}

inline std::string invariant_problem(const GroundTruthBox& g) {
  if (g.image_id.empty()) return "empty image_id";
  if (g.class_id < 0) return "negative class_id";
  if (!is_valid(g.box)) return "invalid bbox";
  return {};
}

inline std::string invariant_problem(const TrackedBox& t) {
  if (t.frame_index < 0) return "negative frame";
  if (!is_valid(t.box)) return "invalid bbox";
  if (!(t.score >= 0.0 && t.score <= 1.0)) return "score outside [0,1]";
  return {};
}

struct TensorDims {
  std::uint32_t channels = 1;
  std::uint32_t height = 1;
  std::uint32_t width = 1;

  std::size_t plane() const noexcept { return std::size_t{height} * width; }
  std::size_t count() const noexcept { return std::size_t{channels} * plane(); }

  friend bool operator==(const TensorDims&, const TensorDims&) = default;
};

inline std::string to_string(const TensorDims& d) {
  return std::to_string(d.channels) + "x" + std::to_string(d.height) + "x" + std::to_string(d.width);
}

/// C x H x W float32 feature maps, stored channel-major then row-major.
/// Values are always finite.
class FeatureTensor {
 public:
  FeatureTensor() = default;

  FeatureTensor(TensorDims dims, std::vector<float> values) : dims_(dims), values_(std::move(values)) {
    if (dims_.channels == 0 || dims_.height == 0 || dims_.width == 0)
      fail(ErrorCode::InvariantViolation, "tensor dims must be >= 1, got " + to_string(dims_));
    if (values_.size() != dims_.count())
      fail(ErrorCode::InvariantViolation, "tensor has " + std::to_string(values_.size()) + " values, dims " +
                                              to_string(dims_) + " need " + std::to_string(dims_.count()));
    for (std::size_t i = 0; i < values_.size(); ++i)
      if (!std::isfinite(values_[i])) fail(ErrorCode::InvariantViolation, "non-finite value at index " + std::to_string(i));
  }

  const TensorDims& dims() const noexcept { return dims_; }
  std::span<const float> values() const noexcept { return values_; }
  std::span<const float> channel(std::size_t c) const noexcept {
    return std::span<const float>(values_).subspan(c * dims_.plane(), dims_.plane());
  }
  float at(std::size_t c, std::size_t y, std::size_t x) const noexcept {
    return values_[c * dims_.plane() + y * dims_.width + x];
  }

  friend bool operator==(const FeatureTensor&, const FeatureTensor&) = default;

 private:
  TensorDims dims_;
  std::vector<float> values_;
};

/// Normalization and quantization parameters. Stored as float32 so they survive
/// the stream container unchanged.
struct QuantParams {
  std::vector<float> mean;
  std::vector<float> stddev;
  float z_min = 0.0f;
  float z_max = 0.0f;
  float z_th = 1.5f;
  int bit_depth = 8;

  static QuantParams identity(std::size_t channels) {
    QuantParams p;
    p.mean.assign(channels, 0.0f);
    p.stddev.assign(channels, 1.0f);
    return p;
  }

  friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

inline void validate(const QuantParams& p) {
  if (p.mean.size() != p.stddev.size()) fail(ErrorCode::BadParams, "mean/stddev length mismatch");
  for (float s : p.stddev)
    if (!(s >= 0.0f) || !std::isfinite(s)) fail(ErrorCode::BadParams, "stddev must be finite and >= 0");
  for (float m : p.mean)
    if (!std::isfinite(m)) fail(ErrorCode::BadParams, "mean must be finite");
  if (!std::isfinite(p.z_min) || !std::isfinite(p.z_max) || !(p.z_max >= p.z_min))
    fail(ErrorCode::BadParams, "z_max must be >= z_min");
  if (!(p.z_th > 0.0f) || !std::isfinite(p.z_th)) fail(ErrorCode::BadParams, "z_th must be > 0");
  if (p.bit_depth != 2 && p.bit_depth != 8) fail(ErrorCode::BadParams, "bit_depth must be 2 or 8");
}

/// Quantized feature samples, same geometry as the tensor they came from.
struct SampleVolume {
  TensorDims dims;
  std::vector<std::uint8_t> samples;

  std::span<const std::uint8_t> channel(std::size_t c) const noexcept {
    return std::span<const std::uint8_t>(samples).subspan(c * dims.plane(), dims.plane());
  }

  friend bool operator==(const SampleVolume&, const SampleVolume&) = default;
};

enum class FrameLayout : std::uint8_t { SpatialTiled = 0, Multiscale = 1, Temporal = 2 };

inline std::string to_string(FrameLayout l) {
  switch (l) {
    case FrameLayout::SpatialTiled: return "spatial";
    case FrameLayout::Multiscale: return "multiscale";
    case FrameLayout::Temporal: return "temporal";
  }
  return "unknown";
}

struct Frame {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> samples;  // row-major, width * height

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct PackedFrameSet {
  std::vector<Frame> frames;
  FrameLayout layout = FrameLayout::Temporal;
  TensorDims dims;  // P2 dims for the multiscale layout
  std::optional<std::vector<std::uint16_t>> permutation;
  QuantParams params;

  std::size_t sample_count() const noexcept {
    std::size_t n = 0;
    for (const auto& f : frames) n += f.samples.size();
    return n;
  }

  friend bool operator==(const PackedFrameSet&, const PackedFrameSet&) = default;
};

struct RDPoint {
  double rate = 0;
  double quality = 0;

  friend bool operator==(const RDPoint&, const RDPoint&) = default;
};

struct RDCurve {
  std::string label;
  std::optional<int> scale_percent;
  std::vector<RDPoint> points;  // strictly increasing rate
  std::string quality_unit;

  friend bool operator==(const RDCurve&, const RDCurve&) = default;
};

inline bool is_valid_scale(int percent) noexcept {
  return percent == 25 || percent == 50 || percent == 75 || percent == 100;
}

// Harness defaults, non-normative: the weights are pure configuration.
struct WeightConfig {
  double w = 0.5;
  double w_y = 0.8;
  double w_cb = 0.1;
  double w_cr = 0.1;
};

inline void validate(const WeightConfig& wc) {
  if (!(wc.w >= 0.0 && wc.w <= 1.0)) fail(ErrorCode::InvariantViolation, "w must be in [0,1]");
  if (!(wc.w_y >= 0.0 && wc.w_cb >= 0.0 && wc.w_cr >= 0.0))
    fail(ErrorCode::InvariantViolation, "channel weights must be >= 0");
  if (std::abs(wc.w_y + wc.w_cb + wc.w_cr - 1.0) > 1e-9)
    fail(ErrorCode::InvariantViolation, "channel weights must sum to 1");
}

template <class T>
struct Plane {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<T> samples;

  Plane() = default;
  Plane(std::uint32_t w, std::uint32_t h, T fill = T{}) : width(w), height(h), samples(std::size_t{w} * h, fill) {}

  T& at(std::size_t x, std::size_t y) noexcept { return samples[y * width + x]; }
  const T& at(std::size_t x, std::size_t y) const noexcept { return samples[y * width + x]; }

  friend bool operator==(const Plane&, const Plane&) = default;
};

/// Reference and reconstruction as Y, Cb, Cr planes with per-channel maxima.
template <class T>
struct ImagePair {
  std::array<Plane<T>, 3> reference;
  std::array<Plane<T>, 3> reconstruction;
  std::array<double, 3> max_value{255.0, 255.0, 255.0};
};

struct HybridRdoConfig {
  double theta = 0.75;
  double lambda_sse = 1.0;
  double lambda_dmiou = 1.0;
};

}  // namespace vcm
