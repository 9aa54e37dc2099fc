#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "vcm/core/types.hpp"

namespace vcm {

template <class T>
double channel_mse(std::span<const T> a, std::span<const T> b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += d * d;
  }
  return a.empty() ? 0.0 : sum / static_cast<double>(a.size());
}

/// Greedy similarity chain: start at channel 0, then repeatedly append the
/// unvisited channel with the smallest MSE to the last one appended. Ties go
/// to the lower channel index. Returns perm with perm[k] = source channel.
template <class T>
std::vector<std::uint16_t> similarity_order(std::span<const T> data, std::size_t channels) {
  if (channels == 0) fail(ErrorCode::InvariantViolation, "need at least one channel");
  if (channels > std::numeric_limits<std::uint16_t>::max() + std::size_t{1})
    fail(ErrorCode::InvariantViolation, "channel order is stored as u16");
  const std::size_t plane = data.size() / channels;
  auto ch = [&](std::size_t c) { return data.subspan(c * plane, plane); };

  std::vector<std::uint16_t> perm{0};
  std::vector<bool> used(channels, false);
  used[0] = true;
  while (perm.size() < channels) {
    const auto last = ch(perm.back());
    std::size_t best = channels;
    double best_cost = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < channels; ++c) {
      if (used[c]) continue;
      const double cost = channel_mse(last, ch(c));
      if (cost < best_cost) {
        best_cost = cost;
        best = c;
      }
    }
    used[best] = true;
    perm.push_back(static_cast<std::uint16_t>(best));
  }
  return perm;
}

template <class T>
std::vector<T> permute_channels(std::span<const T> data, std::span<const std::uint16_t> perm) {
  const std::size_t plane = perm.empty() ? 0 : data.size() / perm.size();
  std::vector<T> out(data.size());
  for (std::size_t k = 0; k < perm.size(); ++k)
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(perm[k] * plane), plane,
                out.begin() + static_cast<std::ptrdiff_t>(k * plane));
  return out;
}

template <class T>
std::vector<T> inverse_permute_channels(std::span<const T> data, std::span<const std::uint16_t> perm) {
  const std::size_t plane = perm.empty() ? 0 : data.size() / perm.size();
  std::vector<T> out(data.size());
  for (std::size_t k = 0; k < perm.size(); ++k)
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(k * plane), plane,
                out.begin() + static_cast<std::ptrdiff_t>(perm[k] * plane));
  return out;
}

template <class Data>
struct Reordered {
  std::vector<std::uint16_t> permutation;
  Data data;
};

inline Reordered<SampleVolume> reorder_channels(const SampleVolume& s) {
  auto perm = similarity_order<std::uint8_t>(s.samples, s.dims.channels);
  auto data = permute_channels<std::uint8_t>(s.samples, perm);
  return {std::move(perm), SampleVolume{s.dims, std::move(data)}};
}

inline Reordered<FeatureTensor> reorder_channels(const FeatureTensor& t) {
  auto perm = similarity_order<float>(t.values(), t.dims().channels);
  auto data = permute_channels<float>(t.values(), perm);
  return {std::move(perm), FeatureTensor(t.dims(), std::move(data))};
}

inline SampleVolume restore_channel_order(const SampleVolume& s, std::span<const std::uint16_t> perm) {
  return SampleVolume{s.dims, inverse_permute_channels<std::uint8_t>(s.samples, perm)};
}

inline FeatureTensor restore_channel_order(const FeatureTensor& t, std::span<const std::uint16_t> perm) {
  return FeatureTensor(t.dims(), inverse_permute_channels<float>(t.values(), perm));
}

}  // namespace vcm
