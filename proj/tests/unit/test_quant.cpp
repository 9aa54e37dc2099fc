#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "vcm/feature/quant.hpp"

using namespace vcm;

namespace {

double channel_mean(std::span<const float> v) {
  double s = 0;
  for (float x : v) s += x;
  return s / static_cast<double>(v.size());
}

double channel_std(std::span<const float> v) {
  const double m = channel_mean(v);
  double s = 0;
  for (float x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

TEST(Normalize, ConstantChannel) {
  const FeatureTensor t({2, 1, 2}, {5, 5, -1, 1});
  const auto n = normalize(t);
  EXPECT_EQ(n.z.at(0, 0, 0), 0.0f);
  EXPECT_EQ(n.z.at(0, 0, 1), 0.0f);
  EXPECT_EQ(n.params.mean[0], 5.0f);
  EXPECT_EQ(n.params.stddev[0], 0.0f);
  EXPECT_EQ(n.z.at(1, 0, 0), -1.0f);
  EXPECT_EQ(n.z.at(1, 0, 1), 1.0f);
  EXPECT_EQ(n.params.mean[1], 0.0f);
  EXPECT_EQ(n.params.stddev[1], 1.0f);
  EXPECT_EQ(n.params.z_min, -1.0f);
  EXPECT_EQ(n.params.z_max, 1.0f);
  EXPECT_EQ(denormalize(n.z, n.params), t);
}

TEST(Normalize, ChannelsAreStandardized) {
  std::mt19937_64 rng(1);
  const auto t = testing_support::random_tensor(rng, {6, 9, 11}, 4.0);
  const auto n = normalize(t);
  float lo = INFINITY, hi = -INFINITY;
  for (std::size_t c = 0; c < 6; ++c) {
    EXPECT_NEAR(channel_mean(n.z.channel(c)), 0.0, 1e-6);
    EXPECT_NEAR(channel_std(n.z.channel(c)), 1.0, 1e-6);
    for (float v : n.z.channel(c)) lo = std::min(lo, v), hi = std::max(hi, v);
  }
  EXPECT_EQ(n.params.z_min, lo);
  EXPECT_EQ(n.params.z_max, hi);
}

TEST(Normalize, DenormalizeInverts) {
  std::mt19937_64 rng(2);
  const auto t = testing_support::random_tensor(rng, {4, 5, 7}, 10.0);
  const auto n = normalize(t);
  const auto back = denormalize(n.z, n.params);
  for (std::size_t i = 0; i < t.values().size(); ++i)
    ASSERT_NEAR(back.values()[i], t.values()[i], 1e-5 * std::max(1.0f, std::abs(t.values()[i])));
}

TEST(Normalize, LevelsSharePooledStatistics) {
  std::mt19937_64 rng(3);
  const std::vector<FeatureTensor> levels{testing_support::random_tensor(rng, {3, 4, 4}),
                                          testing_support::random_tensor(rng, {3, 2, 2})};
  const auto n = normalize_levels(levels);
  ASSERT_EQ(n.z.size(), 2u);
  for (std::size_t c = 0; c < 3; ++c) {
    std::vector<float> pooled(levels[0].channel(c).begin(), levels[0].channel(c).end());
    pooled.insert(pooled.end(), levels[1].channel(c).begin(), levels[1].channel(c).end());
    EXPECT_NEAR(n.params.mean[c], channel_mean(pooled), 1e-5);
    EXPECT_NEAR(n.params.stddev[c], channel_std(pooled), 1e-5);
  }
  const std::vector<FeatureTensor> bad{testing_support::random_tensor(rng, {3, 2, 2}),
                                       testing_support::random_tensor(rng, {2, 2, 2})};
  EXPECT_THROW(normalize_levels(bad), Error);
}

TEST(Quantize8, EndpointsAndMidpoint) {
  EXPECT_EQ(quantize_8bit_value(-1.0, -1.0, 1.0), 0);
  EXPECT_EQ(quantize_8bit_value(1.0, -1.0, 1.0), 255);
  EXPECT_EQ(quantize_8bit_value(0.0, -1.0, 1.0), 128);
  EXPECT_EQ(quantize_8bit_value(-5.0, -1.0, 1.0), 0);
  EXPECT_EQ(quantize_8bit_value(5.0, -1.0, 1.0), 255);
}

TEST(Quantize8, DenseGridErrorBound) {
  const double lo = -2.7, hi = 4.1;
  const double bound = (hi - lo) / 510.0 + 1e-9;
  double worst = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double z = lo + (hi - lo) * i / (n - 1);
    worst = std::max(worst, std::abs(dequantize_8bit_value(quantize_8bit_value(z, lo, hi), lo, hi) - z));
  }
  EXPECT_LE(worst, bound);
  EXPECT_GT(worst, 0.99 * (hi - lo) / 510.0);
}

TEST(Quantize8, DegenerateRange) {
  QuantParams p = QuantParams::identity(1);
  p.z_min = p.z_max = 0.5f;
  try {
    quantize_8bit(FeatureTensor({1, 1, 1}, {0.5f}), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateRange);
  }
}

TEST(Quantize2, LevelMapping) {
  EXPECT_EQ(quantize_2bit_value(-2.0, 1.5), 0);
  EXPECT_EQ(quantize_2bit_value(-0.3, 1.5), 1);
  EXPECT_EQ(quantize_2bit_value(0.7, 1.5), 2);
  EXPECT_EQ(quantize_2bit_value(2.0, 1.5), 3);
  EXPECT_EQ(quantize_2bit_value(0.0, 1.5), 2);
  EXPECT_EQ(quantize_2bit_value(1.5, 1.5), 3);
  EXPECT_EQ(quantize_2bit_value(-1.5, 1.5), 1);
}

TEST(Quantize2, Reconstruction) {
  EXPECT_DOUBLE_EQ(dequantize_2bit_value(1, 1.5), -0.75);
  EXPECT_DOUBLE_EQ(dequantize_2bit_value(0, 1.5), -2.25);
  EXPECT_DOUBLE_EQ(dequantize_2bit_value(2, 1.5), 0.75);
  EXPECT_DOUBLE_EQ(dequantize_2bit_value(3, 1.5), 2.25);
  QuantParams p = QuantParams::identity(1);
  p.bit_depth = 2;
  EXPECT_THROW(dequantize_2bit(SampleVolume{{1, 1, 1}, {4}}, p), Error);
}

TEST(Quantize2, AlphabetAndCount) {
  std::mt19937_64 rng(4);
  const auto t = testing_support::random_tensor(rng, {5, 6, 7});
  const auto s = quantize_2bit(t, 1.5);
  ASSERT_EQ(s.samples.size(), t.values().size());
  for (auto v : s.samples) ASSERT_LE(v, 3);
}

TEST(QuantChain, FullRoundTripWithinStep) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = testing_support::random_tensor(rng, {8, 5, 6}, 2.0 + trial);
    const auto n = normalize(t);
    const auto back = denormalize(dequantize(quantize(n.z, n.params), n.params), n.params);
    const double step = (static_cast<double>(n.params.z_max) - n.params.z_min) / 510.0;
    for (std::size_t c = 0; c < 8; ++c)
      for (std::size_t i = 0; i < t.dims().plane(); ++i) {
        const double want = t.channel(c)[i];
        const double got = back.channel(c)[i];
        ASSERT_LE(std::abs(got - want), n.params.stddev[c] * step + 1e-6 + 1e-6 * std::abs(want));
      }
  }
}

TEST(RawSize, BitDepthRatios) {
  const TensorDims d{256, 200, 304};
  EXPECT_EQ(raw_size_bits({1, 1, 1}, 8), 8u);
  EXPECT_EQ(static_cast<double>(raw_size_bits(d, 32)) / static_cast<double>(raw_size_bits(d, 8)), 4.0);
  EXPECT_EQ(static_cast<double>(raw_size_bits(d, 8)) / static_cast<double>(raw_size_bits(d, 2)), 4.0);
  // Reported feature/input size ratios of 28.41, 7.10 and 1.77.
  EXPECT_NEAR(28.41 / 7.10, 4.0, 4.0 * 0.003);
  EXPECT_NEAR(7.10 / 1.77, 4.0, 4.0 * 0.003);
  EXPECT_THROW(raw_size_bits(d, 4), Error);
}
