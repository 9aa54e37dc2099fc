#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "vcm/feature/arith_coder.hpp"
#include "vcm/feature/quant.hpp"
#include "vcm/feature/stream.hpp"
#include "vcm/feature/volume_io.hpp"

using namespace vcm;
using testing_support::TempDir;

namespace {

std::vector<std::uint8_t> skewed(std::mt19937_64& rng, std::size_t n, double p_zero) {
  std::bernoulli_distribution zero(p_zero);
  std::uniform_int_distribution<int> b(0, 255);
  std::vector<std::uint8_t> v(n);
  for (auto& x : v) x = zero(rng) ? 0 : static_cast<std::uint8_t>(b(rng));
  return v;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoFailure;
}

PackedFrameSet sample_frames(std::mt19937_64& rng) {
  const auto t = testing_support::random_tensor(rng, {12, 5, 7});
  const auto n = normalize(t);
  return pack_temporal(quantize(n.z, n.params), n.params);
}

}  // namespace

TEST(ArithCoder, RoundTripsAssortedInputs) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> len(0, 5000);
  for (int i = 0; i < 200; ++i) {
    const auto in = skewed(rng, len(rng), (i % 5) / 4.0);
    const auto e = arith::compress(in);
    ASSERT_EQ(arith::decompress(e.payload, in.size()), in) << i;
    ASSERT_LE(e.payload.size(), in.size() + 1);
    ASSERT_EQ((e.payload_bits + 7) / 8, e.payload.size());
  }
}

TEST(ArithCoder, AllZeroFrameCompressesBelowOnePercent) {
  const std::vector<std::uint8_t> zeros(10000, 0);
  const auto e = arith::compress(zeros);
  EXPECT_EQ(e.payload[0], arith::kMethodArithmetic);
  EXPECT_LT(e.payload.size(), 100u);
  EXPECT_EQ(arith::decompress(e.payload, zeros.size()), zeros);
}

TEST(ArithCoder, UniformBytesInflateAtMostSlightly) {
  std::mt19937_64 rng(2);
  const auto in = skewed(rng, 100000, 0.0);
  const auto e = arith::compress(in);
  EXPECT_LE(e.payload.size(), in.size() + 64);
  // The adaptive model costs more than the allowance here, so the stored form wins.
  EXPECT_GT(arith::encode_arithmetic(in).payload.size(), in.size() + 64);
  EXPECT_EQ(e.payload[0], arith::kMethodStored);
  EXPECT_EQ(arith::decompress(e.payload, in.size()), in);
}

TEST(ArithCoder, SkewedDataShrinks) {
  std::mt19937_64 rng(3);
  const auto in = skewed(rng, 20000, 0.9);
  EXPECT_LT(arith::compress(in).payload.size(), in.size() / 2);
}

TEST(ArithCoder, CorruptPayloadMethod) {
  std::vector<std::uint8_t> payload{7, 1, 2};
  EXPECT_EQ(code_of([&] { arith::decompress(payload, 2); }), ErrorCode::CorruptStream);
  EXPECT_EQ(code_of([&] { arith::decompress({}, 2); }), ErrorCode::CorruptStream);
  std::vector<std::uint8_t> stored{arith::kMethodStored, 1, 2};
  EXPECT_EQ(code_of([&] { arith::decompress(stored, 3); }), ErrorCode::CorruptStream);
}

TEST(FeatureStream, RoundTripThroughBytes) {
  std::mt19937_64 rng(4);
  auto frames = sample_frames(rng);
  const auto s = entropy_encode(frames);
  const auto bytes = serialize(s);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "VCMS");
  EXPECT_EQ(entropy_decode(parse_stream(bytes)), frames);
}

TEST(FeatureStream, PermutationAndTwoBitFramesSurvive) {
  std::mt19937_64 rng(5);
  const auto t = testing_support::random_tensor(rng, {4, 3, 3});
  auto n = normalize(t, 1.5f, 2);
  const auto samples = quantize(n.z, n.params);
  const auto frames = pack_temporal(samples, n.params, std::vector<std::uint16_t>{2, 0, 3, 1});
  EXPECT_EQ(entropy_decode(parse_stream(serialize(entropy_encode(frames)))), frames);
}

TEST(FeatureStream, CorruptionDetected) {
  std::mt19937_64 rng(6);
  const auto bytes = serialize(entropy_encode(sample_frames(rng)));
  auto flipped = bytes;
  flipped.back() ^= 0x5A;
  EXPECT_EQ(code_of([&] { entropy_decode(parse_stream(flipped)); }), ErrorCode::CorruptStream);
  auto cut = bytes;
  cut.resize(cut.size() - 3);
  EXPECT_EQ(code_of([&] { parse_stream(cut); }), ErrorCode::CorruptStream);
  auto magic = bytes;
  magic[0] = 'X';
  EXPECT_EQ(code_of([&] { parse_stream(magic); }), ErrorCode::BadMagic);
}

TEST(FeatureStream, RandomFrameSets) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::uint32_t> dim(1, 40);
  for (int i = 0; i < 50; ++i) {
    SampleVolume v{{dim(rng), dim(rng), dim(rng)}, {}};
    v.samples = skewed(rng, v.dims.count(), 0.5);
    const auto frames = pack_temporal(v, QuantParams::identity(v.dims.channels));
    ASSERT_EQ(entropy_decode(parse_stream(serialize(entropy_encode(frames)))), frames);
  }
}

TEST(VolumeFile, RoundTripAndErrors) {
  TempDir dir;
  std::mt19937_64 rng(8);
  const auto t = testing_support::random_tensor(rng, {3, 4, 5});
  const auto n = normalize(t);
  const QuantizedVolume v{quantize(n.z, n.params), n.params};
  write_volume(v, dir / "v.vcmq");
  const auto back = read_volume(dir / "v.vcmq");
  EXPECT_EQ(back.samples, v.samples);
  EXPECT_EQ(back.params, v.params);
  auto bytes = encode_volume(v);
  bytes.pop_back();
  EXPECT_EQ(code_of([&] { decode_volume(bytes); }), ErrorCode::TruncatedFile);
  bytes.push_back(0);
  bytes.push_back(0);
  EXPECT_EQ(code_of([&] { decode_volume(bytes); }), ErrorCode::SizeMismatch);
}
