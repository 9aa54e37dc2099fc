#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "vcm/error.hpp"

// Order-0 adaptive arithmetic coder over bytes.
//
// Payload layout: one method byte, then the body.
//   0 = stored: the body is the input bytes verbatim
//   1 = arithmetic: the body is the coded bit string, MSB first, zero padded
// The encoder picks stored whenever arithmetic coding would not be smaller, so
// a payload never exceeds the input by more than one byte.

namespace vcm::arith {

inline constexpr std::uint8_t kMethodStored = 0;
inline constexpr std::uint8_t kMethodArithmetic = 1;

/// Adaptive byte frequencies in a Fenwick tree. Every symbol starts at 1;
/// each coded symbol adds kIncrement and the table halves once the total
/// would pass kMaxTotal.
class AdaptiveModel {
 public:
  static constexpr std::uint32_t kSymbols = 256;
  static constexpr std::uint32_t kIncrement = 32;
  static constexpr std::uint32_t kMaxTotal = 1u << 16;

  AdaptiveModel() { reset(); }

  void reset() {
    freq_.fill(1);
    rebuild();
  }

  std::uint32_t total() const noexcept { return total_; }

  // Cumulative frequency of symbols < s.
  std::uint32_t cum_low(std::uint32_t s) const noexcept {
    std::uint32_t sum = 0;
    for (std::uint32_t i = s; i > 0; i -= i & (~i + 1)) sum += tree_[i];
    return sum;
  }

  std::uint32_t freq(std::uint32_t s) const noexcept { return freq_[s]; }

  // Symbol s with cum_low(s) <= target < cum_low(s) + freq(s).
  std::uint32_t find(std::uint32_t target) const noexcept {
    std::uint32_t pos = 0;
    for (std::uint32_t step = kSymbols; step > 0; step >>= 1) {
      if (pos + step <= kSymbols && tree_[pos + step] <= target) {
        pos += step;
        target -= tree_[pos];
      }
    }
    return pos;
  }

  void update(std::uint32_t s) {
    if (total_ + kIncrement > kMaxTotal) {
      for (auto& f : freq_) f = (f + 1) / 2;
      rebuild();
    }
    freq_[s] += kIncrement;
    total_ += kIncrement;
    for (std::uint32_t i = s + 1; i <= kSymbols; i += i & (~i + 1)) tree_[i] += kIncrement;
  }

 private:
  void rebuild() {
    tree_.fill(0);
    total_ = 0;
    for (std::uint32_t s = 0; s < kSymbols; ++s) {
      total_ += freq_[s];
      for (std::uint32_t i = s + 1; i <= kSymbols; i += i & (~i + 1)) tree_[i] += freq_[s];
    }
  }

  std::array<std::uint32_t, kSymbols> freq_{};
  std::array<std::uint32_t, kSymbols + 1> tree_{};
  std::uint32_t total_ = 0;
};

namespace detail {

inline constexpr std::uint64_t kTop = 0xFFFFFFFFull;
inline constexpr std::uint64_t kHalf = 0x80000000ull;
inline constexpr std::uint64_t kQuarter = 0x40000000ull;
inline constexpr std::uint64_t kThreeQuarters = 0xC0000000ull;

class BitSink {
 public:
  void put(bool bit) {
    if (nbits_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(0x80u >> (nbits_ % 8));
    ++nbits_;
  }
  std::uint64_t bits() const noexcept { return nbits_; }
  std::vector<std::uint8_t>& bytes() noexcept { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
  std::uint64_t nbits_ = 0;
};

class BitSource {
 public:
  explicit BitSource(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}
  // Reads past the end yield zeros.
  std::uint32_t get() noexcept {
    const std::size_t byte = pos_ / 8;
    std::uint32_t bit = byte < bytes_.size() ? (bytes_[byte] >> (7 - pos_ % 8)) & 1u : 0u;
    ++pos_;
    return bit;
  }
  std::uint64_t consumed() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::uint64_t pos_ = 0;
};

}  // namespace detail

struct Encoded {
  std::vector<std::uint8_t> payload;  // method byte + body
  std::uint64_t payload_bits = 0;     // exact bits including the method byte
};

/// Arithmetic-codes `input`; the body is the exact bit string produced.
inline Encoded encode_arithmetic(std::span<const std::uint8_t> input) {
  using namespace detail;
  AdaptiveModel model;
  BitSink out;
  std::uint64_t low = 0, high = kTop;
  std::uint64_t pending = 0;
  auto emit = [&](bool bit) {
    out.put(bit);
    for (; pending > 0; --pending) out.put(!bit);
  };
  for (std::uint8_t sym : input) {
    const std::uint64_t range = high - low + 1;
    const std::uint64_t total = model.total();
    const std::uint64_t lo = model.cum_low(sym);
    const std::uint64_t hi = lo + model.freq(sym);
    high = low + range * hi / total - 1;
    low = low + range * lo / total;
    for (;;) {
      if (high < kHalf) {
        emit(false);
      } else if (low >= kHalf) {
        emit(true);
        low -= kHalf;
        high -= kHalf;
      } else if (low >= kQuarter && high < kThreeQuarters) {
        ++pending;
        low -= kQuarter;
        high -= kQuarter;
      } else {
        break;
      }
      low <<= 1;
      high = (high << 1) | 1;
    }
    model.update(sym);
  }
  ++pending;
  emit(low >= kQuarter);

  Encoded e;
  e.payload.reserve(out.bytes().size() + 1);
  e.payload.push_back(kMethodArithmetic);
  e.payload.insert(e.payload.end(), out.bytes().begin(), out.bytes().end());
  e.payload_bits = 8 + out.bits();
  return e;
}

/// Arithmetic coding, or a stored copy when that is not larger.
inline Encoded compress(std::span<const std::uint8_t> input) {
  auto e = encode_arithmetic(input);
  if (e.payload.size() < input.size() + 1) return e;
  Encoded stored;
  stored.payload.reserve(input.size() + 1);
  stored.payload.push_back(kMethodStored);
  stored.payload.insert(stored.payload.end(), input.begin(), input.end());
  stored.payload_bits = 8 * stored.payload.size();
  return stored;
}

/// Decodes exactly `count` bytes from a payload produced by compress().
inline std::vector<std::uint8_t> decompress(std::span<const std::uint8_t> payload, std::size_t count) {
  using namespace detail;
  if (payload.empty()) fail(ErrorCode::CorruptStream, "empty payload");
  const auto body = payload.subspan(1);
  if (payload[0] == kMethodStored) {
    if (body.size() != count)
      fail(ErrorCode::CorruptStream, "stored payload has " + std::to_string(body.size()) + " bytes, expected " +
                                         std::to_string(count));
    return {body.begin(), body.end()};
  }
  if (payload[0] != kMethodArithmetic) fail(ErrorCode::CorruptStream, "unknown payload method");

  AdaptiveModel model;
  BitSource in(body);
  std::uint64_t low = 0, high = kTop, value = 0;
  for (int i = 0; i < 32; ++i) value = (value << 1) | in.get();

  std::vector<std::uint8_t> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const std::uint64_t range = high - low + 1;
    const std::uint64_t total = model.total();
    const std::uint64_t target = ((value - low + 1) * total - 1) / range;
    if (target >= total) fail(ErrorCode::CorruptStream, "arithmetic decoder left its interval");
    const auto sym = model.find(static_cast<std::uint32_t>(target));
    const std::uint64_t lo = model.cum_low(sym);
    const std::uint64_t hi = lo + model.freq(sym);
    high = low + range * hi / total - 1;
    low = low + range * lo / total;
    for (;;) {
      if (high < kHalf) {
        // nothing to subtract
      } else if (low >= kHalf) {
        low -= kHalf;
        high -= kHalf;
        value -= kHalf;
      } else if (low >= kQuarter && high < kThreeQuarters) {
        low -= kQuarter;
        high -= kQuarter;
        value -= kQuarter;
      } else {
        break;
      }
      low <<= 1;
      high = (high << 1) | 1;
      value = (value << 1) | in.get();
    }
    model.update(sym);
    out.push_back(static_cast<std::uint8_t>(sym));
  }
  if (in.consumed() > 8 * body.size() + 64) fail(ErrorCode::CorruptStream, "arithmetic payload too short");
  return out;
}

}  // namespace vcm::arith
