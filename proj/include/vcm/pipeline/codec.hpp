#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vcm/error.hpp"
#include "vcm/feature/arith_coder.hpp"
#include "vcm/util/binary_io.hpp"
#include "vcm/util/process.hpp"

namespace vcm {

enum class CodecKind { Null, Truncate, External };

inline std::string_view to_string(CodecKind k) noexcept {
  switch (k) {
    case CodecKind::Null: return "NULL";
    case CodecKind::Truncate: return "TRUNCATE";
    case CodecKind::External: return "EXTERNAL";
  }
  return "?";
}

inline CodecKind parse_codec_kind(std::string_view s) {
  if (s == "NULL" || s == "null") return CodecKind::Null;
  if (s == "TRUNCATE" || s == "truncate") return CodecKind::Truncate;
  if (s == "EXTERNAL" || s == "external") return CodecKind::External;
  fail(ErrorCode::ConfigError, "unknown codec kind '" + std::string(s) + "'");
}

inline std::vector<int> default_qps() { return {22, 27, 32, 37, 42, 47}; }

struct CodecSpec {
  CodecKind kind = CodecKind::Null;
  std::string encode;  // argv template, placeholders {input} {output} {qp} {width} {height}
  std::string decode;
  std::vector<int> qps = default_qps();
};

inline void validate(const CodecSpec& spec) {
  if (spec.qps.empty()) fail(ErrorCode::ConfigError, "codec qp list is empty");
  if (spec.kind == CodecKind::External && (spec.encode.empty() || spec.decode.empty()))
    fail(ErrorCode::ConfigError, "EXTERNAL codec needs both encode and decode templates");
  if (spec.kind == CodecKind::Truncate)
    for (int qp : spec.qps)
      if (qp < 0) fail(ErrorCode::ConfigError, "TRUNCATE qp must be >= 0");
}

using Placeholders = std::map<std::string, std::string>;

/// Splits on whitespace, then substitutes {name} inside each token. Unknown
/// placeholders are left as written.
inline std::vector<std::string> expand_template(const std::string& tmpl, const Placeholders& values) {
  std::vector<std::string> argv;
  std::istringstream in(tmpl);
  for (std::string tok; in >> tok;) {
    std::string out;
    for (std::size_t i = 0; i < tok.size();) {
      if (tok[i] == '{') {
        const auto close = tok.find('}', i);
        if (close != std::string::npos) {
          const auto it = values.find(tok.substr(i + 1, close - i - 1));
          if (it != values.end()) {
            out += it->second;
            i = close + 1;
            continue;
          }
        }
      }
      out += tok[i++];
    }
    argv.push_back(std::move(out));
  }
  return argv;
}

struct CodecResult {
  std::filesystem::path output;
  std::uint64_t bitstream_bits = 0;
};

namespace detail {

inline void run_checked(const std::vector<std::string>& argv, const std::filesystem::path& scratch, const char* stage) {
  const auto res = proc::run(argv, scratch / (std::string(stage) + ".stderr"));
  if (res.exit_code != 0) {
    std::string msg = std::string(stage) + " command `" + proc::join_argv(argv) + "` exited with status " +
                      std::to_string(res.exit_code);
    if (!res.stderr_text.empty()) msg += ": " + res.stderr_text;
    while (!msg.empty() && (msg.back() == '\n' || msg.back() == '\r')) msg.pop_back();
    fail(ErrorCode::CommandFailed, msg);
  }
}

}  // namespace detail

/// Zeroes the low (qp mod 8) bits of every sample.
inline std::vector<std::uint8_t> truncate_samples(std::span<const std::uint8_t> in, int qp) {
  const auto mask = static_cast<std::uint8_t>(0xFFu << (qp % 8));
  std::vector<std::uint8_t> out(in.begin(), in.end());
  for (auto& s : out) s &= mask;
  return out;
}

/// Encodes and decodes `input` (planar 8-bit samples) at `qp`. The
/// reconstruction and any bitstream are written under `scratch`, which the
/// caller owns exclusively.
inline CodecResult run_codec(const CodecSpec& spec, const std::filesystem::path& input, int qp, std::uint32_t width,
                             std::uint32_t height, const std::filesystem::path& scratch) {
  validate(spec);
  std::filesystem::create_directories(scratch);
  CodecResult r;
  r.output = scratch / "recon.yuv";
  switch (spec.kind) {
    case CodecKind::Null: {
      const auto bytes = io::read_file(input);
      io::write_file(r.output, bytes);
      r.bitstream_bits = 8ull * bytes.size();
      return r;
    }
    case CodecKind::Truncate: {
      const auto bytes = io::read_file(input);
      const auto kept = truncate_samples(bytes, qp);
      const auto coded = arith::compress(kept);
      io::write_file(scratch / "stream.bin", coded.payload);
      io::write_file(r.output, arith::decompress(coded.payload, kept.size()));
      r.bitstream_bits = coded.payload_bits;
      return r;
    }
    case CodecKind::External: {
      const auto in_size = std::filesystem::file_size(input);
      const auto stream = scratch / "stream.bin";
      Placeholders ph{{"qp", std::to_string(qp)}, {"width", std::to_string(width)}, {"height", std::to_string(height)}};
      ph["input"] = input.string();
      ph["output"] = stream.string();
      detail::run_checked(expand_template(spec.encode, ph), scratch, "encode");
      if (!std::filesystem::exists(stream)) fail(ErrorCode::OutputMissing, "encoder produced no " + stream.string());
      ph["input"] = stream.string();
      ph["output"] = r.output.string();
      detail::run_checked(expand_template(spec.decode, ph), scratch, "decode");
      if (!std::filesystem::exists(r.output)) fail(ErrorCode::OutputMissing, "decoder produced no " + r.output.string());
      const auto out_size = std::filesystem::file_size(r.output);
      if (out_size != in_size)
        fail(ErrorCode::DimChanged, "decoded output has " + std::to_string(out_size) + " bytes, input had " +
                                        std::to_string(in_size));
      r.bitstream_bits = 8ull * std::filesystem::file_size(stream);
      return r;
    }
  }
  fail(ErrorCode::ConfigError, "unknown codec kind");
}

}  // namespace vcm
