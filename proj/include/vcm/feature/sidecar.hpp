#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"
#include "vcm/core/types.hpp"
#include "vcm/feature/packing.hpp"
#include "vcm/util/binary_io.hpp"

// Packed frames leave as headerless YUV400 for external encoders. Everything
// needed to unpack them travels in a JSON file next to the frames.

namespace vcm {

inline FrameLayout parse_layout(std::string_view s) {
  if (s == "spatial") return FrameLayout::SpatialTiled;
  if (s == "multiscale") return FrameLayout::Multiscale;
  if (s == "temporal") return FrameLayout::Temporal;
  fail(ErrorCode::BadParams, "layout must be spatial, multiscale or temporal, got '" + std::string(s) + "'");
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& frames) {
  auto p = frames;
  p += ".json";
  return p;
}

inline nlohmann::ordered_json sidecar_json(const PackedFrameSet& p) {
  nlohmann::ordered_json j;
  j["layout"] = to_string(p.layout);
  j["channels"] = p.dims.channels;
  j["height"] = p.dims.height;
  j["width"] = p.dims.width;
  j["bit_depth"] = p.params.bit_depth;
  j["mean"] = p.params.mean;
  j["stddev"] = p.params.stddev;
  j["z_min"] = p.params.z_min;
  j["z_max"] = p.params.z_max;
  j["z_th"] = p.params.z_th;
  j["permutation"] = p.permutation ? nlohmann::ordered_json(*p.permutation) : nlohmann::ordered_json(nullptr);
  auto frames = nlohmann::ordered_json::array();
  for (const auto& f : p.frames) frames.push_back({f.width, f.height});
  j["frames"] = frames;
  return j;
}

inline void write_packed(const PackedFrameSet& p, const std::filesystem::path& frames_path) {
  io::write_file(frames_path, to_yuv400(p));
  io::write_text(sidecar_path(frames_path), sidecar_json(p).dump(2) + "\n");
}

inline PackedFrameSet read_packed(const std::filesystem::path& frames_path,
                                  std::optional<std::filesystem::path> sidecar = std::nullopt) {
  const auto side = sidecar.value_or(sidecar_path(frames_path));
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text(side));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::ParseError, side.string() + ": " + e.what());
  }
  try {
    TensorDims dims{j.at("channels").get<std::uint32_t>(), j.at("height").get<std::uint32_t>(),
                    j.at("width").get<std::uint32_t>()};
    QuantParams params;
    params.bit_depth = j.at("bit_depth").get<int>();
    params.mean = j.at("mean").get<std::vector<float>>();
    params.stddev = j.at("stddev").get<std::vector<float>>();
    params.z_min = j.at("z_min").get<float>();
    params.z_max = j.at("z_max").get<float>();
    params.z_th = j.at("z_th").get<float>();
    validate(params);
    std::optional<std::vector<std::uint16_t>> perm;
    if (!j.at("permutation").is_null()) perm = j.at("permutation").get<std::vector<std::uint16_t>>();
    return from_yuv400(io::read_file(frames_path), parse_layout(j.at("layout").get<std::string>()), dims,
                       std::move(perm), std::move(params));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, side.string() + ": " + e.what());
  }
}

}  // namespace vcm
