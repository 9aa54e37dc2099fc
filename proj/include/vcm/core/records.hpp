#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "vcm/core/types.hpp"
#include "vcm/util/binary_io.hpp"

// JSON-lines record schemas, one object per line:
//   detection     {"image_id", "class_id", "bbox": [x0, y0, x1, y1], "score"}
//   ground truth  {"image_id", "class_id", "bbox"}
//   track         {"frame", "track_id", "class_id", "bbox", "score"}
// Blank lines are skipped. Coordinates are source-image pixels and are never rescaled here.

namespace vcm {

namespace detail {

inline BoundingBox parse_bbox(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw std::invalid_argument("bbox must be an array of 4 numbers");
  for (const auto& v : j)
    if (!v.is_number()) throw std::invalid_argument("bbox must be an array of 4 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

template <class T>
T require(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw std::invalid_argument(std::string("missing field \"") + key + "\"");
  if constexpr (std::is_integral_v<T>) {
    if (!it->is_number_integer()) throw std::invalid_argument(std::string("field \"") + key + "\" must be an integer");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!it->is_number()) throw std::invalid_argument(std::string("field \"") + key + "\" must be a number");
  } else {
    if (!it->is_string()) throw std::invalid_argument(std::string("field \"") + key + "\" must be a string");
  }
  return it->get<T>();
}

template <class Record, class ParseFn>
std::vector<Record> load_jsonl(std::string_view text, const std::string& source, ParseFn parse) {
  std::vector<Record> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    Record rec;
    try {
      auto j = nlohmann::json::parse(line);
      if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
      rec = parse(j);
    } catch (const std::exception& e) {
      fail(ErrorCode::ParseError, source + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (auto problem = invariant_problem(rec); !problem.empty())
      fail(ErrorCode::InvariantViolation, source + ":" + std::to_string(line_no) + ": record " +
                                              std::to_string(out.size()) + ": " + problem);
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace detail

inline std::vector<Detection> parse_detections(std::string_view text, const std::string& source = "<detections>") {
  return detail::load_jsonl<Detection>(text, source, [](const nlohmann::json& j) {
    return Detection{detail::require<std::string>(j, "image_id"), detail::require<int>(j, "class_id"),
                     detail::parse_bbox(j.at("bbox")), detail::require<double>(j, "score")};
  });
}

inline std::vector<GroundTruthBox> parse_ground_truth(std::string_view text,
                                                      const std::string& source = "<ground truth>") {
  return detail::load_jsonl<GroundTruthBox>(text, source, [](const nlohmann::json& j) {
    return GroundTruthBox{detail::require<std::string>(j, "image_id"), detail::require<int>(j, "class_id"),
                          detail::parse_bbox(j.at("bbox"))};
  });
}

inline std::vector<TrackedBox> parse_tracks(std::string_view text, const std::string& source = "<tracks>") {
  return detail::load_jsonl<TrackedBox>(text, source, [](const nlohmann::json& j) {
    TrackedBox t;
    t.frame_index = detail::require<int>(j, "frame");
    t.track_id = detail::require<long long>(j, "track_id");
    t.class_id = detail::require<int>(j, "class_id");
    t.box = detail::parse_bbox(j.at("bbox"));
    t.score = j.contains("score") ? detail::require<double>(j, "score") : 1.0;
    return t;
  });
}

inline std::vector<Detection> load_detections(const std::filesystem::path& path) {
  return parse_detections(io::read_text(path), path.string());
}

inline std::vector<GroundTruthBox> load_ground_truth(const std::filesystem::path& path) {
  return parse_ground_truth(io::read_text(path), path.string());
}

inline std::vector<TrackedBox> load_tracks(const std::filesystem::path& path) {
  return parse_tracks(io::read_text(path), path.string());
}

inline nlohmann::json bbox_json(const BoundingBox& b) { return nlohmann::json::array({b.x_min, b.y_min, b.x_max, b.y_max}); }

inline std::string to_jsonl(const std::vector<Detection>& dets) {
  std::string out;
  for (const auto& d : dets) {
    nlohmann::json j = {{"image_id", d.image_id}, {"class_id", d.class_id}, {"bbox", bbox_json(d.box)}, {"score", d.score}};
    out += j.dump() + "\n";
  }
  return out;
}

inline std::string to_jsonl(const std::vector<GroundTruthBox>& gts) {
  std::string out;
  for (const auto& g : gts) {
    nlohmann::json j = {{"image_id", g.image_id}, {"class_id", g.class_id}, {"bbox", bbox_json(g.box)}};
    out += j.dump() + "\n";
  }
  return out;
}

inline std::string to_jsonl(const std::vector<TrackedBox>& tracks) {
  std::string out;
  for (const auto& t : tracks) {
    nlohmann::json j = {{"frame", t.frame_index}, {"track_id", t.track_id}, {"class_id", t.class_id},
                        {"bbox", bbox_json(t.box)}, {"score", t.score}};
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace vcm
