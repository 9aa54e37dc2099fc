#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vcm/core/types.hpp"
#include "vcm/util/binary_io.hpp"
#include "vcm/util/format.hpp"

namespace vcm {

/// Sorts by ascending rate; points sharing a rate collapse to the best quality.
inline RDCurve build_curve(std::vector<RDPoint> points, std::string label, std::optional<int> scale = std::nullopt,
                           std::string quality_unit = {}) {
  if (points.empty()) fail(ErrorCode::EmptyCurve, "curve '" + label + "' has no points");
  for (const auto& p : points) {
    if (!(p.rate > 0.0) || !std::isfinite(p.rate))
      fail(ErrorCode::InvariantViolation, "curve '" + label + "': rate must be finite and > 0");
    if (!std::isfinite(p.quality)) fail(ErrorCode::InvariantViolation, "curve '" + label + "': quality must be finite");
  }
  if (scale && !is_valid_scale(*scale))
    fail(ErrorCode::InvariantViolation, "scale must be one of 25, 50, 75, 100");
  std::sort(points.begin(), points.end(), [](const RDPoint& a, const RDPoint& b) {
    return a.rate < b.rate || (a.rate == b.rate && a.quality > b.quality);
  });
  points.erase(std::unique(points.begin(), points.end(),
                           [](const RDPoint& a, const RDPoint& b) { return a.rate == b.rate; }),
               points.end());
  return RDCurve{std::move(label), scale, std::move(points), std::move(quality_unit)};
}

namespace detail {

inline std::string common_unit(std::span<const RDCurve> curves) {
  std::string unit;
  for (const auto& c : curves) {
    if (c.quality_unit.empty()) continue;
    if (unit.empty()) {
      unit = c.quality_unit;
    } else if (unit != c.quality_unit) {
      fail(ErrorCode::UnitMismatch, "quality units '" + unit + "' and '" + c.quality_unit + "' cannot be mixed");
    }
  }
  return unit;
}

}  // namespace detail

/// Non-dominated envelope of all points pooled from the curves. A point is
/// dominated when another point has rate <= and quality >= with one strict.
/// The result may zigzag relative to the inputs.
inline RDCurve pareto_front(std::span<const RDCurve> curves, std::string label = "pareto") {
  if (curves.empty()) fail(ErrorCode::EmptyCurve, "pareto_front needs at least one curve");
  auto unit = detail::common_unit(curves);
  std::vector<RDPoint> pool;
  for (const auto& c : curves) pool.insert(pool.end(), c.points.begin(), c.points.end());
  if (pool.empty()) fail(ErrorCode::EmptyCurve, "pareto_front inputs have no points");

  std::sort(pool.begin(), pool.end(), [](const RDPoint& a, const RDPoint& b) {
    return a.rate < b.rate || (a.rate == b.rate && a.quality > b.quality);
  });
  std::vector<RDPoint> front;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : pool) {
    if (p.quality > best) {
      front.push_back(p);
      best = p.quality;
    }
  }
  return build_curve(std::move(front), std::move(label), std::nullopt, std::move(unit));
}

inline RDCurve pareto_front(const RDCurve& curve) {
  return pareto_front(std::span<const RDCurve>(&curve, 1), curve.label);
}

inline RDCurve apply_cutoff(const RDCurve& curve, double min_quality) {
  RDCurve out = curve;
  std::erase_if(out.points, [&](const RDPoint& p) { return p.quality < min_quality; });
  if (out.points.empty())
    fail(ErrorCode::EmptyAfterCutoff, "no point of '" + curve.label + "' reaches quality " + fmt::num(min_quality));
  return out;
}

// CSV columns: rate,quality,label,scale[,quality_unit]. Scale is empty or NONE
// when the curve is not tied to an input scale.
inline std::string curves_to_csv(std::span<const RDCurve> curves) {
  bool with_unit = false;
  for (const auto& c : curves) with_unit |= !c.quality_unit.empty();
  std::string out = with_unit ? "rate,quality,label,scale,quality_unit\n" : "rate,quality,label,scale\n";
  for (const auto& c : curves) {
    if (c.label.find_first_of(",\n\"") != std::string::npos)
      fail(ErrorCode::InvariantViolation, "curve label may not contain commas, quotes or newlines");
    for (const auto& p : c.points) {
      out += fmt::num(p.rate) + "," + fmt::num(p.quality) + "," + c.label + "," +
             (c.scale_percent ? std::to_string(*c.scale_percent) : std::string("NONE"));
      if (with_unit) out += "," + c.quality_unit;
      out += "\n";
    }
  }
  return out;
}

/// Groups rows by (label, scale) in order of first appearance.
inline std::vector<RDCurve> curves_from_csv(std::string_view text, const std::string& source = "<csv>") {
  struct Group {
    std::string label;
    std::optional<int> scale;
    std::string unit;
    std::vector<RDPoint> points;
  };
  std::vector<Group> groups;
  std::size_t line_no = 0;
  bool saw_header = false;
  for (auto raw : fmt::split(text, '\n')) {
    ++line_no;
    auto line = fmt::trim(raw);
    if (line.empty()) continue;
    auto cols = fmt::split(line, ',');
    auto where = [&] { return source + ":" + std::to_string(line_no); };
    if (!saw_header && !fmt::parse_double(cols[0])) {
      saw_header = true;
      if (cols.size() < 2 || fmt::trim(cols[0]) != "rate" || fmt::trim(cols[1]) != "quality")
        fail(ErrorCode::ParseError, where() + ": header must start with rate,quality");
      continue;
    }
    saw_header = true;
    if (cols.size() < 2 || cols.size() > 5) fail(ErrorCode::ParseError, where() + ": expected 2 to 5 columns");
    auto rate = fmt::parse_double(cols[0]);
    auto quality = fmt::parse_double(cols[1]);
    if (!rate || !quality) fail(ErrorCode::ParseError, where() + ": rate and quality must be numbers");
    std::string label = cols.size() > 2 ? std::string(fmt::trim(cols[2])) : std::string("curve");
    std::optional<int> scale;
    if (cols.size() > 3) {
      auto s = fmt::trim(cols[3]);
      if (!s.empty() && s != "NONE") {
        auto v = fmt::parse_int(s);
        if (!v) fail(ErrorCode::ParseError, where() + ": scale must be an integer or NONE");
        scale = static_cast<int>(*v);
      }
    }
    std::string unit = cols.size() > 4 ? std::string(fmt::trim(cols[4])) : std::string();
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return g.label == label && g.scale == scale; });
    if (it == groups.end()) {
      groups.push_back({label, scale, unit, {}});
      it = std::prev(groups.end());
    } else if (it->unit != unit) {
      fail(ErrorCode::UnitMismatch, where() + ": quality unit changes within curve '" + label + "'");
    }
    it->points.push_back({*rate, *quality});
  }
  std::vector<RDCurve> curves;
  for (auto& g : groups) {
    try {
      curves.push_back(build_curve(std::move(g.points), g.label, g.scale, g.unit));
    } catch (const Error& e) {
      throw e.with_context(source);
    }
  }
  return curves;
}

inline std::vector<RDCurve> read_curves_csv(const std::filesystem::path& path) {
  return curves_from_csv(io::read_text(path), path.string());
}

}  // namespace vcm
