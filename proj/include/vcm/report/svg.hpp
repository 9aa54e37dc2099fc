#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>

#include "vcm/core/types.hpp"
#include "vcm/util/format.hpp"

namespace vcm {

struct PlotOptions {
  std::string title = "Rate-distortion";
  std::string x_label = "rate";
  std::string y_label = "quality";
  int width = 640;
  int height = 420;
};

namespace detail {

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Comments may not contain "--".
inline std::string comment_safe(std::string_view s) {
  std::string out(s);
  for (std::size_t p; (p = out.find("--")) != std::string::npos;) out.replace(p, 2, "- ");
  return out;
}

}  // namespace detail

/// Line plot, rate on x and quality on y. Each curve is a polyline; the front
/// (if given) is drawn last and dashed. Every point is also written as a
/// comment line so that plots can be compared as text.
inline std::string render_rd_svg(std::span<const RDCurve> curves, const RDCurve* front, const PlotOptions& opt = {}) {
  static constexpr std::array<const char*, 6> kColors{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
  const double ml = 60, mr = 20, mt = 30, mb = 45;
  const double pw = opt.width - ml - mr, ph = opt.height - mt - mb;

  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  auto extend = [&](const RDCurve& c) {
    for (const auto& p : c.points) {
      x0 = std::min(x0, p.rate);
      x1 = std::max(x1, p.rate);
      y0 = std::min(y0, p.quality);
      y1 = std::max(y1, p.quality);
    }
  };
  for (const auto& c : curves) extend(c);
  if (front) extend(*front);
  if (!(x1 >= x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  auto sx = [&](double v) { return fmt::fixed(ml + (v - x0) / (x1 - x0) * pw, 2); };
  auto sy = [&](double v) { return fmt::fixed(mt + ph - (v - y0) / (y1 - y0) * ph, 2); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opt.width) + "\" height=\"" +
       std::to_string(opt.height) + "\" viewBox=\"0 0 " + std::to_string(opt.width) + " " + std::to_string(opt.height) +
       "\">\n";
  s += "<!-- vcm-rd-plot v1 -->\n";
  auto data_comments = [&](const RDCurve& c) {
    for (const auto& p : c.points)
      s += "<!-- data curve=\"" + detail::comment_safe(c.label) + "\" rate=\"" + fmt::num(p.rate) + "\" quality=\"" +
           fmt::num(p.quality) + "\" -->\n";
  };
  for (const auto& c : curves) data_comments(c);
  if (front) data_comments(*front);

  s += "<rect x=\"0\" y=\"0\" width=\"" + std::to_string(opt.width) + "\" height=\"" + std::to_string(opt.height) +
       "\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt::fixed(ml + pw / 2, 2) + "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">" +
       detail::xml_escape(opt.title) + "</text>\n";
  s += "<g stroke=\"black\" fill=\"none\">\n";
  s += "<line x1=\"" + fmt::fixed(ml, 2) + "\" y1=\"" + fmt::fixed(mt + ph, 2) + "\" x2=\"" + fmt::fixed(ml + pw, 2) +
       "\" y2=\"" + fmt::fixed(mt + ph, 2) + "\"/>\n";
  s += "<line x1=\"" + fmt::fixed(ml, 2) + "\" y1=\"" + fmt::fixed(mt, 2) + "\" x2=\"" + fmt::fixed(ml, 2) + "\" y2=\"" +
       fmt::fixed(mt + ph, 2) + "\"/>\n";
  s += "</g>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    s += "<text x=\"" + sx(xv) + "\" y=\"" + fmt::fixed(mt + ph + 16, 2) + "\" text-anchor=\"middle\" font-size=\"10\">" +
         fmt::fixed(xv, 4) + "</text>\n";
    s += "<text x=\"" + fmt::fixed(ml - 6, 2) + "\" y=\"" + sy(yv) + "\" text-anchor=\"end\" font-size=\"10\">" +
         fmt::fixed(yv, 4) + "</text>\n";
  }
  s += "<text x=\"" + fmt::fixed(ml + pw / 2, 2) + "\" y=\"" + std::to_string(opt.height - 8) +
       "\" text-anchor=\"middle\" font-size=\"12\">" + detail::xml_escape(opt.x_label) + "</text>\n";
  s += "<text x=\"14\" y=\"" + fmt::fixed(mt + ph / 2, 2) + "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " +
       fmt::fixed(mt + ph / 2, 2) + ")\">" + detail::xml_escape(opt.y_label) + "</text>\n";

  auto polyline = [&](const RDCurve& c, const char* color, bool dashed, const char* cls) {
    s += "<polyline class=\"" + std::string(cls) + "\" data-label=\"" + detail::xml_escape(c.label) +
         "\" fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + (dashed ? "2.5" : "1.5") + "\"" +
         (dashed ? " stroke-dasharray=\"6 3\"" : "") + " points=\"";
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      if (i) s += ' ';
      s += sx(c.points[i].rate) + "," + sy(c.points[i].quality);
    }
    s += "\"/>\n";
  };
  for (std::size_t i = 0; i < curves.size(); ++i) polyline(curves[i], kColors[i % kColors.size()], false, "curve");
  if (front) polyline(*front, "black", true, "front");

  double ly = mt + 10;
  auto legend = [&](const std::string& label, const char* color) {
    s += "<text x=\"" + fmt::fixed(ml + pw - 4, 2) + "\" y=\"" + fmt::fixed(ly, 2) +
         "\" text-anchor=\"end\" font-size=\"10\" fill=\"" + color + "\">" + detail::xml_escape(label) + "</text>\n";
    ly += 13;
  };
  for (std::size_t i = 0; i < curves.size(); ++i) legend(curves[i].label, kColors[i % kColors.size()]);
  if (front) legend(front->label, "black");
  s += "</svg>\n";
  return s;
}

}  // namespace vcm
