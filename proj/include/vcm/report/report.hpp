#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "vcm/pipeline/experiment.hpp"
#include "vcm/rd/bd.hpp"
#include "vcm/rd/curve.hpp"
#include "vcm/report/svg.hpp"
#include "vcm/util/digest.hpp"
#include "vcm/util/format.hpp"

namespace vcm {

inline constexpr std::string_view kToolName = "vcmbench";
inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;

inline constexpr std::string_view kAggregationNote =
    "rate is the mean over items of each item's bitstream bits divided by its source pixel count (bits/s for "
    "clips); quality is computed once over the pooled predictions of all items";

using ojson = nlohmann::ordered_json;

struct BdRow {
  std::string anchor;
  std::string test;
  std::optional<BdResult> result;
  std::string error;
};

/// Scale curves and the front against the 100% curve. Both sides are reduced
/// to their non-dominated points first, since BD needs quality to increase
/// with rate.
inline std::vector<BdRow> bd_table(const std::vector<RDCurve>& curves, const RDCurve& front) {
  std::vector<BdRow> rows;
  const RDCurve* anchor = nullptr;
  for (const auto& c : curves)
    if (c.scale_percent == 100) anchor = &c;
  if (!anchor) return rows;
  const auto a = pareto_front(*anchor);
  auto add = [&](const RDCurve& test) {
    BdRow row{anchor->label, test.label, std::nullopt, {}};
    try {
      row.result = bd_metrics(a, pareto_front(test));
    } catch (const Error& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  };
  for (const auto& c : curves)
    if (&c != anchor) add(c);
  add(front);
  return rows;
}

inline ojson bd_json(const std::vector<BdRow>& rows) {
  ojson out = ojson::array();
  for (const auto& r : rows) {
    ojson j{{"anchor", r.anchor}, {"test", r.test}};
    if (r.result) {
      j["bd_rate_percent"] = r.result->bd_rate_percent;
      j["bd_quality"] = r.result->bd_quality;
      j["interpolation"] = r.result->cubic ? "pchip" : "linear";
    } else {
      j["error"] = r.error;
    }
    out.push_back(std::move(j));
  }
  return out;
}

inline std::string file_digest(const std::filesystem::path& p) {
  try {
    return digest::sha256_hex(io::read_file(p));
  } catch (const Error&) {
    return "unreadable";
  }
}

/// The evaluation report as an ordered JSON document. Only inputs and
/// results appear in it (no paths outside the manifest, no timestamps), so it
/// is byte-identical for identical inputs.
inline ojson build_report(const ExperimentManifest& m, const ExperimentResult& res, const std::string& manifest_sha256,
                          const WeightConfig& weights = {}) {
  ojson doc;
  doc["schema_version"] = kReportSchemaVersion;
  doc["tool"] = {{"name", kToolName}, {"version", kToolVersion}};

  ojson items = ojson::array();
  for (const auto& it : m.items)
    items.push_back({{"id", it.id},
                     {"raw", it.raw.generic_string()},
                     {"raw_sha256", file_digest(resolve(m, it.raw))},
                     {"ground_truth", it.ground_truth.generic_string()},
                     {"ground_truth_sha256", file_digest(resolve(m, it.ground_truth))}});
  doc["inputs"] = {{"manifest_sha256", manifest_sha256}, {"items", items}};

  ojson cfg;
  cfg["task"] = to_string(m.task);
  cfg["scales"] = m.scales;
  cfg["codec"] = {{"kind", to_string(m.codec.kind)},
                  {"encode", m.codec.encode},
                  {"decode", m.codec.decode},
                  {"qps", m.codec.qps},
                  {"test_codec", m.codec.kind != CodecKind::External}};
  cfg["scaler"] = m.scaler.empty() ? "bilinear" : m.scaler;
  if (m.task == Task::Detection)
    cfg["iou_thresholds"] = m.iou_thresholds;
  else
    cfg["iou_threshold"] = m.iou_threshold;
  cfg["min_quality"] = m.min_quality ? ojson(*m.min_quality) : ojson(nullptr);
  cfg["weights"] = {{"w", weights.w}, {"w_y", weights.w_y}, {"w_cb", weights.w_cb}, {"w_cr", weights.w_cr}};
  doc["config"] = cfg;

  doc["rate_unit"] = res.rate_unit;
  doc["quality_unit"] = m.quality_unit();
  doc["aggregation"] = kAggregationNote;
  if (m.codec.kind == CodecKind::Truncate)
    doc["codec_note"] = "TRUNCATE is a built-in test codec (bit-plane truncation + order-0 arithmetic coding)";

  ojson rd = ojson::array();
  for (int s : m.scales) {
    ojson rows = ojson::array();
    for (const auto& r : res.rows)
      if (r.scale == s) rows.push_back({{"qp", r.qp}, {"bits", r.total_bits}, {"rate", r.rate}, {"quality", r.quality}});
    rd.push_back({{"scale", s}, {"rows", rows}});
  }
  doc["rd"] = rd;

  ojson front = ojson::array();
  for (const auto& e : res.pareto_origin)
    front.push_back({{"rate", e.point.rate}, {"quality", e.point.quality}, {"scale", e.scale}, {"qp", e.qp}});
  doc["pareto"] = front;
  doc["bd"] = bd_json(bd_table(res.curves, res.pareto));

  ojson jobs = ojson::array();
  for (const auto& j : res.jobs)
    jobs.push_back({{"item", j.item_id},
                    {"scale", j.scale},
                    {"qp", j.qp},
                    {"coded_width", j.coded_width},
                    {"coded_height", j.coded_height},
                    {"bits", j.bits},
                    {"rate", j.rate}});
  doc["jobs"] = jobs;
  return doc;
}

inline std::string dump_report(const ojson& report) { return report.dump(2) + "\n"; }

struct ReportTables {
  std::vector<RDCurve> curves;
  RDCurve pareto;
  std::string rate_unit;
  std::string quality_unit;
};

/// Rebuilds the curves held in a report document.
inline ReportTables tables_from_report(const ojson& doc) {
  try {
    if (doc.at("schema_version").get<int>() != kReportSchemaVersion)
      fail(ErrorCode::BadVersion, "report schema_version is not " + std::to_string(kReportSchemaVersion));
    ReportTables t;
    t.rate_unit = doc.at("rate_unit").get<std::string>();
    t.quality_unit = doc.at("quality_unit").get<std::string>();
    for (const auto& block : doc.at("rd")) {
      const int s = block.at("scale").get<int>();
      std::vector<RDPoint> pts;
      for (const auto& r : block.at("rows")) pts.push_back({r.at("rate").get<double>(), r.at("quality").get<double>()});
      t.curves.push_back(build_curve(std::move(pts), "scale_" + std::to_string(s), s, t.quality_unit));
    }
    std::vector<RDPoint> front;
    for (const auto& p : doc.at("pareto")) front.push_back({p.at("rate").get<double>(), p.at("quality").get<double>()});
    t.pareto = build_curve(std::move(front), "pareto", std::nullopt, t.quality_unit);
    return t;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("malformed report: ") + e.what());
  }
}

inline std::string rd_rows_csv(const ojson& doc) {
  std::string out = "scale,qp,bits,rate,quality\n";
  for (const auto& block : doc.at("rd"))
    for (const auto& r : block.at("rows"))
      out += std::to_string(block.at("scale").get<int>()) + "," + std::to_string(r.at("qp").get<int>()) + "," +
             std::to_string(r.at("bits").get<std::uint64_t>()) + "," + fmt::num(r.at("rate").get<double>()) + "," +
             fmt::num(r.at("quality").get<double>()) + "\n";
  return out;
}

inline std::string pareto_csv(const ojson& doc) {
  std::string out = "rate,quality,scale,qp\n";
  for (const auto& p : doc.at("pareto"))
    out += fmt::num(p.at("rate").get<double>()) + "," + fmt::num(p.at("quality").get<double>()) + "," +
           std::to_string(p.at("scale").get<int>()) + "," + std::to_string(p.at("qp").get<int>()) + "\n";
  return out;
}

inline std::string bd_csv(const ojson& doc) {
  std::string out = "anchor,test,bd_rate_percent,bd_quality,interpolation,error\n";
  for (const auto& r : doc.at("bd")) {
    out += r.at("anchor").get<std::string>() + "," + r.at("test").get<std::string>() + ",";
    if (r.contains("error")) {
      std::string msg = r.at("error").get<std::string>();
      for (auto& c : msg)
        if (c == ',' || c == '\n') c = ';';
      out += ",,," + msg + "\n";
    } else {
      out += fmt::num(r.at("bd_rate_percent").get<double>()) + "," + fmt::num(r.at("bd_quality").get<double>()) + "," +
             r.at("interpolation").get<std::string>() + ",\n";
    }
  }
  return out;
}

/// Writes report.json plus the CSV tables and the SVG plot into `dir`.
inline void write_report_files(const ojson& doc, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto t = tables_from_report(doc);
  io::write_text(dir / "report.json", dump_report(doc));
  io::write_text(dir / "rd_points.csv", rd_rows_csv(doc));
  auto all = t.curves;
  all.push_back(t.pareto);
  io::write_text(dir / "curves.csv", curves_to_csv(all));
  io::write_text(dir / "pareto.csv", pareto_csv(doc));
  io::write_text(dir / "bd.csv", bd_csv(doc));
  PlotOptions opt;
  opt.title = "RD curves per scale and Pareto front";
  opt.x_label = t.rate_unit;
  opt.y_label = t.quality_unit;
  io::write_text(dir / "rd.svg", render_rd_svg(t.curves, &t.pareto, opt));
}

}  // namespace vcm
