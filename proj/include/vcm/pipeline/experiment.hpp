#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "vcm/core/records.hpp"
#include "vcm/core/types.hpp"
#include "vcm/metrics/detection.hpp"
#include "vcm/metrics/tracking.hpp"
#include "vcm/pipeline/codec.hpp"
#include "vcm/pipeline/image.hpp"
#include "vcm/rd/curve.hpp"
#include "vcm/rd/rate.hpp"

namespace vcm {

enum class Task { Detection, Tracking };

inline std::string_view to_string(Task t) noexcept { return t == Task::Detection ? "detection" : "tracking"; }

enum class PredictionCoords { Source, Scaled };

struct ManifestItem {
  std::string id;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t frames = 1;
  double fps = 30.0;
  std::filesystem::path raw;
  std::filesystem::path ground_truth;
  std::string predictions;  // path template with {qp} {scale} {image_id}; empty when a command is used
  PredictionCoords prediction_coords = PredictionCoords::Source;
};

struct ExperimentManifest {
  int schema_version = 1;
  Task task = Task::Detection;
  std::vector<int> scales{100, 75, 50, 25};
  CodecSpec codec;
  std::string scaler;                 // optional argv template replacing the built-in bilinear scaler
  std::string prediction_command;     // optional argv template producing predictions from a reconstruction
  std::vector<double> iou_thresholds{0.5};
  double iou_threshold = 0.5;         // tracking
  std::optional<double> min_quality;  // cutoff applied to the Pareto front
  std::vector<ManifestItem> items;
  std::filesystem::path base_dir;     // relative paths resolve against this

  std::string quality_unit() const { return task == Task::Detection ? "mAP" : "MOTA"; }
};

namespace detail {

inline std::string substitute(std::string s, const Placeholders& values) {
  for (const auto& [k, v] : values) {
    const std::string key = "{" + k + "}";
    for (std::size_t pos = 0; (pos = s.find(key, pos)) != std::string::npos; pos += v.size()) s.replace(pos, key.size(), v);
  }
  return s;
}

template <class T>
T required(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) fail(ErrorCode::ConfigError, where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorCode::ConfigError, where + ": field '" + key + "' has the wrong type");
  }
}

template <class T>
T optional_field(const nlohmann::json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return required<T>(j, key, where);
}

}  // namespace detail

inline std::filesystem::path resolve(const ExperimentManifest& m, const std::filesystem::path& p) {
  return p.is_absolute() ? p : m.base_dir / p;
}

inline std::filesystem::path prediction_path(const ExperimentManifest& m, const ManifestItem& item, int qp, int scale) {
  return resolve(m, detail::substitute(item.predictions, {{"qp", std::to_string(qp)},
                                                          {"scale", std::to_string(scale)},
                                                          {"image_id", item.id}}));
}

inline void validate(const ExperimentManifest& m) {
  if (m.schema_version != 1) fail(ErrorCode::ConfigError, "unsupported manifest schema_version");
  validate(m.codec);
  if (m.scales.empty()) fail(ErrorCode::ConfigError, "no scales listed");
  for (int s : m.scales)
    if (!is_valid_scale(s)) fail(ErrorCode::ConfigError, "scale " + std::to_string(s) + " is not one of 25, 50, 75, 100");
  for (std::size_t i = 0; i < m.scales.size(); ++i)
    for (std::size_t j = i + 1; j < m.scales.size(); ++j)
      if (m.scales[i] == m.scales[j]) fail(ErrorCode::ConfigError, "scale listed twice");
  if (m.task == Task::Detection) {
    if (m.iou_thresholds.empty()) fail(ErrorCode::ConfigError, "iou_thresholds is empty");
    for (double t : m.iou_thresholds)
      if (!(t > 0.0 && t <= 1.0)) fail(ErrorCode::ConfigError, "iou threshold outside (0,1]");
  } else if (!(m.iou_threshold > 0.0 && m.iou_threshold <= 1.0)) {
    fail(ErrorCode::ConfigError, "iou_threshold outside (0,1]");
  }
  if (m.items.empty()) fail(ErrorCode::ConfigError, "manifest lists no items");
  for (std::size_t i = 0; i < m.items.size(); ++i) {
    const auto& it = m.items[i];
    const std::string where = "item '" + it.id + "'";
    if (it.id.empty()) fail(ErrorCode::ConfigError, "item " + std::to_string(i) + " has an empty id");
    for (std::size_t j = 0; j < i; ++j)
      if (m.items[j].id == it.id) fail(ErrorCode::ConfigError, where + " appears twice");
    if (it.width == 0 || it.height == 0) fail(ErrorCode::ConfigError, where + ": width and height must be >= 1");
    if (it.frames == 0) fail(ErrorCode::ConfigError, where + ": frames must be >= 1");
    if (!(it.fps > 0.0)) fail(ErrorCode::ConfigError, where + ": fps must be > 0");
    if (m.prediction_command.empty()) {
      if (it.predictions.empty())
        fail(ErrorCode::ConfigError, where + ": no predictions template and no prediction_command");
      for (int s : m.scales)
        for (int qp : m.codec.qps)
          if (!std::filesystem::exists(prediction_path(m, it, qp, s)))
            fail(ErrorCode::ConfigError, where + ": no predictions for qp " + std::to_string(qp) + ", scale " +
                                             std::to_string(s) + " at " + prediction_path(m, it, qp, s).string());
    }
  }
}

inline ExperimentManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string("manifest: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::ConfigError, "manifest must be a JSON object");
  ExperimentManifest m;
  m.base_dir = base_dir;
  m.schema_version = detail::optional_field<int>(j, "schema_version", 1, "manifest");
  const auto task = detail::optional_field<std::string>(j, "task", "detection", "manifest");
  if (task == "detection")
    m.task = Task::Detection;
  else if (task == "tracking")
    m.task = Task::Tracking;
  else
    fail(ErrorCode::ConfigError, "manifest: task must be 'detection' or 'tracking'");
  m.scales = detail::optional_field<std::vector<int>>(j, "scales", m.scales, "manifest");
  if (!j.contains("codec") || !j["codec"].is_object()) fail(ErrorCode::ConfigError, "manifest: missing codec object");
  const auto& c = j["codec"];
  m.codec.kind = parse_codec_kind(detail::required<std::string>(c, "kind", "codec"));
  m.codec.encode = detail::optional_field<std::string>(c, "encode", "", "codec");
  m.codec.decode = detail::optional_field<std::string>(c, "decode", "", "codec");
  m.codec.qps = detail::optional_field<std::vector<int>>(c, "qps", default_qps(), "codec");
  m.scaler = detail::optional_field<std::string>(j, "scaler", "", "manifest");
  m.prediction_command = detail::optional_field<std::string>(j, "prediction_command", "", "manifest");
  m.iou_thresholds = detail::optional_field<std::vector<double>>(j, "iou_thresholds", m.iou_thresholds, "manifest");
  m.iou_threshold = detail::optional_field<double>(j, "iou_threshold", m.iou_threshold, "manifest");
  if (j.contains("min_quality") && !j["min_quality"].is_null())
    m.min_quality = detail::required<double>(j, "min_quality", "manifest");
  if (!j.contains("items") || !j["items"].is_array()) fail(ErrorCode::ConfigError, "manifest: missing items array");
  for (const auto& ji : j["items"]) {
    ManifestItem it;
    it.id = detail::required<std::string>(ji, "id", "item");
    const std::string where = "item '" + it.id + "'";
    it.width = detail::required<std::uint32_t>(ji, "width", where);
    it.height = detail::required<std::uint32_t>(ji, "height", where);
    it.frames = detail::optional_field<std::uint32_t>(ji, "frames", 1, where);
    it.fps = detail::optional_field<double>(ji, "fps", 30.0, where);
    it.raw = detail::required<std::string>(ji, "raw", where);
    it.ground_truth = detail::required<std::string>(ji, "ground_truth", where);
    it.predictions = detail::optional_field<std::string>(ji, "predictions", "", where);
    const auto coords = detail::optional_field<std::string>(ji, "prediction_coords", "source", where);
    if (coords == "source")
      it.prediction_coords = PredictionCoords::Source;
    else if (coords == "scaled")
      it.prediction_coords = PredictionCoords::Scaled;
    else
      fail(ErrorCode::ConfigError, where + ": prediction_coords must be 'source' or 'scaled'");
    m.items.push_back(std::move(it));
  }
  validate(m);
  return m;
}

inline ExperimentManifest load_manifest(const std::filesystem::path& path) {
  try {
    return parse_manifest(io::read_text(path), path.parent_path());
  } catch (const Error& e) {
    throw e.with_context(path.string());
  }
}

// ---- results ---------------------------------------------------------------

/// Outcome of one (item, scale, qp) job.
struct JobRecord {
  std::string item_id;
  int scale = 100;
  int qp = 0;
  std::uint32_t coded_width = 0;
  std::uint32_t coded_height = 0;
  std::uint64_t bits = 0;
  double rate = 0.0;  // bpp for still images, bits/s for clips
};

/// Aggregate of one (scale, qp) over every item.
struct RdRow {
  int scale = 100;
  int qp = 0;
  std::uint64_t total_bits = 0;
  double rate = 0.0;     // mean over items
  double quality = 0.0;  // over the pooled predictions
};

struct ParetoEntry {
  RDPoint point;
  int scale = 100;
  int qp = 0;
};

struct ExperimentResult {
  std::vector<JobRecord> jobs;
  std::vector<RdRow> rows;        // scale-major in manifest order, then qp in manifest order
  std::vector<RDCurve> curves;    // one per scale
  RDCurve pareto;                 // after the optional min_quality cutoff
  std::vector<ParetoEntry> pareto_origin;
  std::string rate_unit;
};

struct ExperimentOptions {
  unsigned jobs = 1;
  std::filesystem::path scratch_root;  // per-job directories go below this
  std::optional<std::filesystem::path> partial_results;  // written when a job fails
  bool keep_scratch = false;
};

namespace detail {

struct JobOutput {
  JobRecord record;
  std::vector<Detection> detections;
  std::vector<TrackedBox> tracks;
};

struct LoadedItem {
  std::vector<RawImage> frames;
  std::vector<GroundTruthBox> gt_boxes;
  std::vector<TrackedBox> gt_tracks;
};

// Image ids are namespaced per item so that pooled evaluation never mixes items.
inline std::string pooled_id(const ManifestItem& item, const std::string& image_id) { return item.id + "/" + image_id; }

inline RawImage scale_frame(const ExperimentManifest& m, const RawImage& img, int scale, const std::filesystem::path& dir,
                            std::uint32_t w, std::uint32_t h, const char* tag) {
  if (m.scaler.empty()) return resize_image(img, w, h);
  const auto in = dir / (std::string(tag) + "_in.yuv");
  const auto out = dir / (std::string(tag) + "_out.yuv");
  write_yuv420(in, std::span<const RawImage>(&img, 1));
  Placeholders ph{{"input", in.string()},
                  {"output", out.string()},
                  {"width", std::to_string(w)},
                  {"height", std::to_string(h)},
                  {"src_width", std::to_string(img.width)},
                  {"src_height", std::to_string(img.height)},
                  {"scale", std::to_string(scale)}};
  run_checked(expand_template(m.scaler, ph), dir, tag);
  if (!std::filesystem::exists(out)) fail(ErrorCode::OutputMissing, "scaler produced no " + out.string());
  auto frames = decode_yuv420(io::read_file(out), w, h);
  if (frames.size() != 1) fail(ErrorCode::DimChanged, "scaler output is not one " + std::to_string(w) + "x" + std::to_string(h) + " frame");
  return std::move(frames.front());
}

inline JobOutput run_job(const ExperimentManifest& m, const ManifestItem& item, const LoadedItem& loaded, int scale,
                         int qp, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  // Encoder-side picture: padded to even dims at 100%, resampled otherwise.
  std::vector<RawImage> coded_in;
  PadRecord pad;
  const std::uint32_t sw = scale == 100 ? item.width : scaled_extent(item.width, scale);
  const std::uint32_t sh = scale == 100 ? item.height : scaled_extent(item.height, scale);
  for (const auto& f : loaded.frames) {
    if (scale == 100) {
      auto [padded, rec] = pad_to_even(f);
      pad = rec;
      coded_in.push_back(std::move(padded));
    } else {
      coded_in.push_back(scale_frame(m, f, scale, dir, sw, sh, "downscale"));
    }
  }
  const std::uint32_t cw = coded_in.front().width, ch = coded_in.front().height;
  const auto input = dir / "input.yuv";
  write_yuv420(input, coded_in);

  const auto coded = run_codec(m.codec, input, qp, cw, ch, dir / "codec");

  // Back to source resolution.
  auto recon = decode_yuv420(io::read_file(coded.output), cw, ch);
  if (recon.size() != loaded.frames.size()) fail(ErrorCode::DimChanged, "codec changed the frame count");
  for (auto& f : recon) {
    if (scale == 100)
      f = crop_pad(f, pad);
    else
      f = scale_frame(m, f, scale, dir, item.width, item.height, "upscale");
  }

  JobOutput out;
  out.record = JobRecord{item.id, scale, qp, cw, ch, coded.bitstream_bits, 0.0};
  if (m.task == Task::Detection && item.frames == 1)
    out.record.rate = bpp(coded.bitstream_bits, item.width, item.height);
  else
    out.record.rate = bitrate(coded.bitstream_bits, item.frames, item.fps);

  std::filesystem::path pred_file;
  double sx = 1.0, sy = 1.0;
  if (!m.prediction_command.empty()) {
    const auto recon_file = dir / "recon_source.yuv";
    write_yuv420(recon_file, recon);
    pred_file = dir / "predictions.jsonl";
    Placeholders ph{{"input", recon_file.string()},        {"output", pred_file.string()},
                    {"width", std::to_string(item.width)}, {"height", std::to_string(item.height)},
                    {"frames", std::to_string(item.frames)}, {"image_id", item.id},
                    {"qp", std::to_string(qp)},            {"scale", std::to_string(scale)}};
    run_checked(expand_template(m.prediction_command, ph), dir, "predict");
    if (!std::filesystem::exists(pred_file))
      fail(ErrorCode::OutputMissing, "prediction command produced no " + pred_file.string());
  } else {
    pred_file = prediction_path(m, item, qp, scale);
    if (item.prediction_coords == PredictionCoords::Scaled) {
      sx = static_cast<double>(item.width) / sw;
      sy = static_cast<double>(item.height) / sh;
    }
  }

  if (m.task == Task::Detection) {
    out.detections = load_detections(pred_file);
    for (auto& d : out.detections) {
      d.image_id = pooled_id(item, d.image_id);
      d.box = d.box.scaled(sx, sy);
    }
  } else {
    out.tracks = load_tracks(pred_file);
    for (auto& t : out.tracks) t.box = t.box.scaled(sx, sy);
  }
  return out;
}

}  // namespace detail

inline nlohmann::json to_json(const JobRecord& r) {
  return {{"item", r.item_id}, {"scale", r.scale},        {"qp", r.qp},    {"coded_width", r.coded_width},
          {"coded_height", r.coded_height}, {"bits", r.bits}, {"rate", r.rate}};
}

/// Runs every (item, scale, qp) job on a bounded worker pool and reduces the
/// results in manifest order, so output never depends on the worker count.
inline ExperimentResult run_experiment(const ExperimentManifest& m, const ExperimentOptions& opt) {
  validate(m);
  namespace fs = std::filesystem;

  std::vector<detail::LoadedItem> loaded(m.items.size());
  for (std::size_t i = 0; i < m.items.size(); ++i) {
    const auto& it = m.items[i];
    try {
      loaded[i].frames = read_yuv420(resolve(m, it.raw), it.width, it.height);
      if (loaded[i].frames.size() != it.frames)
        fail(ErrorCode::SizeMismatch, "raw file holds " + std::to_string(loaded[i].frames.size()) + " frames, manifest says " +
                                          std::to_string(it.frames));
      if (m.task == Task::Detection) {
        loaded[i].gt_boxes = load_ground_truth(resolve(m, it.ground_truth));
        for (auto& g : loaded[i].gt_boxes) g.image_id = detail::pooled_id(it, g.image_id);
      } else {
        loaded[i].gt_tracks = load_tracks(resolve(m, it.ground_truth));
      }
    } catch (const Error& e) {
      throw e.with_context("item '" + it.id + "'");
    }
  }

  struct JobKey {
    std::size_t item;
    int scale, qp;
  };
  std::vector<JobKey> keys;
  for (int s : m.scales)
    for (int qp : m.codec.qps)
      for (std::size_t i = 0; i < m.items.size(); ++i) keys.push_back({i, s, qp});

  std::vector<std::optional<detail::JobOutput>> outputs(keys.size());
  std::vector<std::optional<Error>> errors(keys.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= keys.size() || stop.load()) return;
      const auto& key = keys[k];
      const auto& item = m.items[key.item];
      const auto dir = opt.scratch_root / ("job_" + std::to_string(k));
      try {
        outputs[k] = detail::run_job(m, item, loaded[key.item], key.scale, key.qp, dir);
        if (!opt.keep_scratch) fs::remove_all(dir);
      } catch (const Error& e) {
        errors[k] = e.with_context("item '" + item.id + "', qp " + std::to_string(key.qp) + ", scale " +
                                   std::to_string(key.scale));
        stop = true;
      } catch (const std::exception& e) {
        errors[k] = Error(ErrorCode::IoFailure, std::string(e.what()))
                        .with_context("item '" + item.id + "', qp " + std::to_string(key.qp) + ", scale " +
                                      std::to_string(key.scale));
        stop = true;
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(keys.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  }

  for (std::size_t k = 0; k < keys.size(); ++k) {
    if (!errors[k]) continue;
    if (opt.partial_results) {
      nlohmann::json done = nlohmann::json::array();
      for (const auto& o : outputs)
        if (o) done.push_back(to_json(o->record));
      nlohmann::json doc{{"status", "failed"}, {"error", errors[k]->what()}, {"completed_jobs", done}};
      io::write_text(*opt.partial_results, doc.dump(2) + "\n");
    }
    throw *errors[k];
  }

  ExperimentResult res;
  res.rate_unit = (m.task == Task::Detection && std::all_of(m.items.begin(), m.items.end(),
                                                            [](const ManifestItem& it) { return it.frames == 1; }))
                      ? "bpp"
                      : "bps";
  const auto unit = m.quality_unit();
  std::size_t k = 0;
  for (int s : m.scales) {
    std::vector<RDPoint> pts;
    for (int qp : m.codec.qps) {
      RdRow row{s, qp, 0, 0.0, 0.0};
      std::vector<Detection> dets;
      std::vector<GroundTruthBox> gts;
      MotaResult mot;
      for (std::size_t i = 0; i < m.items.size(); ++i, ++k) {
        auto& o = *outputs[k];
        res.jobs.push_back(o.record);
        row.total_bits += o.record.bits;
        row.rate += o.record.rate;
        if (m.task == Task::Detection) {
          dets.insert(dets.end(), o.detections.begin(), o.detections.end());
          gts.insert(gts.end(), loaded[i].gt_boxes.begin(), loaded[i].gt_boxes.end());
        } else {
          mot += mota(o.tracks, loaded[i].gt_tracks, m.iou_threshold);
        }
      }
      row.rate /= static_cast<double>(m.items.size());
      row.quality = m.task == Task::Detection ? mean_average_precision(dets, gts, m.iou_thresholds).map : mot.mota;
      pts.push_back({row.rate, row.quality});
      res.rows.push_back(row);
    }
    res.curves.push_back(build_curve(std::move(pts), "scale_" + std::to_string(s), s, unit));
  }

  res.pareto = pareto_front(res.curves);
  if (m.min_quality) res.pareto = apply_cutoff(res.pareto, *m.min_quality);
  for (const auto& p : res.pareto.points) {
    for (const auto& row : res.rows) {
      if (row.rate == p.rate && row.quality == p.quality) {
        res.pareto_origin.push_back({p, row.scale, row.qp});
        break;
      }
    }
  }
  return res;
}

}  // namespace vcm
