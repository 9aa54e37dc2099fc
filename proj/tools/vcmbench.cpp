// vcmbench: rate/quality evaluation harness for video coding for machines.

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vcm/vcm.hpp"

namespace fs = std::filesystem;
using vcm::ErrorCode;
using vcm::fail;
using ojson = nlohmann::ordered_json;

namespace {

struct Globals {
  unsigned jobs = 1;
  std::string config_path;
  std::string output_dir;
  vcm::Config config;

  fs::path out_dir(const char* fallback = ".") const {
    if (!output_dir.empty()) return output_dir;
    if (auto v = config.get("output_dir")) return *v;
    return fallback;
  }
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-")
    std::cout << text;
  else
    vcm::io::write_text(path, text);
}

vcm::WeightConfig weights_from(const vcm::Config& cfg) {
  vcm::WeightConfig w;
  if (auto v = cfg.number("weights.w")) w.w = *v;
  if (auto v = cfg.number("weights.w_y")) w.w_y = *v;
  if (auto v = cfg.number("weights.w_cb")) w.w_cb = *v;
  if (auto v = cfg.number("weights.w_cr")) w.w_cr = *v;
  validate(w);
  return w;
}

// ---- eval-det / eval-track -------------------------------------------------

struct EvalDetArgs {
  std::string detections, ground_truth, output, format = "json";
  std::vector<double> iou;
  bool coco101 = false;
};

int cmd_eval_det(const Globals& g, const EvalDetArgs& a) {
  auto thresholds = a.iou;
  if (thresholds.empty()) thresholds = g.config.numbers("eval.iou_thresholds").value_or(std::vector<double>{0.5});
  const auto mode = a.coco101 ? vcm::ApInterpolation::Coco101 : vcm::ApInterpolation::AllPoint;
  const auto dets = vcm::load_detections(a.detections);
  const auto gts = vcm::load_ground_truth(a.ground_truth);
  const auto r = vcm::mean_average_precision(dets, gts, thresholds, mode);

  std::string text;
  if (a.format == "csv") {
    text = "class,ap,tp,fp,fn\n";
    for (const auto& [c, ap] : r.per_class_ap) {
      const auto& n = r.per_class_counts.at(c);
      text += std::to_string(c) + "," + vcm::fmt::num(ap) + "," + std::to_string(n.tp) + "," + std::to_string(n.fp) +
              "," + std::to_string(n.fn) + "\n";
    }
    text += "mAP," + vcm::fmt::num(r.map) + ",,,\n";
  } else {
    ojson per = ojson::array();
    for (const auto& [c, ap] : r.per_class_ap) {
      const auto& n = r.per_class_counts.at(c);
      per.push_back({{"class_id", c}, {"ap", ap}, {"tp", n.tp}, {"fp", n.fp}, {"fn", n.fn}});
    }
    ojson j{{"map", r.map},
            {"iou_thresholds", thresholds},
            {"interpolation", a.coco101 ? "coco101" : "all-point"},
            {"per_class", per}};
    text = j.dump(2) + "\n";
  }
  emit(text, a.output);
  return 0;
}

struct EvalTrackArgs {
  std::string predictions, ground_truth, output;
  std::optional<double> iou;
};

int cmd_eval_track(const Globals& g, const EvalTrackArgs& a) {
  const double thr = a.iou.value_or(g.config.number("eval.iou_threshold").value_or(0.5));
  const auto r = vcm::mota(vcm::load_tracks(a.predictions), vcm::load_tracks(a.ground_truth), thr);
  ojson j{{"mota", r.mota}, {"fn", r.fn},           {"fp", r.fp},           {"idsw", r.idsw},
          {"gt", r.gt},     {"matches", r.matches}, {"iou_threshold", thr}};
  emit(j.dump(2) + "\n", a.output);
  return 0;
}

// ---- bdrate / pareto --------------------------------------------------------

vcm::RDCurve pick_curve(const std::string& path, const std::string& label) {
  const auto curves = vcm::read_curves_csv(path);
  if (label.empty()) return curves.front();
  for (const auto& c : curves)
    if (c.label == label) return c;
  fail(ErrorCode::InvariantViolation, path + ": no curve labelled '" + label + "'");
}

struct BdArgs {
  std::string anchor, test, anchor_label, test_label, output;
  bool pareto_filter = false;
};

int cmd_bdrate(const BdArgs& a) {
  auto anchor = pick_curve(a.anchor, a.anchor_label);
  auto test = pick_curve(a.test, a.test_label);
  if (a.pareto_filter) {
    anchor = vcm::pareto_front(anchor);
    test = vcm::pareto_front(test);
  }
  const auto r = vcm::bd_metrics(anchor, test);
  ojson j{{"anchor", anchor.label},
          {"test", test.label},
          {"bd_rate_percent", r.bd_rate_percent},
          {"bd_quality", r.bd_quality},
          {"interpolation", r.cubic ? "pchip" : "linear"},
          {"quality_overlap", {r.quality_overlap.lo, r.quality_overlap.hi}},
          {"log10_rate_overlap", {r.log_rate_overlap.lo, r.log_rate_overlap.hi}}};
  emit(j.dump(2) + "\n", a.output);
  return 0;
}

struct ParetoArgs {
  std::vector<std::string> inputs;
  std::optional<double> min_quality;
  std::string output, svg;
};

int cmd_pareto(const Globals& g, const ParetoArgs& a) {
  std::vector<vcm::RDCurve> curves;
  for (const auto& p : a.inputs) {
    auto cs = vcm::read_curves_csv(p);
    curves.insert(curves.end(), cs.begin(), cs.end());
  }
  auto front = vcm::pareto_front(curves);
  const auto min_q = a.min_quality ? a.min_quality : g.config.number("pareto.min_quality");
  if (min_q) front = vcm::apply_cutoff(front, *min_q);
  const fs::path dir = g.out_dir();
  fs::create_directories(dir);
  const fs::path csv = a.output.empty() ? dir / "pareto.csv" : fs::path(a.output);
  const fs::path svg = a.svg.empty() ? dir / "pareto.svg" : fs::path(a.svg);
  vcm::io::write_text(csv, vcm::curves_to_csv(std::span<const vcm::RDCurve>(&front, 1)));
  vcm::PlotOptions opt;
  opt.title = "Pareto front";
  opt.y_label = front.quality_unit.empty() ? "quality" : front.quality_unit;
  vcm::io::write_text(svg, vcm::render_rd_svg(curves, &front, opt));
  return 0;
}

// ---- feature ----------------------------------------------------------------

struct FeatureArgs {
  std::vector<std::string> inputs, outputs;
  int bits = 8;
  float z_th = 1.5f;
  std::string layout = "temporal";
  bool reorder = false;
  std::string sidecar;
};

void expect_counts(const FeatureArgs& a, std::size_t in, std::size_t out, const char* what) {
  if (a.inputs.size() != in || a.outputs.size() != out)
    fail(ErrorCode::BadParams, std::string(what) + " expects " + std::to_string(in) + " input(s) and " +
                                   std::to_string(out) + " output(s)");
}

int cmd_quant(const FeatureArgs& a) {
  if (a.bits != 8 && a.bits != 2) fail(ErrorCode::BadParams, "--bits must be 8 or 2");
  if (a.inputs.empty() || a.inputs.size() != a.outputs.size())
    fail(ErrorCode::BadParams, "quant needs one --output per --input");
  std::vector<vcm::FeatureTensor> tensors;
  for (const auto& p : a.inputs) tensors.push_back(vcm::read_feature_tensor(p));
  auto norm = vcm::normalize_levels(tensors, a.z_th, a.bits);
  const auto& params = norm.params;
  double max_err = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto samples = vcm::quantize(norm.z[i], params);
    if (a.bits == 8) {
      const auto back = vcm::dequantize_8bit(samples, params);
      for (std::size_t k = 0; k < back.values().size(); ++k)
        max_err = std::max(max_err, std::abs(static_cast<double>(back.values()[k]) - norm.z[i].values()[k]));
    }
    count += samples.samples.size();
    vcm::write_volume({samples, params}, a.outputs[i]);
  }
  ojson j{{"bits", a.bits}, {"samples", count}, {"z_min", params.z_min}, {"z_max", params.z_max}, {"z_th", params.z_th}};
  if (a.bits == 8) {
    const double bound = (static_cast<double>(params.z_max) - params.z_min) / 510.0;
    j["max_abs_error"] = max_err;
    j["error_bound"] = bound;
    // Dequantized values are stored as float32, so allow one float ulp at the range ends.
    const double slack = 1e-9 + 4.0 * std::numeric_limits<float>::epsilon() *
                                    std::max(std::abs(params.z_min), std::abs(params.z_max));
    j["within_bound"] = max_err <= bound + slack;
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_dequant(const FeatureArgs& a) {
  if (a.inputs.empty() || a.inputs.size() != a.outputs.size())
    fail(ErrorCode::BadParams, "dequant needs one --output per --input");
  for (std::size_t i = 0; i < a.inputs.size(); ++i) {
    const auto v = vcm::read_volume(a.inputs[i]);
    vcm::write_feature_tensor(vcm::denormalize(vcm::dequantize(v.samples, v.params), v.params), a.outputs[i]);
  }
  return 0;
}

int cmd_pack(const FeatureArgs& a) {
  const auto layout = vcm::parse_layout(a.layout);
  if (a.reorder && layout != vcm::FrameLayout::Temporal)
    fail(ErrorCode::BadParams, "--reorder applies to the temporal layout only");
  vcm::PackedFrameSet packed;
  if (layout == vcm::FrameLayout::Multiscale) {
    expect_counts(a, vcm::kPyramidLevels, 1, "multiscale pack");
    vcm::MultiscaleSamples ms;
    std::optional<vcm::QuantParams> params;
    for (std::size_t k = 0; k < vcm::kPyramidLevels; ++k) {
      auto v = vcm::read_volume(a.inputs[k]);
      if (params && (params->mean != v.params.mean || params->stddev != v.params.stddev ||
                     params->z_min != v.params.z_min || params->z_max != v.params.z_max ||
                     params->bit_depth != v.params.bit_depth))
        fail(ErrorCode::BadParams, "pyramid levels were quantized with different params");
      params = v.params;
      ms.levels[k] = std::move(v.samples);
    }
    packed = vcm::pack_multiscale(ms, *params);
  } else {
    expect_counts(a, 1, 1, "pack");
    const auto v = vcm::read_volume(a.inputs[0]);
    if (layout == vcm::FrameLayout::SpatialTiled) {
      packed = vcm::pack_spatial_tiled(v.samples, v.params);
    } else if (a.reorder) {
      packed = vcm::pack_temporal(v.samples, v.params, vcm::similarity_order<std::uint8_t>(v.samples.samples,
                                                                                            v.samples.dims.channels));
    } else {
      packed = vcm::pack_temporal(v.samples, v.params);
    }
  }
  vcm::write_packed(packed, a.outputs[0]);
  return 0;
}

std::optional<fs::path> sidecar_arg(const FeatureArgs& a) {
  if (a.sidecar.empty()) return std::nullopt;
  return fs::path(a.sidecar);
}

int cmd_unpack(const FeatureArgs& a) {
  if (a.inputs.size() != 1) fail(ErrorCode::BadParams, "unpack expects one input");
  const auto packed = vcm::read_packed(a.inputs[0], sidecar_arg(a));
  switch (packed.layout) {
    case vcm::FrameLayout::Multiscale: {
      expect_counts(a, 1, vcm::kPyramidLevels, "multiscale unpack");
      const auto ms = vcm::unpack_multiscale(packed);
      for (std::size_t k = 0; k < vcm::kPyramidLevels; ++k) vcm::write_volume({ms.levels[k], packed.params}, a.outputs[k]);
      break;
    }
    case vcm::FrameLayout::SpatialTiled:
      expect_counts(a, 1, 1, "unpack");
      vcm::write_volume({vcm::unpack_spatial_tiled(packed), packed.params}, a.outputs[0]);
      break;
    case vcm::FrameLayout::Temporal:
      expect_counts(a, 1, 1, "unpack");
      vcm::write_volume({vcm::unpack_temporal(packed), packed.params}, a.outputs[0]);
      break;
  }
  return 0;
}

int cmd_encode(const FeatureArgs& a) {
  expect_counts(a, 1, 1, "encode");
  const auto packed = vcm::read_packed(a.inputs[0], sidecar_arg(a));
  const auto stream = vcm::entropy_encode(packed);
  vcm::write_stream(stream, a.outputs[0]);
  ojson j{{"samples", packed.sample_count()},
          {"raw_bits", 8 * packed.sample_count()},
          {"payload_bits", stream.payload_bits},
          {"crc32", stream.crc}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

int cmd_decode(const FeatureArgs& a) {
  expect_counts(a, 1, 1, "decode");
  const auto packed = vcm::entropy_decode(vcm::read_stream(a.inputs[0]));
  vcm::write_packed(packed, a.outputs[0]);
  ojson j{{"samples", packed.sample_count()}, {"checksum", "ok"}};
  std::cout << j.dump(2) << "\n";
  return 0;
}

// ---- run / report -----------------------------------------------------------

struct RunArgs {
  std::string manifest;
  bool keep_scratch = false;
};

int cmd_run(const Globals& g, const RunArgs& a) {
  const auto manifest = vcm::load_manifest(a.manifest);
  const auto digest = vcm::digest::sha256_hex(vcm::io::read_file(a.manifest));
  const auto weights = weights_from(g.config);
  const fs::path dir = g.out_dir("vcm_out");
  fs::create_directories(dir);
  vcm::ExperimentOptions opt;
  opt.jobs = g.jobs;
  opt.scratch_root = dir / ".scratch";
  opt.partial_results = dir / "partial_results.json";
  opt.keep_scratch = a.keep_scratch;
  const auto result = vcm::run_experiment(manifest, opt);
  if (!a.keep_scratch) fs::remove_all(opt.scratch_root);
  fs::remove(*opt.partial_results);
  vcm::write_report_files(vcm::build_report(manifest, result, digest, weights), dir);
  return 0;
}

struct ReportArgs {
  std::string input;
};

int cmd_report(const Globals& g, const ReportArgs& a) {
  ojson doc;
  try {
    doc = ojson::parse(vcm::io::read_text(a.input));
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorCode::ParseError, a.input + ": " + e.what());
  }
  vcm::write_report_files(doc, g.out_dir());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vcmbench: rate/quality evaluation for video coding for machines"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(vcm::kToolVersion));

  Globals g;
  app.add_option("--jobs", g.jobs, "Worker threads for run (output never depends on it)")->check(CLI::PositiveNumber);
  app.add_option("--config", g.config_path, "key=value settings file");
  app.add_option("--output-dir", g.output_dir, "Directory for written files");

  EvalDetArgs det;
  auto* c_det = app.add_subcommand("eval-det", "Mean average precision of detections");
  c_det->add_option("--detections", det.detections, "Detections JSONL")->required();
  c_det->add_option("--ground-truth", det.ground_truth, "Ground truth JSONL")->required();
  c_det->add_option("--iou", det.iou, "IoU thresholds (default 0.5)");
  c_det->add_flag("--coco101", det.coco101, "101-point interpolated AP instead of all-point");
  c_det->add_option("--format", det.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  c_det->add_option("--output", det.output, "Output file (default stdout)");

  EvalTrackArgs trk;
  auto* c_trk = app.add_subcommand("eval-track", "MOTA of tracker output");
  c_trk->add_option("--predictions", trk.predictions, "Predicted tracks JSONL")->required();
  c_trk->add_option("--ground-truth", trk.ground_truth, "Ground truth tracks JSONL")->required();
  c_trk->add_option("--iou", trk.iou, "IoU threshold (default 0.5)");
  c_trk->add_option("--output", trk.output, "Output file (default stdout)");

  BdArgs bd;
  auto* c_bd = app.add_subcommand("bdrate", "Bjontegaard deltas between two RD curves");
  c_bd->add_option("--anchor", bd.anchor, "Anchor curve CSV")->required();
  c_bd->add_option("--test", bd.test, "Test curve CSV")->required();
  c_bd->add_option("--anchor-label", bd.anchor_label, "Curve label to use from the anchor file");
  c_bd->add_option("--test-label", bd.test_label, "Curve label to use from the test file");
  c_bd->add_flag("--pareto-filter", bd.pareto_filter, "Drop dominated points before computing");
  c_bd->add_option("--output", bd.output, "Output file (default stdout)");

  ParetoArgs par;
  auto* c_par = app.add_subcommand("pareto", "Pareto front over RD curves");
  c_par->add_option("inputs", par.inputs, "Curve CSV files")->required();
  c_par->add_option("--min-quality", par.min_quality, "Drop front points below this quality");
  c_par->add_option("--output", par.output, "Front CSV (default <output-dir>/pareto.csv)");
  c_par->add_option("--svg", par.svg, "Plot (default <output-dir>/pareto.svg)");

  FeatureArgs fa;
  auto* c_feat = app.add_subcommand("feature", "Feature-map quantization, packing and entropy coding");
  c_feat->require_subcommand(1);
  auto add_io = [&](CLI::App* c) {
    c->add_option("--input,-i", fa.inputs, "Input file(s)")->required();
    c->add_option("--output,-o", fa.outputs, "Output file(s)")->required();
  };
  auto* f_quant = c_feat->add_subcommand("quant", "Normalize and quantize VCMF tensors to VCMQ volumes");
  add_io(f_quant);
  f_quant->add_option("--bits", fa.bits, "8 or 2");
  f_quant->add_option("--z-th", fa.z_th, "2-bit threshold (default 1.5)");
  auto* f_dequant = c_feat->add_subcommand("dequant", "VCMQ volumes back to VCMF tensors");
  add_io(f_dequant);
  auto* f_pack = c_feat->add_subcommand("pack", "Pack VCMQ volumes into YUV400 frames plus a JSON sidecar");
  add_io(f_pack);
  f_pack->add_option("--layout", fa.layout, "spatial, multiscale or temporal");
  f_pack->add_flag("--reorder", fa.reorder, "Similarity channel order (temporal)");
  auto* f_unpack = c_feat->add_subcommand("unpack", "YUV400 frames back to VCMQ volumes");
  add_io(f_unpack);
  f_unpack->add_option("--sidecar", fa.sidecar, "Sidecar JSON (default <input>.json)");
  auto* f_encode = c_feat->add_subcommand("encode", "Entropy-code packed frames into a VCMS stream");
  add_io(f_encode);
  f_encode->add_option("--sidecar", fa.sidecar, "Sidecar JSON (default <input>.json)");
  auto* f_decode = c_feat->add_subcommand("decode", "Decode a VCMS stream to packed frames");
  add_io(f_decode);

  RunArgs run;
  auto* c_run = app.add_subcommand("run", "Run an experiment manifest and write the report");
  c_run->add_option("manifest", run.manifest, "Experiment manifest JSON")->required();
  c_run->add_flag("--keep-scratch", run.keep_scratch, "Keep per-job working files");

  ReportArgs rep;
  auto* c_rep = app.add_subcommand("report", "Re-render CSV tables and the plot from a report JSON");
  c_rep->add_option("input", rep.input, "report.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (!g.config_path.empty()) g.config = vcm::Config::load(g.config_path);
    if (g.config.has("jobs") && app.get_option("--jobs")->count() == 0) {
      const auto j = *g.config.integer("jobs");
      if (j < 1) fail(ErrorCode::ConfigError, "jobs must be >= 1");
      g.jobs = static_cast<unsigned>(j);
    }
    if (*c_det) return cmd_eval_det(g, det);
    if (*c_trk) return cmd_eval_track(g, trk);
    if (*c_bd) return cmd_bdrate(bd);
    if (*c_par) return cmd_pareto(g, par);
    if (*f_quant) return cmd_quant(fa);
    if (*f_dequant) return cmd_dequant(fa);
    if (*f_pack) return cmd_pack(fa);
    if (*f_unpack) return cmd_unpack(fa);
    if (*f_encode) return cmd_encode(fa);
    if (*f_decode) return cmd_decode(fa);
    if (*c_run) return cmd_run(g, run);
    if (*c_rep) return cmd_report(g, rep);
  } catch (const vcm::Error& e) {
    std::cerr << "vcmbench: " << e.what() << "\n";
    return vcm::exit_status(e.code());
  } catch (const std::exception& e) {
    std::cerr << "vcmbench: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
