#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "vcm/core/records.hpp"
#include "vcm/pipeline/codec.hpp"
#include "vcm/pipeline/experiment.hpp"
#include "vcm/pipeline/image.hpp"
#include "vcm/rd/rate.hpp"

using namespace vcm;
using testing_support::TempDir;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoFailure;
}

RawImage noisy_image(std::uint32_t w, std::uint32_t h, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> b(0, 255);
  auto img = RawImage::blank(w, h);
  for (auto& p : img.planes)
    for (auto& s : p.samples) s = static_cast<std::uint8_t>(b(rng));
  return img;
}

// Smooth gradient plus mild noise, so low bit planes carry most of the entropy.
RawImage natural_image(std::uint32_t w, std::uint32_t h) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> noise(0.0, 6.0);
  auto img = RawImage::blank(w, h);
  for (int c = 0; c < 3; ++c) {
    auto& p = img.planes[c];
    for (std::uint32_t y = 0; y < p.height; ++y)
      for (std::uint32_t x = 0; x < p.width; ++x)
        p.at(x, y) = static_cast<std::uint8_t>(
            std::clamp(40.0 + 150.0 * (x + y) / (p.width + p.height) + 20 * c + noise(rng), 0.0, 255.0));
  }
  return img;
}

ExperimentManifest null_manifest() { return load_manifest(testing_support::data_dir() / "null_fixture" / "manifest.json"); }

}  // namespace

TEST(Scaling, HundredPercentIsIdentity) {
  const auto img = noisy_image(7, 5, 1);
  EXPECT_EQ(scale_image(img, 100), img);
}

TEST(Scaling, ConstantsSurviveDownAndUp) {
  const auto img = RawImage::blank(8, 8, 77, 90);
  const auto half = scale_image(img, 50);
  EXPECT_EQ(half.width, 4u);
  EXPECT_EQ(half.height, 4u);
  EXPECT_EQ(half, RawImage::blank(4, 4, 77, 90));
  EXPECT_EQ(resize_image(half, 8, 8), img);
}

TEST(Scaling, ExtentsRoundAndStayPositive) {
  EXPECT_EQ(scaled_extent(33, 75), 25u);
  EXPECT_EQ(scaled_extent(33, 50), 17u);
  EXPECT_EQ(scaled_extent(2, 25), 1u);
  EXPECT_EQ(scaled_extent(1, 25), 1u);
  const auto img = scale_image(noisy_image(33, 25, 2), 25);
  EXPECT_EQ(img.width, 8u);
  EXPECT_EQ(img.height, 6u);
  EXPECT_EQ(img.planes[1].width, 4u);
  EXPECT_EQ(img.planes[1].height, 3u);
  EXPECT_THROW(scale_image(img, 60), Error);
}

TEST(Scaling, BilinearMidpoint) {
  Plane<std::uint8_t> src(2, 1);
  src.samples = {0, 100};
  const auto up = resize_plane(src, 4, 1);
  // centres map to -0.25, 0.25, 0.75, 1.25 in source pixels
  EXPECT_EQ(up.samples, (std::vector<std::uint8_t>{0, 25, 75, 100}));
}

TEST(Padding, EvenIsNoop) {
  const auto img = noisy_image(4, 6, 3);
  const auto [out, rec] = pad_to_even(img);
  EXPECT_EQ(rec, (PadRecord{0, 0}));
  EXPECT_EQ(out, img);
}

TEST(Padding, OddWidthReplicatesLastColumn) {
  const auto img = noisy_image(3, 4, 4);
  const auto [out, rec] = pad_to_even(img);
  EXPECT_EQ(rec, (PadRecord{1, 0}));
  EXPECT_EQ(out.width, 4u);
  for (std::uint32_t y = 0; y < 4; ++y) EXPECT_EQ(out.planes[0].at(3, y), img.planes[0].at(2, y));
  EXPECT_EQ(out.planes[1], img.planes[1]);
  EXPECT_EQ(crop_pad(out, rec), img);
}

TEST(Padding, CropInvertsOnBothAxes) {
  for (auto [w, h] : {std::pair{1u, 1u}, std::pair{5u, 7u}, std::pair{33u, 25u}, std::pair{6u, 3u}}) {
    const auto img = noisy_image(w, h, w * 31 + h);
    const auto [out, rec] = pad_to_even(img);
    EXPECT_EQ(out.width % 2, 0u);
    EXPECT_EQ(out.height % 2, 0u);
    EXPECT_EQ(RawImage::frame_bytes(out.width, out.height), encode_yuv420(std::span(&out, 1)).size());
    EXPECT_EQ(crop_pad(out, rec), img);
  }
}

TEST(Yuv420, RoundTripAndSizeErrors) {
  std::vector<RawImage> frames{noisy_image(5, 3, 5), noisy_image(5, 3, 6)};
  const auto bytes = encode_yuv420(frames);
  EXPECT_EQ(bytes.size(), 2 * RawImage::frame_bytes(5, 3));
  EXPECT_EQ(decode_yuv420(bytes, 5, 3), frames);
  EXPECT_EQ(code_of([&] { decode_yuv420(std::span(bytes).first(bytes.size() - 1), 5, 3); }), ErrorCode::SizeMismatch);
  EXPECT_EQ(code_of([&] { decode_yuv420(bytes, 0, 3); }), ErrorCode::ZeroPixels);
}

TEST(Templates, ExpandPlaceholders) {
  const auto argv = expand_template("enc -i {input} --qp={qp} {unknown}  -o {output}",
                                    {{"input", "/a/in.yuv"}, {"output", "/b/out.bin"}, {"qp", "32"}});
  EXPECT_EQ(argv, (std::vector<std::string>{"enc", "-i", "/a/in.yuv", "--qp=32", "{unknown}", "-o", "/b/out.bin"}));
}

TEST(CodecSpecs, Validation) {
  EXPECT_EQ(parse_codec_kind("null"), CodecKind::Null);
  EXPECT_EQ(parse_codec_kind("TRUNCATE"), CodecKind::Truncate);
  EXPECT_EQ(code_of([] { parse_codec_kind("vvc"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { validate(CodecSpec{CodecKind::External, "enc", "", {22}}); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { validate(CodecSpec{CodecKind::Null, "", "", {}}); }), ErrorCode::ConfigError);
  EXPECT_EQ(default_qps(), (std::vector<int>{22, 27, 32, 37, 42, 47}));
}

TEST(BuiltinCodecs, NullCopiesInput) {
  TempDir dir;
  const auto img = noisy_image(6, 4, 7);
  write_yuv420(dir / "in.yuv", std::span(&img, 1));
  const auto r = run_codec(CodecSpec{CodecKind::Null, "", "", {22}}, dir / "in.yuv", 22, 6, 4, dir / "s");
  EXPECT_EQ(io::read_file(r.output), io::read_file(dir / "in.yuv"));
  EXPECT_EQ(r.bitstream_bits, 8u * RawImage::frame_bytes(6, 4));
}

TEST(BuiltinCodecs, TruncateQpZeroIsLossless) {
  TempDir dir;
  const auto img = natural_image(64, 48);
  write_yuv420(dir / "in.yuv", std::span(&img, 1));
  const CodecSpec spec{CodecKind::Truncate, "", "", {0}};
  const auto r = run_codec(spec, dir / "in.yuv", 0, 64, 48, dir / "s");
  EXPECT_EQ(io::read_file(r.output), io::read_file(dir / "in.yuv"));
}

TEST(BuiltinCodecs, TruncateBitsFallWithQp) {
  TempDir dir;
  const auto img = natural_image(96, 64);
  write_yuv420(dir / "in.yuv", std::span(&img, 1));
  const CodecSpec spec{CodecKind::Truncate, "", "", {0, 1, 2, 3, 4, 5, 6, 7}};
  std::uint64_t prev = UINT64_MAX;
  for (int qp = 0; qp < 8; ++qp) {
    const auto r = run_codec(spec, dir / "in.yuv", qp, 96, 64, dir / ("s" + std::to_string(qp)));
    EXPECT_LE(r.bitstream_bits, prev) << "qp " << qp;
    prev = r.bitstream_bits;
    const auto out = io::read_file(r.output);
    EXPECT_EQ(out, truncate_samples(io::read_file(dir / "in.yuv"), qp));
  }
}

TEST(ExternalCodec, CopyCommandsRoundTrip) {
  TempDir dir;
  const auto img = noisy_image(6, 4, 8);
  write_yuv420(dir / "in.yuv", std::span(&img, 1));
  const CodecSpec spec{CodecKind::External, "cp {input} {output}", "cp {input} {output}", {22}};
  const auto r = run_codec(spec, dir / "in.yuv", 22, 6, 4, dir / "s");
  EXPECT_EQ(io::read_file(r.output), io::read_file(dir / "in.yuv"));
  EXPECT_EQ(r.bitstream_bits, 8u * RawImage::frame_bytes(6, 4));
}

TEST(ExternalCodec, FailureModes) {
  TempDir dir;
  const auto img = noisy_image(6, 4, 9);
  write_yuv420(dir / "in.yuv", std::span(&img, 1));
  auto run = [&](std::string enc, std::string dec) {
    return code_of([&] {
      run_codec(CodecSpec{CodecKind::External, enc, dec, {22}}, dir / "in.yuv", 22, 6, 4, dir / "s");
    });
  };
  EXPECT_EQ(run("no-such-encoder-binary {input} {output}", "cp {input} {output}"), ErrorCode::CommandNotFound);
  EXPECT_EQ(run("false", "cp {input} {output}"), ErrorCode::CommandFailed);
  EXPECT_EQ(run("true", "cp {input} {output}"), ErrorCode::OutputMissing);
  EXPECT_EQ(run("cp {input} {output}", "dd if={input} of={output} bs=1 count=10"), ErrorCode::DimChanged);
}

TEST(ExternalCodec, FailureMessageEchoesArgvAndStderr) {
  TempDir dir;
  const auto img = noisy_image(2, 2, 10);
  write_yuv420(dir / "in.yuv", std::span(&img, 1));
  try {
    run_codec(CodecSpec{CodecKind::External, "ls /definitely/not/here", "cp {input} {output}", {22}}, dir / "in.yuv",
              22, 2, 2, dir / "s");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CommandFailed);
    EXPECT_NE(e.detail().find("ls /definitely/not/here"), std::string::npos);
    EXPECT_NE(e.detail().find("exited with status"), std::string::npos);
  }
}

TEST(Manifest, FixtureLoads) {
  const auto m = null_manifest();
  EXPECT_EQ(m.items.size(), 2u);
  EXPECT_EQ(m.scales, (std::vector<int>{100, 75, 50, 25}));
  EXPECT_EQ(m.codec.kind, CodecKind::Null);
  EXPECT_EQ(m.quality_unit(), "mAP");
}

TEST(Manifest, Rejections) {
  const auto dir = testing_support::data_dir() / "null_fixture";
  const std::string base =
      R"({"codec":{"kind":"NULL","qps":[22]},"items":[{"id":"a","width":32,"height":24,"raw":"a.yuv",)"
      R"("ground_truth":"a.gt.jsonl","predictions":"PRED"}]})";
  auto with = [&](const std::string& pred) {
    auto s = base;
    s.replace(s.find("PRED"), 4, pred);
    return s;
  };
  EXPECT_NO_THROW(parse_manifest(with("a.pred.jsonl"), dir));
  EXPECT_EQ(code_of([&] { parse_manifest(with("missing.jsonl"), dir); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { parse_manifest("{nope", dir); }), ErrorCode::ParseError);
  auto bad_scale = with("a.pred.jsonl");
  bad_scale.insert(1, R"("scales":[100,60],)");
  EXPECT_EQ(code_of([&] { parse_manifest(bad_scale, dir); }), ErrorCode::ConfigError);
  auto bad_task = with("a.pred.jsonl");
  bad_task.insert(1, R"("task":"segmentation",)");
  EXPECT_EQ(code_of([&] { parse_manifest(bad_task, dir); }), ErrorCode::ConfigError);
}

TEST(Experiment, NullCodecWithPerfectPredictionsIsFlat) {
  TempDir dir;
  const auto res = run_experiment(null_manifest(), {1, dir.path(), std::nullopt, false});
  ASSERT_EQ(res.curves.size(), 4u);
  for (const auto& c : res.curves)
    for (const auto& p : c.points) EXPECT_DOUBLE_EQ(p.quality, 1.0);
  EXPECT_EQ(res.rows.size(), 12u);
  EXPECT_EQ(res.jobs.size(), 24u);
  EXPECT_EQ(res.rate_unit, "bpp");
  for (const auto& row : res.rows) EXPECT_DOUBLE_EQ(row.quality, 1.0);
}

TEST(Experiment, SinglePointRateIsSourceBpp) {
  TempDir dir;
  auto m = null_manifest();
  m.items = {m.items[1]};  // the odd-sized 33x25 item
  m.scales = {100};
  m.codec.qps = {22};
  const auto res = run_experiment(m, {1, dir.path(), std::nullopt, false});
  ASSERT_EQ(res.curves.size(), 1u);
  ASSERT_EQ(res.curves[0].points.size(), 1u);
  const auto& job = res.jobs.at(0);
  EXPECT_EQ(job.coded_width, 34u);
  EXPECT_EQ(job.coded_height, 26u);
  EXPECT_EQ(job.bits, 8u * RawImage::frame_bytes(34, 26));
  EXPECT_DOUBLE_EQ(res.curves[0].points[0].rate, bpp(job.bits, 33, 25));
}

TEST(Experiment, WorkerCountDoesNotChangeResults) {
  TempDir a, b;
  const auto m = null_manifest();
  const auto r1 = run_experiment(m, {1, a.path(), std::nullopt, false});
  const auto r4 = run_experiment(m, {4, b.path(), std::nullopt, false});
  EXPECT_EQ(r1.curves, r4.curves);
  EXPECT_EQ(r1.pareto, r4.pareto);
  ASSERT_EQ(r1.jobs.size(), r4.jobs.size());
  for (std::size_t i = 0; i < r1.jobs.size(); ++i) EXPECT_EQ(to_json(r1.jobs[i]), to_json(r4.jobs[i]));
}

TEST(Experiment, FailureWritesPartialResultsWithContext) {
  TempDir dir;
  auto m = null_manifest();
  m.codec = CodecSpec{CodecKind::External, "false", "cp {input} {output}", {22}};
  try {
    run_experiment(m, {2, dir / "scratch", dir / "partial.json", false});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CommandFailed);
    EXPECT_NE(e.detail().find("item 'a', qp 22, scale 100"), std::string::npos) << e.what();
  }
  const auto doc = nlohmann::json::parse(io::read_text(dir / "partial.json"));
  EXPECT_EQ(doc["status"], "failed");
  EXPECT_TRUE(doc["completed_jobs"].is_array());
}

TEST(Experiment, ScaledPredictionsMapBackToSource) {
  TempDir dir;
  const auto fixture = testing_support::data_dir() / "null_fixture";
  // Predictions at 50% coordinates for image a (32x24 -> 16x12).
  auto gt = load_ground_truth(fixture / "a.gt.jsonl");
  std::vector<Detection> half;
  for (const auto& g : gt) half.push_back({g.image_id, g.class_id, g.box.scaled(0.5, 0.5), 1.0});
  io::write_text(dir / "half.jsonl", to_jsonl(half));
  nlohmann::json j{{"scales", {50}},
                   {"codec", {{"kind", "NULL"}, {"qps", {22}}}},
                   {"items",
                    {{{"id", "a"},
                      {"width", 32},
                      {"height", 24},
                      {"raw", (fixture / "a.yuv").string()},
                      {"ground_truth", (fixture / "a.gt.jsonl").string()},
                      {"predictions", "half.jsonl"},
                      {"prediction_coords", "scaled"}}}}};
  const auto m = parse_manifest(j.dump(), dir.path());
  EXPECT_DOUBLE_EQ(run_experiment(m, {1, dir / "s", std::nullopt, false}).rows.at(0).quality, 1.0);
  j["items"][0]["prediction_coords"] = "source";
  const auto unscaled = parse_manifest(j.dump(), dir.path());
  EXPECT_LT(run_experiment(unscaled, {1, dir / "s2", std::nullopt, false}).rows.at(0).quality, 1.0);
}

TEST(Experiment, SyntheticDetectorSeesTruncation) {
  TempDir dir;
  const auto path = testing_support::write_detector_manifest(dir, {0, 7}, {100});
  const auto res = run_experiment(load_manifest(path), {2, dir / "s", std::nullopt, false});
  ASSERT_EQ(res.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(res.rows[0].quality, 1.0);
  EXPECT_LT(res.rows[1].quality, res.rows[0].quality);
  EXPECT_LT(res.rows[1].total_bits, res.rows[0].total_bits);
}
