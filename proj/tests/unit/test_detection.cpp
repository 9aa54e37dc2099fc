#include <gtest/gtest.h>

#include <random>

#include "oracles/ap_oracle.hpp"
#include "vcm/metrics/detection.hpp"

using namespace vcm;

namespace {

struct Instance {
  std::vector<Detection> dets;
  std::vector<GroundTruthBox> gts;
};

// Up to 20 boxes over 5 images; detections jitter around ground truth so that
// matches, near misses and duplicates all occur. Scores come from a small set
// so ties are common.
Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_gt(1, 10), n_extra(0, 4), img(0, 4), cls(0, 2), score_level(0, 6);
  std::uniform_real_distribution<double> pos(0, 80), size(5, 30), jitter(-6, 6);
  Instance in;
  const int g = n_gt(rng);
  for (int i = 0; i < g; ++i) {
    const double x = pos(rng), y = pos(rng);
    in.gts.push_back({"img" + std::to_string(img(rng)), cls(rng), {x, y, x + size(rng), y + size(rng)}});
  }
  for (const auto& gt : in.gts) {
    std::uniform_int_distribution<int> copies(0, 2);
    for (int c = copies(rng); c > 0; --c) {
      BoundingBox b{std::max(0.0, gt.box.x_min + jitter(rng)), std::max(0.0, gt.box.y_min + jitter(rng)),
                    gt.box.x_max + jitter(rng), gt.box.y_max + jitter(rng)};
      if (!is_valid(b)) continue;
      in.dets.push_back({gt.image_id, gt.class_id, b, score_level(rng) / 6.0});
    }
  }
  for (int e = n_extra(rng); e > 0; --e) {
    const double x = pos(rng), y = pos(rng);
    in.dets.push_back({"img" + std::to_string(img(rng)), cls(rng), {x, y, x + size(rng), y + size(rng)},
                       score_level(rng) / 6.0});
  }
  while (in.dets.size() + in.gts.size() > 20) in.dets.pop_back();
  return in;
}

const std::vector<double> kHalf{0.5};

}  // namespace

TEST(Iou, Examples) {
  const BoundingBox a{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, {2, 2, 3, 3}), 0.0);
  EXPECT_DOUBLE_EQ(iou(a, {0.5, 0, 1.5, 1}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(iou(a, {1, 0, 2, 1}), 0.0);
}

TEST(AveragePrecision, SingleMatch) {
  std::vector<GroundTruthBox> gt{{"i", 0, {0, 0, 10, 10}}};
  std::vector<Detection> d{{"i", 0, {0, 0, 10, 6}, 0.9}};
  EXPECT_NEAR(iou(d[0].box, gt[0].box), 0.6, 1e-12);
  EXPECT_DOUBLE_EQ(average_precision(d, gt, 0, 0.5), 1.0);
}

TEST(AveragePrecision, FalsePositiveRankedFirst) {
  std::vector<GroundTruthBox> gt{{"i", 0, {0, 0, 10, 10}}};
  std::vector<Detection> d{{"i", 0, {50, 50, 60, 60}, 0.9}, {"i", 0, {0, 0, 10, 10}, 0.8}};
  EXPECT_DOUBLE_EQ(average_precision(d, gt, 0, 0.5), 0.5);
  EXPECT_DOUBLE_EQ(oracle::class_ap(d, gt, 0, 0.5), 0.5);
}

TEST(AveragePrecision, NoDetections) {
  std::vector<GroundTruthBox> gt{{"i", 0, {0, 0, 10, 10}}};
  EXPECT_DOUBLE_EQ(average_precision({}, gt, 0, 0.5), 0.0);
}

TEST(AveragePrecision, NoGroundTruthForClass) {
  std::vector<GroundTruthBox> gt{{"i", 0, {0, 0, 10, 10}}};
  std::vector<Detection> d{{"i", 1, {0, 0, 10, 10}, 0.8}};
  EXPECT_DOUBLE_EQ(average_precision(d, gt, 1, 0.5), 0.0);
}

TEST(AveragePrecision, DetectionsOnOtherImagesDoNotMatch) {
  std::vector<GroundTruthBox> gt{{"a", 0, {0, 0, 10, 10}}};
  std::vector<Detection> d{{"b", 0, {0, 0, 10, 10}, 0.9}};
  EXPECT_DOUBLE_EQ(average_precision(d, gt, 0, 0.5), 0.0);
}

TEST(AveragePrecision, DuplicateIsFalsePositive) {
  std::vector<GroundTruthBox> gt{{"i", 0, {0, 0, 10, 10}}};
  std::vector<Detection> d{{"i", 0, {0, 0, 10, 10}, 0.9}, {"i", 0, {0, 0, 10, 10}, 0.8}};
  const auto r = evaluate_class(d, gt, 0, 0.5);
  EXPECT_DOUBLE_EQ(r.ap, 1.0);
  EXPECT_EQ(r.counts, (ClassCounts{1, 1, 0}));
}

TEST(AveragePrecision, ThresholdOutOfRange) {
  EXPECT_THROW(average_precision({}, {}, 0, 0.0), Error);
  EXPECT_THROW(average_precision({}, {}, 0, 1.5), Error);
}

TEST(MeanAveragePrecision, SingleClassReducesToAp) {
  std::vector<GroundTruthBox> gt{{"i", 0, {0, 0, 10, 10}}, {"i", 0, {20, 20, 30, 30}}};
  std::vector<Detection> d{{"i", 0, {50, 50, 60, 60}, 0.9}, {"i", 0, {20, 20, 30, 31}, 0.7}};
  EXPECT_DOUBLE_EQ(mean_average_precision(d, gt, kHalf).map, average_precision(d, gt, 0, 0.5));
}

TEST(MeanAveragePrecision, TwoClassesAveraged) {
  std::vector<GroundTruthBox> gt{{"i", 0, {0, 0, 10, 10}}, {"i", 1, {20, 20, 30, 30}}};
  std::vector<Detection> d{{"i", 0, {0, 0, 10, 10}, 0.9}};
  const auto r = mean_average_precision(d, gt, kHalf);
  EXPECT_DOUBLE_EQ(r.per_class_ap.at(0), 1.0);
  EXPECT_DOUBLE_EQ(r.per_class_ap.at(1), 0.0);
  EXPECT_DOUBLE_EQ(r.map, 0.5);
  EXPECT_EQ(r.per_class_counts.at(1).fn, 1u);
}

TEST(MeanAveragePrecision, ClassesWithoutGroundTruthIgnored) {
  std::vector<GroundTruthBox> gt{{"i", 0, {0, 0, 10, 10}}};
  std::vector<Detection> d{{"i", 0, {0, 0, 10, 10}, 0.9}, {"i", 7, {0, 0, 10, 10}, 0.9}};
  const auto r = mean_average_precision(d, gt, kHalf);
  EXPECT_DOUBLE_EQ(r.map, 1.0);
  EXPECT_EQ(r.per_class_ap.count(7), 0u);
}

TEST(MeanAveragePrecision, EmptyGroundTruth) {
  try {
    mean_average_precision({}, {}, kHalf);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGroundTruth);
  }
  std::vector<GroundTruthBox> gt{{"i", 0, {0, 0, 1, 1}}};
  EXPECT_THROW(mean_average_precision({}, gt, std::vector<double>{}), Error);
}

TEST(MeanAveragePrecision, CocoThresholdsAverage) {
  const auto t = coco_thresholds();
  ASSERT_EQ(t.size(), 10u);
  EXPECT_DOUBLE_EQ(t.front(), 0.5);
  EXPECT_NEAR(t.back(), 0.95, 1e-12);
  // IoU 0.72 passes 5 of the 10 thresholds (0.50 ... 0.70).
  std::vector<GroundTruthBox> gt{{"i", 0, {0, 0, 100, 100}}};
  std::vector<Detection> d{{"i", 0, {0, 0, 100, 72}, 0.9}};
  EXPECT_NEAR(mean_average_precision(d, gt, t).map, 0.5, 1e-12);
}

TEST(MeanAveragePrecision, MatchesBruteForceOracle) {
  std::mt19937_64 rng(20240611);
  const std::vector<double> multi{0.3, 0.5, 0.75};
  for (int trial = 0; trial < 500; ++trial) {
    const auto in = random_instance(rng);
    const auto& thr = trial % 2 ? multi : kHalf;
    const double got = mean_average_precision(in.dets, in.gts, thr).map;
    const double want = oracle::mean_ap(in.dets, in.gts, thr);
    ASSERT_NEAR(got, want, 1e-12) << "trial " << trial;
    ASSERT_GE(got, 0.0);
    ASSERT_LE(got, 1.0);
  }
}

TEST(MeanAveragePrecision, InvariantUnderMonotoneScoreTransform) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto in = random_instance(rng);
    const double base = mean_average_precision(in.dets, in.gts, kHalf).map;
    for (auto& d : in.dets) d.score = 0.1 + 0.8 * d.score * d.score;
    ASSERT_DOUBLE_EQ(mean_average_precision(in.dets, in.gts, kHalf).map, base);
  }
}

TEST(MeanAveragePrecision, InvariantUnderUniformBoxScaling) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    auto in = random_instance(rng);
    const double base = mean_average_precision(in.dets, in.gts, kHalf).map;
    for (double s : {0.25, 4.0}) {
      auto scaled = in;
      for (auto& d : scaled.dets) d.box = d.box.scaled(s, s);
      for (auto& g : scaled.gts) g.box = g.box.scaled(s, s);
      ASSERT_NEAR(mean_average_precision(scaled.dets, scaled.gts, kHalf).map, base, 1e-12);
    }
  }
}

TEST(Coco101, PerfectAndHalf) {
  std::vector<GroundTruthBox> gt{{"i", 0, {0, 0, 10, 10}}};
  std::vector<Detection> perfect{{"i", 0, {0, 0, 10, 10}, 0.9}};
  EXPECT_DOUBLE_EQ(average_precision(perfect, gt, 0, 0.5, ApInterpolation::Coco101), 1.0);
  std::vector<Detection> late{{"i", 0, {50, 50, 60, 60}, 0.9}, {"i", 0, {0, 0, 10, 10}, 0.8}};
  EXPECT_DOUBLE_EQ(average_precision(late, gt, 0, 0.5, ApInterpolation::Coco101), 0.5);
}

TEST(Coco101, HalfRecall) {
  std::vector<GroundTruthBox> gt{{"i", 0, {0, 0, 10, 10}}, {"i", 0, {20, 20, 30, 30}}};
  std::vector<Detection> d{{"i", 0, {0, 0, 10, 10}, 0.9}};
  // Recall points 0 .. 0.5 (51 of 101) see precision 1.
  EXPECT_NEAR(average_precision(d, gt, 0, 0.5, ApInterpolation::Coco101), 51.0 / 101.0, 1e-12);
  EXPECT_DOUBLE_EQ(average_precision(d, gt, 0, 0.5), 0.5);
}
