#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "vcm/core/types.hpp"

namespace vcm {

inline double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

enum class ApInterpolation {
  AllPoint,   // area under the precision envelope
  Coco101,    // mean envelope precision at recall 0, 0.01, ..., 1
};

struct ClassCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

struct ClassAp {
  double ap = 0.0;
  ClassCounts counts;
};

struct APResult {
  std::map<int, double> per_class_ap;
  std::map<int, ClassCounts> per_class_counts;
  double map = 0.0;
};

namespace detail {

inline void check_threshold(double t) {
  if (!(t > 0.0 && t <= 1.0)) fail(ErrorCode::InvariantViolation, "IoU threshold must be in (0,1]");
}

// Envelope integration over a precision/recall sweep in detection order.
inline double integrate_envelope(std::span<const double> precision, std::span<const double> recall,
                                 ApInterpolation mode) {
  const std::size_t n = precision.size();
  if (n == 0) return 0.0;
  std::vector<double> env(precision.begin(), precision.end());
  for (std::size_t i = n - 1; i-- > 0;) env[i] = std::max(env[i], env[i + 1]);

  if (mode == ApInterpolation::Coco101) {
    double sum = 0.0;
    std::size_t k = 0;
    for (int step = 0; step <= 100; ++step) {
      const double r = step / 100.0;
      while (k < n && recall[k] < r) ++k;
      if (k < n) sum += env[k];
    }
    return sum / 101.0;
  }

  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (recall[i] != prev_recall) {
      ap += (recall[i] - prev_recall) * env[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

}  // namespace detail

/// AP for one class at one IoU threshold. Detections are visited by descending
/// score (ties keep input order) and each takes the highest-IoU unmatched ground
/// truth of its class and image, when that IoU reaches the threshold.
inline ClassAp evaluate_class(std::span<const Detection> dets, std::span<const GroundTruthBox> gts, int class_id,
                              double iou_threshold, ApInterpolation mode = ApInterpolation::AllPoint) {
  detail::check_threshold(iou_threshold);

  struct GtSlot {
    const BoundingBox* box;
    bool matched;
  };
  std::unordered_map<std::string, std::vector<GtSlot>> by_image;
  std::size_t npos = 0;
  for (const auto& g : gts) {
    if (g.class_id != class_id) continue;
    by_image[g.image_id].push_back({&g.box, false});
    ++npos;
  }

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < dets.size(); ++i)
    if (dets[i].class_id == class_id) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  std::vector<double> precision, recall;
  precision.reserve(order.size());
  recall.reserve(order.size());
  ClassCounts counts;
  for (std::size_t idx : order) {
    const auto& d = dets[idx];
    GtSlot* best = nullptr;
    double best_iou = iou_threshold;
    if (auto it = by_image.find(d.image_id); it != by_image.end()) {
      for (auto& slot : it->second) {
        if (slot.matched) continue;
        const double o = iou(d.box, *slot.box);
        if (o >= best_iou && (best == nullptr || o > best_iou)) {
          best = &slot;
          best_iou = o;
        }
      }
    }
    if (best != nullptr) {
      best->matched = true;
      ++counts.tp;
    } else {
      ++counts.fp;
    }
    precision.push_back(static_cast<double>(counts.tp) / static_cast<double>(counts.tp + counts.fp));
    recall.push_back(npos > 0 ? static_cast<double>(counts.tp) / static_cast<double>(npos) : 0.0);
  }
  counts.fn = npos - counts.tp;

  if (npos == 0) return {0.0, counts};
  return {detail::integrate_envelope(precision, recall, mode), counts};
}

inline double average_precision(std::span<const Detection> dets, std::span<const GroundTruthBox> gts, int class_id,
                                double iou_threshold, ApInterpolation mode = ApInterpolation::AllPoint) {
  return evaluate_class(dets, gts, class_id, iou_threshold, mode).ap;
}

/// Per-class AP averaged over the thresholds, then averaged over every class that
/// has ground truth. Counts are reported at the last threshold.
inline APResult mean_average_precision(std::span<const Detection> dets, std::span<const GroundTruthBox> gts,
                                       std::span<const double> thresholds,
                                       ApInterpolation mode = ApInterpolation::AllPoint) {
  if (thresholds.empty()) fail(ErrorCode::InvariantViolation, "at least one IoU threshold is required");
  for (double t : thresholds) detail::check_threshold(t);

  std::set<int> classes;
  for (const auto& g : gts) classes.insert(g.class_id);
  if (classes.empty()) fail(ErrorCode::EmptyGroundTruth, "no ground-truth boxes");

  APResult result;
  double sum = 0.0;
  for (int c : classes) {
    double ap_sum = 0.0;
    ClassCounts last;
    for (double t : thresholds) {
      auto eval = evaluate_class(dets, gts, c, t, mode);
      ap_sum += eval.ap;
      last = eval.counts;
    }
    const double ap = ap_sum / static_cast<double>(thresholds.size());
    result.per_class_ap[c] = ap;
    result.per_class_counts[c] = last;
    sum += ap;
  }
  result.map = sum / static_cast<double>(classes.size());
  return result;
}

inline std::vector<double> coco_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.5 + 0.05 * i);
  return t;
}

}  // namespace vcm
