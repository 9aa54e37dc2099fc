#pragma once

#include <algorithm>
#include <map>
#include <span>
#include <tuple>
#include <vector>

#include "vcm/core/types.hpp"
#include "vcm/metrics/detection.hpp"

namespace vcm {

struct MotaResult {
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t idsw = 0;
  std::size_t gt = 0;
  std::size_t matches = 0;
  double mota = 0.0;

  MotaResult& operator+=(const MotaResult& o) {
    fn += o.fn;
    fp += o.fp;
    idsw += o.idsw;
    gt += o.gt;
    matches += o.matches;
    mota = gt > 0 ? 1.0 - static_cast<double>(fn + fp + idsw) / static_cast<double>(gt) : 0.0;
    return *this;
  }
};

/// CLEAR-MOT accounting with per-frame greedy matching: candidate pairs of the
/// same class with IoU >= threshold are taken in descending IoU order (ties by
/// ground-truth then prediction input order), each box used at most once. An
/// identity switch is a matched ground-truth track whose predicted track id
/// differs from the one it was last matched to.
inline MotaResult mota(std::span<const TrackedBox> pred, std::span<const TrackedBox> gt, double iou_threshold = 0.5) {
  detail::check_threshold(iou_threshold);
  if (gt.empty()) fail(ErrorCode::EmptyGroundTruth, "no ground-truth track boxes");

  std::map<int, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> frames;
  for (std::size_t i = 0; i < gt.size(); ++i) frames[gt[i].frame_index].first.push_back(i);
  for (std::size_t i = 0; i < pred.size(); ++i) frames[pred[i].frame_index].second.push_back(i);

  MotaResult r;
  r.gt = gt.size();
  std::map<long long, long long> last_assignment;  // gt track id -> predicted track id

  struct Candidate {
    double iou;
    std::size_t g, p;  // positions within the frame lists
  };
  for (const auto& [frame, lists] : frames) {
    const auto& [gi, pi] = lists;
    std::vector<Candidate> cands;
    for (std::size_t a = 0; a < gi.size(); ++a)
      for (std::size_t b = 0; b < pi.size(); ++b) {
        const auto& g = gt[gi[a]];
        const auto& p = pred[pi[b]];
        if (g.class_id != p.class_id) continue;
        const double o = iou(g.box, p.box);
        if (o >= iou_threshold) cands.push_back({o, a, b});
      }
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
      if (x.iou != y.iou) return x.iou > y.iou;
      return std::tie(x.g, x.p) < std::tie(y.g, y.p);
    });

    std::vector<bool> g_used(gi.size(), false), p_used(pi.size(), false);
    std::size_t matched = 0;
    for (const auto& c : cands) {
      if (g_used[c.g] || p_used[c.p]) continue;
      g_used[c.g] = p_used[c.p] = true;
      ++matched;
      const auto gt_id = gt[gi[c.g]].track_id;
      const auto pred_id = pred[pi[c.p]].track_id;
      if (auto it = last_assignment.find(gt_id); it != last_assignment.end() && it->second != pred_id) ++r.idsw;
      last_assignment[gt_id] = pred_id;
    }
    r.matches += matched;
    r.fn += gi.size() - matched;
    r.fp += pi.size() - matched;
  }
  r.mota = 1.0 - static_cast<double>(r.fn + r.fp + r.idsw) / static_cast<double>(r.gt);
  return r;
}

}  // namespace vcm
