#pragma once

#include <cmath>
#include <string>

#include "vcm/core/types.hpp"

namespace vcm {

/// Squared error normalized by pixel count and the squared channel maximum.
template <class T>
double nme_channel(const Plane<T>& ref, const Plane<T>& rec, double max_value) {
  if (ref.width != rec.width || ref.height != rec.height)
    fail(ErrorCode::DimMismatch, "plane " + std::to_string(ref.width) + "x" + std::to_string(ref.height) + " vs " +
                                     std::to_string(rec.width) + "x" + std::to_string(rec.height));
  if (!(max_value > 0.0)) fail(ErrorCode::InvariantViolation, "max_value must be > 0");
  if (ref.samples.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < ref.samples.size(); ++i) {
    const double d = static_cast<double>(rec.samples[i]) - static_cast<double>(ref.samples[i]);
    sum += d * d;
  }
  return sum / (static_cast<double>(ref.samples.size()) * max_value * max_value);
}

inline double blend_channel_nme(double nme_y, double nme_cb, double nme_cr, const WeightConfig& wc) {
  validate(wc);
  return wc.w_y * nme_y + wc.w_cb * nme_cb + wc.w_cr * nme_cr;
}

template <class T>
double human_distortion(const ImagePair<T>& pair, const WeightConfig& wc) {
  validate(wc);
  return blend_channel_nme(nme_channel(pair.reference[0], pair.reconstruction[0], pair.max_value[0]),
                           nme_channel(pair.reference[1], pair.reconstruction[1], pair.max_value[1]),
                           nme_channel(pair.reference[2], pair.reconstruction[2], pair.max_value[2]), wc);
}

struct WeightedScore {
  double d_m = 0.0;
  double d_h = 0.0;
  double d = 0.0;
  double wmap = 0.0;
};

/// D = (1 - w) * (1 - machine_metric) + w * D_h, and wmAP = 1 - D.
inline WeightedScore weighted_score(double machine_metric, double human_distortion_value, const WeightConfig& wc) {
  validate(wc);
  if (!(machine_metric >= 0.0 && machine_metric <= 1.0))
    fail(ErrorCode::InvariantViolation, "machine metric must be in [0,1]");
  WeightedScore s;
  s.d_m = 1.0 - machine_metric;
  s.d_h = human_distortion_value;
  s.d = (1.0 - wc.w) * s.d_m + wc.w * s.d_h;
  s.wmap = 1.0 - s.d;
  return s;
}

template <class T>
WeightedScore weighted_score(double machine_metric, const ImagePair<T>& pair, const WeightConfig& wc) {
  return weighted_score(machine_metric, human_distortion(pair, wc), wc);
}

inline double semantic_distortion(double miou) {
  if (!(miou > 0.0 && miou <= 1.0)) fail(ErrorCode::DomainError, "mean IoU must be in (0,1], got " + std::to_string(miou));
  return -10.0 * std::log(miou);
}

struct RdoBlend {
  double distortion = 0.0;
  double lambda = 0.0;
};

inline void validate(const HybridRdoConfig& cfg) {
  if (!(cfg.theta >= 0.0 && cfg.theta <= 1.0)) fail(ErrorCode::InvariantViolation, "theta must be in [0,1]");
  if (!(cfg.lambda_sse > 0.0) || !(cfg.lambda_dmiou > 0.0))
    fail(ErrorCode::InvariantViolation, "lambdas must be > 0");
}

inline RdoBlend hybrid_rdo_blend(double sse, double d_miou, const HybridRdoConfig& cfg) {
  validate(cfg);
  if (!(sse >= 0.0) || !(d_miou >= 0.0)) fail(ErrorCode::InvariantViolation, "distortions must be >= 0");
  return {cfg.theta * sse + (1.0 - cfg.theta) * d_miou, cfg.theta * cfg.lambda_sse + (1.0 - cfg.theta) * cfg.lambda_dmiou};
}

}  // namespace vcm
