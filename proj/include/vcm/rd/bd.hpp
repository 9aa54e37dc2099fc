#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "vcm/core/types.hpp"
#include "vcm/rd/curve.hpp"

namespace vcm {

/// Piecewise cubic Hermite interpolant over strictly increasing knots.
/// Pchip slopes (Fritsch-Carlson) never overshoot the data; Linear gives the
/// piecewise-linear polyline.
class HermiteInterpolant {
 public:
  enum class Kind { Pchip, Linear };

  HermiteInterpolant(std::vector<double> x, std::vector<double> y, Kind kind)
      : x_(std::move(x)), y_(std::move(y)), d_(x_.size(), 0.0) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) fail(ErrorCode::DegenerateCurve, "interpolation needs at least two knots");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1])) fail(ErrorCode::DegenerateCurve, "interpolation knots must be strictly increasing");

    std::vector<double> h(n - 1), delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      delta[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    if (kind == Kind::Linear || n == 2) {
      linear_ = true;
      return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (delta[k - 1] * delta[k] > 0.0) {
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
      }
    }
    d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
  }

  double operator()(double x) const {
    const std::size_t k = segment(x);
    const auto c = coefficients(k);
    const double s = x - x_[k];
    return ((c[3] * s + c[2]) * s + c[1]) * s + c[0];
  }

  /// Exact integral over [a, b], both inside the knot range.
  double integral(double a, double b) const {
    if (b < a) return -integral(b, a);
    double total = 0.0;
    for (std::size_t k = segment(a); k + 1 < x_.size() && x_[k] < b; ++k) {
      const double lo = std::max(a, x_[k]);
      const double hi = std::min(b, x_[k + 1]);
      if (hi > lo) total += antiderivative(k, hi - x_[k]) - antiderivative(k, lo - x_[k]);
    }
    return total;
  }

  double front() const noexcept { return x_.front(); }
  double back() const noexcept { return x_.back(); }

 private:
  static double end_slope(double h0, double h1, double d0, double d1) {
    double d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0) return 0.0;
    if (d0 * d1 < 0.0 && std::abs(d) > std::abs(3.0 * d0)) return 3.0 * d0;
    return d;
  }

  std::size_t segment(double x) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(k, x_.size() - 2);
  }

  // y(s) = c0 + c1 s + c2 s^2 + c3 s^3 with s = x - x_k
  std::array<double, 4> coefficients(std::size_t k) const {
    const double h = x_[k + 1] - x_[k];
    const double m = (y_[k + 1] - y_[k]) / h;
    if (linear_) return {y_[k], m, 0.0, 0.0};
    return {y_[k], d_[k], (3.0 * m - 2.0 * d_[k] - d_[k + 1]) / h, (d_[k] + d_[k + 1] - 2.0 * m) / (h * h)};
  }

  double antiderivative(std::size_t k, double s) const {
    const auto c = coefficients(k);
    return s * (c[0] + s * (c[1] / 2.0 + s * (c[2] / 3.0 + s * c[3] / 4.0)));
  }

  std::vector<double> x_, y_, d_;
  bool linear_ = false;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct BdResult {
  double bd_rate_percent = 0.0;  // negative: test needs fewer bits at equal quality
  double bd_quality = 0.0;       // positive: test reaches higher quality at equal rate
  Interval quality_overlap;
  Interval log_rate_overlap;     // log10(rate)
  bool cubic = true;             // false when a curve had too few points for the cubic fit
};

struct BdOptions {
  std::size_t min_points_for_cubic = 4;
};

namespace detail {

struct PreparedCurve {
  std::vector<double> log_rate;
  std::vector<double> quality;
};

inline PreparedCurve prepare_for_bd(const RDCurve& c, const char* role) {
  auto pts = c.points;
  std::sort(pts.begin(), pts.end(), [](const RDPoint& a, const RDPoint& b) { return a.rate < b.rate; });
  if (pts.size() < 2)
    fail(ErrorCode::DegenerateCurve, std::string(role) + " curve '" + c.label + "' needs at least 2 points");
  PreparedCurve out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!(pts[i].rate > 0.0) || !std::isfinite(pts[i].rate) || !std::isfinite(pts[i].quality))
      fail(ErrorCode::InvariantViolation, std::string(role) + " curve '" + c.label + "' has an invalid point");
    if (i > 0 && !(pts[i].rate > pts[i - 1].rate))
      fail(ErrorCode::DegenerateCurve, std::string(role) + " curve '" + c.label + "' repeats a rate");
    if (i > 0 && !(pts[i].quality > pts[i - 1].quality))
      fail(ErrorCode::DegenerateCurve, std::string(role) + " curve '" + c.label +
                                           "' is not strictly increasing in quality; Pareto-filter it first");
    out.log_rate.push_back(std::log10(pts[i].rate));
    out.quality.push_back(pts[i].quality);
  }
  return out;
}

}  // namespace detail

/// Bjontegaard deltas between two RD curves. Log-rate is interpolated as a
/// function of quality (and quality as a function of log-rate) and the
/// difference is averaged over the overlap interval of the two curves.
inline BdResult bd_metrics(const RDCurve& anchor, const RDCurve& test, const BdOptions& opt = {}) {
  const RDCurve pair[] = {anchor, test};
  detail::common_unit(pair);
  const auto a = detail::prepare_for_bd(anchor, "anchor");
  const auto t = detail::prepare_for_bd(test, "test");
  const bool cubic = a.quality.size() >= opt.min_points_for_cubic && t.quality.size() >= opt.min_points_for_cubic;
  const auto kind = cubic ? HermiteInterpolant::Kind::Pchip : HermiteInterpolant::Kind::Linear;

  BdResult r;
  r.cubic = cubic;
  r.quality_overlap = {std::max(a.quality.front(), t.quality.front()), std::min(a.quality.back(), t.quality.back())};
  r.log_rate_overlap = {std::max(a.log_rate.front(), t.log_rate.front()),
                        std::min(a.log_rate.back(), t.log_rate.back())};
  if (!(r.quality_overlap.hi > r.quality_overlap.lo))
    fail(ErrorCode::NoOverlap, "quality ranges of '" + anchor.label + "' and '" + test.label + "' do not overlap");
  if (!(r.log_rate_overlap.hi > r.log_rate_overlap.lo))
    fail(ErrorCode::NoOverlap, "rate ranges of '" + anchor.label + "' and '" + test.label + "' do not overlap");

  {
    const HermiteInterpolant fa(a.quality, a.log_rate, kind);
    const HermiteInterpolant ft(t.quality, t.log_rate, kind);
    const auto [lo, hi] = r.quality_overlap;
    const double mean_diff = (ft.integral(lo, hi) - fa.integral(lo, hi)) / (hi - lo);
    r.bd_rate_percent = (std::pow(10.0, mean_diff) - 1.0) * 100.0;
  }
  {
    const HermiteInterpolant ga(a.log_rate, a.quality, kind);
    const HermiteInterpolant gt(t.log_rate, t.quality, kind);
    const auto [lo, hi] = r.log_rate_overlap;
    r.bd_quality = (gt.integral(lo, hi) - ga.integral(lo, hi)) / (hi - lo);
  }
  return r;
}

}  // namespace vcm
