#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "rhp/error.hpp"

namespace rhp {

/// Nonnegative function given by linear interpolation between grid nodes,
/// zero outside [x.front(), x.back()]. NaN node values mark gaps: the table is
/// still constructible but every evaluation throws.
class PiecewiseLinear {
 public:
  PiecewiseLinear() = default;

  PiecewiseLinear(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    if (x_.size() < 2 || x_.size() != y_.size())
      throw Error("tabulated function needs at least two nodes and equally many values");
    if (!(x_.front() >= 0.0)) throw Error("tabulated grid must start at a nonnegative time");
    for (std::size_t i = 1; i < x_.size(); ++i) {
      if (!(x_[i] > x_[i - 1]) || !std::isfinite(x_[i]))
        throw Error("tabulated grid must be finite and strictly increasing");
    }
    for (double v : y_) {
      if (std::isnan(v)) {
        gaps_ = true;
        continue;
      }
      if (v < 0.0 || !std::isfinite(v)) throw Error("tabulated values must be finite and nonnegative");
    }
    if (gaps_) return;
    cumulative_.assign(x_.size(), 0.0);
    moment_.assign(x_.size(), 0.0);
    for (std::size_t k = 0; k + 1 < x_.size(); ++k) {
      cumulative_[k + 1] = cumulative_[k] + segment_integral(k, x_[k + 1]);
      moment_[k + 1] = moment_[k] + segment_moment(k, x_[k + 1]);
    }
  }

  bool has_gaps() const noexcept { return gaps_; }
  const std::vector<double>& nodes() const noexcept { return x_; }
  const std::vector<double>& values() const noexcept { return y_; }
  double support_begin() const noexcept { return x_.front(); }
  double support_end() const noexcept { return x_.back(); }

  double value(double t) const {
    check();
    if (t < x_.front() || t > x_.back()) return 0.0;
    const std::size_t k = segment(t);
    return y_[k] + slope(k) * (t - x_[k]);
  }

  /// Integral from -inf to t.
  double integral(double t) const {
    check();
    if (t <= x_.front()) return 0.0;
    if (t >= x_.back()) return cumulative_.back();
    const std::size_t k = segment(t);
    return cumulative_[k] + segment_integral(k, t);
  }

  double total() const {
    check();
    return cumulative_.back();
  }

  /// Integral of s * value(s) from -inf to t.
  double first_moment(double t) const {
    check();
    if (t <= x_.front()) return 0.0;
    if (t >= x_.back()) return moment_.back();
    const std::size_t k = segment(t);
    return moment_[k] + segment_moment(k, t);
  }

  /// Exact supremum of the function over [a, b].
  double sup_on(double a, double b) const {
    check();
    double best = std::max(value(a), value(b));
    auto lo = std::lower_bound(x_.begin(), x_.end(), a);
    auto hi = std::upper_bound(x_.begin(), x_.end(), b);
    for (auto it = lo; it < hi; ++it) best = std::max(best, y_[static_cast<std::size_t>(it - x_.begin())]);
    return best;
  }

  /// Smallest t with integral(t) == target, for target in (0, total()].
  double inverse_integral(double target) const {
    check();
    const double tot = cumulative_.back();
    if (!(target > 0.0)) return x_.front();
    if (target >= tot) target = tot;
    auto it = std::lower_bound(cumulative_.begin() + 1, cumulative_.end(), target);
    std::size_t k = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
    while (k + 1 < x_.size() && cumulative_[k + 1] <= cumulative_[k]) ++k;
    const double r = std::max(0.0, target - cumulative_[k]);
    const double yk = y_[k];
    const double s = slope(k);
    const double disc = std::max(0.0, yk * yk + 2.0 * s * r);
    const double denom = yk + std::sqrt(disc);
    double d = denom > 0.0 ? 2.0 * r / denom : 0.0;
    return std::min(x_[k] + d, x_[k + 1]);
  }

  bool nonincreasing() const {
    check();
    for (std::size_t i = 1; i < y_.size(); ++i)
      if (y_[i] > y_[i - 1]) return false;
    return true;
  }

 private:
  void check() const {
    if (gaps_) throw Error("tabulated function has gaps (NaN nodes); it has no usable density");
  }

  std::size_t segment(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - x_.begin());
    k = k == 0 ? 0 : k - 1;
    return std::min(k, x_.size() - 2);
  }

  double slope(std::size_t k) const { return (y_[k + 1] - y_[k]) / (x_[k + 1] - x_[k]); }

  double segment_integral(std::size_t k, double t) const {
    const double d = t - x_[k];
    return y_[k] * d + 0.5 * slope(k) * d * d;
  }

  double segment_moment(std::size_t k, double t) const {
    const double d = t - x_[k];
    const double s = slope(k);
    return x_[k] * y_[k] * d + 0.5 * (x_[k] * s + y_[k]) * d * d + s * d * d * d / 3.0;
  }

  std::vector<double> x_;
  std::vector<double> y_;
  std::vector<double> cumulative_;
  std::vector<double> moment_;
  bool gaps_ = false;
};

}  // namespace rhp
