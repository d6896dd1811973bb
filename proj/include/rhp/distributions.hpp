#pragma once

// Interarrival laws of the immigrant renewal process and excitation kernels
// of the offspring processes.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "rhp/error.hpp"
#include "rhp/piecewise_linear.hpp"
#include "rhp/random.hpp"

namespace rhp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Survival floor below which a tabulated hazard is reported as undefined
/// rather than extrapolated.
inline constexpr double kSurvivalFloor = 1e-12;

struct ExponentialLaw {
  double rate;
};
struct GammaLaw {
  double shape;
  double rate;
};
struct WeibullLaw {
  double shape;
  double scale;
};
struct LognormalLaw {
  double mu;
  double sigma;
};
/// Density by linear interpolation on `grid`, rescaled to carry mass
/// 1 - tail_mass. With tail_mass > 0 the law continues past the last node
/// with a Pareto survival tail_mass * (grid.back()/t)^tail_index; the mean
/// is infinite when tail_index <= 1.
struct TabulatedLaw {
  std::vector<double> grid;
  std::vector<double> density;
  double tail_mass = 0.0;
  double tail_index = 0.0;
};

class RenewalModel {
 public:
  using Family = std::variant<ExponentialLaw, GammaLaw, WeibullLaw, LognormalLaw, TabulatedLaw>;

  explicit RenewalModel(Family family) : family_(std::move(family)) { init(); }

  static RenewalModel exponential(double rate) { return RenewalModel(ExponentialLaw{rate}); }
  static RenewalModel gamma(double shape, double rate) { return RenewalModel(GammaLaw{shape, rate}); }
  static RenewalModel weibull(double shape, double scale) { return RenewalModel(WeibullLaw{shape, scale}); }
  static RenewalModel lognormal(double mu, double sigma) { return RenewalModel(LognormalLaw{mu, sigma}); }
  static RenewalModel tabulated(std::vector<double> grid, std::vector<double> density, double tail_mass = 0.0,
                                double tail_index = 0.0) {
    return RenewalModel(TabulatedLaw{std::move(grid), std::move(density), tail_mass, tail_index});
  }

  const Family& family() const noexcept { return family_; }

  std::string_view family_name() const noexcept {
    constexpr std::string_view names[] = {"exponential", "gamma", "weibull", "lognormal", "tabulated"};
    return names[family_.index()];
  }

  bool is_exponential() const noexcept { return std::holds_alternative<ExponentialLaw>(family_); }

  /// False for tabulated laws with gaps.
  bool has_density() const noexcept { return !table_.has_gaps(); }

  double density(double t) const {
    if (t < 0.0) return 0.0;
    return std::visit([&](const auto& law) { return density_of(law, t); }, family_);
  }

  double cdf(double t) const {
    if (t <= 0.0) return 0.0;
    return std::visit([&](const auto& law) { return cdf_of(law, t); }, family_);
  }

  /// 1 - F(t), computed without cancellation for the parametric families.
  double survival(double t) const {
    if (t <= 0.0) return 1.0;
    return std::visit([&](const auto& law) { return survival_of(law, t); }, family_);
  }

  /// Cumulative hazard -log(1 - F(t)).
  double cumulative_hazard(double t) const {
    if (t <= 0.0) return 0.0;
    if (const auto* e = std::get_if<ExponentialLaw>(&family_)) return e->rate * t;
    if (const auto* w = std::get_if<WeibullLaw>(&family_)) return std::pow(t / w->scale, w->shape);
    const double s = survival(t);
    if (!(s > 0.0)) throw Error("cumulative hazard undefined beyond support (survival is zero at t=" + std::to_string(t) + ")");
    return -std::log(s);
  }

  /// Integral of the survival function over [0, t].
  double integrated_survival(double t) const {
    if (t <= 0.0) return 0.0;
    return std::visit([&](const auto& law) { return integrated_survival_of(law, t); }, family_);
  }

  /// E[tau] = 1/m; +inf when the law has no finite mean.
  double mean_interarrival() const noexcept { return mean_; }

  /// m = 1/E[tau]; zero when the mean is infinite.
  double rate() const noexcept { return std::isfinite(mean_) ? 1.0 / mean_ : 0.0; }

  /// mu(t) = f(t) / (1 - F(t)).
  double hazard(double t) const {
    if (t < 0.0) throw Error("hazard evaluated at negative elapsed time");
    return std::visit([&](const auto& law) { return hazard_of(law, t); }, family_);
  }

  /// Supremum of the hazard over elapsed times [a, b]; nullopt when no
  /// finite bound is available for the family (tabulated laws, or decreasing
  /// hazards that are unbounded at zero with a == 0).
  std::optional<double> hazard_sup(double a, double b) const {
    return std::visit([&](const auto& law) { return hazard_sup_of(law, a, b); }, family_);
  }

  /// Draw of tau.
  double sample(RandomStream& rng) const {
    return std::visit([&](const auto& law) { return sample_of(law, rng); }, family_);
  }

  /// Draw from the equilibrium (stationary-delay) density f0 = m (1 - F).
  double sample_equilibrium(RandomStream& rng) const {
    if (!std::isfinite(mean_)) throw Error("stationary delay requires a finite mean interarrival time");
    if (const auto* e = std::get_if<ExponentialLaw>(&family_)) return rng.exponential(e->rate);
    return invert_equilibrium(rng.uniform());
  }

  /// Survival of the equilibrium delay, 1 - F0(t) = m * integral_t^inf (1 - F).
  double equilibrium_survival(double t) const {
    if (!std::isfinite(mean_)) throw Error("stationary delay requires a finite mean interarrival time");
    if (t <= 0.0) return 1.0;
    if (const auto* e = std::get_if<ExponentialLaw>(&family_)) return std::exp(-e->rate * t);
    return std::max(0.0, 1.0 - integrated_survival(t) / mean_);
  }

  double equilibrium_hazard(double t) const {
    if (const auto* e = std::get_if<ExponentialLaw>(&family_)) return e->rate;
    const double s0 = equilibrium_survival(t);
    if (s0 < kSurvivalFloor) throw Error("stationary-delay hazard undefined: equilibrium survival below floor");
    return survival(t) / mean_ / s0;
  }

  double equilibrium_cumulative_hazard(double t) const {
    if (const auto* e = std::get_if<ExponentialLaw>(&family_)) return e->rate * std::max(t, 0.0);
    const double s0 = equilibrium_survival(t);
    if (s0 < kSurvivalFloor) throw Error("stationary-delay cumulative hazard undefined: equilibrium survival below floor");
    return -std::log(s0);
  }

 private:
  static constexpr double pi() { return boost::math::constants::pi<double>(); }

  void init() {
    std::visit([this](auto& law) { validate(law); }, family_);
    mean_ = std::visit([this](const auto& law) { return mean_of(law); }, family_);
  }

  // -- validation -----------------------------------------------------------
  static void positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(std::string(what) + " must be finite and > 0");
  }
  void validate(ExponentialLaw& l) { positive(l.rate, "exponential rate"); }
  void validate(GammaLaw& l) {
    positive(l.shape, "gamma shape");
    positive(l.rate, "gamma rate");
  }
  void validate(WeibullLaw& l) {
    positive(l.shape, "weibull shape");
    positive(l.scale, "weibull scale");
  }
  void validate(LognormalLaw& l) {
    if (!std::isfinite(l.mu)) throw Error("lognormal mu must be finite");
    positive(l.sigma, "lognormal sigma");
    lognormal_mode_ = lognormal_hazard_mode(l);
  }
  void validate(TabulatedLaw& l) {
    if (!(l.tail_mass >= 0.0 && l.tail_mass < 1.0)) throw Error("tabulated tail_mass must lie in [0, 1)");
    if (l.tail_mass > 0.0) positive(l.tail_index, "tabulated tail_index");
    PiecewiseLinear raw(l.grid, l.density);
    if (raw.has_gaps()) {
      table_ = std::move(raw);
      return;
    }
    const double mass = raw.total();
    if (!(mass > 0.0)) throw Error("tabulated density has zero mass");
    if (l.tail_mass > 0.0 && !(l.grid.back() > 0.0)) throw Error("tabulated tail needs a positive last node");
    const double scale = (1.0 - l.tail_mass) / mass;
    std::vector<double> y = l.density;
    for (double& v : y) v *= scale;
    l.density = y;
    table_ = PiecewiseLinear(l.grid, std::move(y));
  }

  // -- density --------------------------------------------------------------
  static double density_of(const ExponentialLaw& l, double t) { return l.rate * std::exp(-l.rate * t); }
  static double density_of(const GammaLaw& l, double t) {
    if (t == 0.0) return l.shape == 1.0 ? l.rate : (l.shape < 1.0 ? kInf : 0.0);
    return boost::math::gamma_p_derivative(l.shape, l.rate * t) * l.rate;
  }
  static double density_of(const WeibullLaw& l, double t) {
    const double x = t / l.scale;
    if (t == 0.0) return l.shape == 1.0 ? 1.0 / l.scale : (l.shape < 1.0 ? kInf : 0.0);
    return l.shape / l.scale * std::pow(x, l.shape - 1.0) * std::exp(-std::pow(x, l.shape));
  }
  static double density_of(const LognormalLaw& l, double t) {
    if (t == 0.0) return 0.0;
    const double z = (std::log(t) - l.mu) / l.sigma;
    return std::exp(-0.5 * z * z) / (t * l.sigma * std::sqrt(2.0 * pi()));
  }
  double density_of(const TabulatedLaw& l, double t) const {
    const double end = table_.support_end();
    if (t <= end) return table_.value(t);
    if (l.tail_mass == 0.0) return 0.0;
    return l.tail_mass * l.tail_index * std::pow(end / t, l.tail_index) / t;
  }

  // -- cdf / survival -------------------------------------------------------
  static double cdf_of(const ExponentialLaw& l, double t) { return -std::expm1(-l.rate * t); }
  static double cdf_of(const GammaLaw& l, double t) { return boost::math::gamma_p(l.shape, l.rate * t); }
  static double cdf_of(const WeibullLaw& l, double t) { return -std::expm1(-std::pow(t / l.scale, l.shape)); }
  static double cdf_of(const LognormalLaw& l, double t) {
    return 0.5 * boost::math::erfc(-(std::log(t) - l.mu) / (l.sigma * std::sqrt(2.0)));
  }
  double cdf_of(const TabulatedLaw& l, double t) const { return 1.0 - survival_of(l, t); }

  static double survival_of(const ExponentialLaw& l, double t) { return std::exp(-l.rate * t); }
  static double survival_of(const GammaLaw& l, double t) { return boost::math::gamma_q(l.shape, l.rate * t); }
  static double survival_of(const WeibullLaw& l, double t) { return std::exp(-std::pow(t / l.scale, l.shape)); }
  static double survival_of(const LognormalLaw& l, double t) {
    return 0.5 * boost::math::erfc((std::log(t) - l.mu) / (l.sigma * std::sqrt(2.0)));
  }
  double survival_of(const TabulatedLaw& l, double t) const {
    const double end = table_.support_end();
    if (t <= end) return std::max(0.0, 1.0 - table_.integral(t));
    if (l.tail_mass == 0.0) return 0.0;
    return l.tail_mass * std::pow(end / t, l.tail_index);
  }

  // -- integrated survival --------------------------------------------------
  static double integrated_survival_of(const ExponentialLaw& l, double t) { return -std::expm1(-l.rate * t) / l.rate; }
  static double integrated_survival_of(const GammaLaw& l, double t) {
    const double x = l.rate * t;
    return t * boost::math::gamma_q(l.shape, x) + l.shape / l.rate * boost::math::gamma_p(l.shape + 1.0, x);
  }
  static double integrated_survival_of(const WeibullLaw& l, double t) {
    const double x = std::pow(t / l.scale, l.shape);
    return l.scale * std::tgamma(1.0 + 1.0 / l.shape) * boost::math::gamma_p(1.0 / l.shape, x);
  }
  static double integrated_survival_of(const LognormalLaw& l, double t) {
    const double z = (std::log(t) - l.mu - l.sigma * l.sigma) / l.sigma;
    const double partial_moment = std::exp(l.mu + 0.5 * l.sigma * l.sigma) * 0.5 * boost::math::erfc(-z / std::sqrt(2.0));
    return t * survival_of(l, t) + partial_moment;
  }
  double integrated_survival_of(const TabulatedLaw& l, double t) const {
    const double end = table_.support_end();
    const double upto = std::min(t, end);
    double body = upto * survival_of(l, upto) + table_.first_moment(upto);
    if (t <= end || l.tail_mass == 0.0) return body;
    const double g = l.tail_index;
    const double scale = l.tail_mass * std::pow(end, g);
    if (g == 1.0) return body + scale * std::log(t / end);
    return body + scale * (std::pow(t, 1.0 - g) - std::pow(end, 1.0 - g)) / (1.0 - g);
  }

  // -- mean -----------------------------------------------------------------
  static double mean_of(const ExponentialLaw& l) { return 1.0 / l.rate; }
  static double mean_of(const GammaLaw& l) { return l.shape / l.rate; }
  static double mean_of(const WeibullLaw& l) { return l.scale * std::tgamma(1.0 + 1.0 / l.shape); }
  static double mean_of(const LognormalLaw& l) { return std::exp(l.mu + 0.5 * l.sigma * l.sigma); }
  double mean_of(const TabulatedLaw& l) const {
    if (table_.has_gaps()) return std::numeric_limits<double>::quiet_NaN();
    if (l.tail_mass > 0.0 && l.tail_index <= 1.0) return kInf;
    const double end = table_.support_end();
    double m = integrated_survival_of(l, end);
    if (l.tail_mass > 0.0) m += l.tail_mass * end / (l.tail_index - 1.0);
    return m;
  }

  // -- hazard ---------------------------------------------------------------
  static double hazard_of(const ExponentialLaw& l, double) { return l.rate; }
  static double hazard_of(const WeibullLaw& l, double t) {
    if (t == 0.0) return l.shape == 1.0 ? 1.0 / l.scale : (l.shape < 1.0 ? kInf : 0.0);
    return l.shape / l.scale * std::pow(t / l.scale, l.shape - 1.0);
  }
  static double hazard_of(const GammaLaw& l, double t) {
    if (t == 0.0) return density_of(l, 0.0);
    const double s = survival_of(l, t);
    if (!(s > 0.0)) throw Error("hazard undefined beyond support (survival underflows at t=" + std::to_string(t) + ")");
    return density_of(l, t) / s;
  }
  static double hazard_of(const LognormalLaw& l, double t) {
    if (t == 0.0) return 0.0;
    const double s = survival_of(l, t);
    if (!(s > 0.0)) throw Error("hazard undefined beyond support (survival underflows at t=" + std::to_string(t) + ")");
    return density_of(l, t) / s;
  }
  double hazard_of(const TabulatedLaw& l, double t) const {
    const double s = survival_of(l, t);
    if (s < kSurvivalFloor)
      throw Error("hazard undefined beyond support (1 - F(t) < 1e-12 at t=" + std::to_string(t) + ")");
    return density_of(l, t) / s;
  }

  static std::optional<double> hazard_sup_of(const ExponentialLaw& l, double, double) { return l.rate; }
  static std::optional<double> hazard_sup_of(const WeibullLaw& l, double a, double b) {
    if (l.shape >= 1.0) return hazard_of(l, b);
    if (a > 0.0) return hazard_of(l, a);
    return std::nullopt;
  }
  static std::optional<double> hazard_sup_of(const GammaLaw& l, double a, double b) {
    if (l.shape >= 1.0) {
      // Increasing hazard bounded above by the rate.
      const double s = survival_of(l, b);
      return s > 0.0 ? std::min(l.rate, density_of(l, b) / s) : l.rate;
    }
    if (a > 0.0) return hazard_of(l, a);
    return std::nullopt;
  }
  std::optional<double> hazard_sup_of(const LognormalLaw& l, double a, double b) const {
    // The lognormal hazard is unimodal.
    return hazard_of(l, std::clamp(lognormal_mode_, a, b));
  }
  static std::optional<double> hazard_sup_of(const TabulatedLaw&, double, double) { return std::nullopt; }

  // Mode of the lognormal hazard: solves phi(z)/Q(z) - z = sigma in the
  // standardized log time z.
  static double lognormal_hazard_mode(const LognormalLaw& l) {
    auto g = [](double z) {
      if (z > 30.0) return 1.0 / z - 2.0 / (z * z * z) + 10.0 / std::pow(z, 5);
      const double q = 0.5 * boost::math::erfc(z / std::sqrt(2.0));
      const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * pi());
      return phi / q - z;
    };
    double lo = -40.0;
    double hi = 1e6;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (g(mid) > l.sigma) lo = mid;
      else hi = mid;
    }
    return std::exp(l.mu + l.sigma * 0.5 * (lo + hi));
  }

  // -- sampling -------------------------------------------------------------
  static double sample_of(const ExponentialLaw& l, RandomStream& rng) { return rng.exponential(l.rate); }
  static double sample_of(const WeibullLaw& l, RandomStream& rng) {
    return l.scale * std::pow(-std::log(rng.uniform()), 1.0 / l.shape);
  }
  static double sample_of(const GammaLaw& l, RandomStream& rng) { return rng.gamma(l.shape, l.rate); }
  static double sample_of(const LognormalLaw& l, RandomStream& rng) {
    return std::exp(l.mu + l.sigma * rng.standard_normal());
  }
  double sample_of(const TabulatedLaw& l, RandomStream& rng) const {
    const double u = rng.uniform();
    const double body = 1.0 - l.tail_mass;
    if (u <= body) return table_.inverse_integral(u);
    const double v = 1.0 - u;  // in (0, tail_mass)
    return table_.support_end() * std::pow(l.tail_mass / v, 1.0 / l.tail_index);
  }

  // Solves m * integrated_survival(t) = u by bracketing and bisection/Newton.
  double invert_equilibrium(double u) const {
    const double target = u * mean_;
    double lo = 0.0;
    double hi = mean_;
    while (integrated_survival(hi) < target) {
      lo = hi;
      hi *= 2.0;
      if (!std::isfinite(hi)) throw Error("stationary delay inversion failed to bracket");
    }
    double t = 0.5 * (lo + hi);
    for (int i = 0; i < 200; ++i) {
      const double r = integrated_survival(t) - target;
      if (r > 0.0) hi = t;
      else lo = t;
      const double s = survival(t);
      double next = s > 0.0 ? t - r / s : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 1e-15 * std::max(1.0, t)) return next;
      t = next;
      if (hi - lo <= 1e-15 * std::max(1.0, hi)) break;
    }
    return t;
  }

  Family family_;
  PiecewiseLinear table_;
  double mean_ = 0.0;
  double lognormal_mode_ = 0.0;
};

/// mu(t) = f(t) / (1 - F(t)) of the interarrival law.
inline double hazard_at(const RenewalModel& model, double t) { return model.hazard(t); }

inline double sample_interarrival(const RenewalModel& model, RandomStream& rng) { return model.sample(rng); }

// ---------------------------------------------------------------------------

/// h(t) = alpha * beta * exp(-beta t).
struct ExponentialKernelLaw {
  double alpha;
  double beta;
};
/// h by linear interpolation on a grid, zero outside it.
struct TabulatedKernelLaw {
  std::vector<double> grid;
  std::vector<double> values;
};

/// Excitation kernel h with branching ratio alpha = integral of h. The type
/// admits any finite alpha; kernel_mass() enforces subcriticality.
class ExcitationKernel {
 public:
  using Family = std::variant<ExponentialKernelLaw, TabulatedKernelLaw>;

  explicit ExcitationKernel(Family family) : family_(std::move(family)) {
    if (auto* e = std::get_if<ExponentialKernelLaw>(&family_)) {
      if (!(e->alpha >= 0.0) || !std::isfinite(e->alpha)) throw Error("kernel alpha must be finite and >= 0");
      if (!(e->beta > 0.0) || !std::isfinite(e->beta)) throw Error("kernel beta must be finite and > 0");
      alpha_ = e->alpha;
    } else {
      auto& t = std::get<TabulatedKernelLaw>(family_);
      table_ = PiecewiseLinear(t.grid, t.values);
      alpha_ = table_.total();
    }
  }

  static ExcitationKernel exponential(double alpha, double beta) {
    return ExcitationKernel(ExponentialKernelLaw{alpha, beta});
  }
  static ExcitationKernel tabulated(std::vector<double> grid, std::vector<double> values) {
    return ExcitationKernel(TabulatedKernelLaw{std::move(grid), std::move(values)});
  }
  static ExcitationKernel zero() { return exponential(0.0, 1.0); }

  const Family& family() const noexcept { return family_; }
  std::string_view family_name() const noexcept { return family_.index() == 0 ? "exponential" : "tabulated"; }
  const ExponentialKernelLaw* as_exponential() const noexcept { return std::get_if<ExponentialKernelLaw>(&family_); }

  /// Integral of h over [0, inf), unchecked.
  double alpha() const noexcept { return alpha_; }

  double value(double t) const {
    if (t < 0.0) return 0.0;
    if (const auto* e = as_exponential()) return e->alpha * e->beta * std::exp(-e->beta * t);
    return table_.value(t);
  }

  /// Integral of h over [0, t].
  double cumulative(double t) const {
    if (t <= 0.0) return 0.0;
    if (const auto* e = as_exponential()) return -e->alpha * std::expm1(-e->beta * t);
    return table_.integral(t);
  }

  /// Exact supremum of h over [a, b].
  double sup_on(double a, double b) const {
    if (b < 0.0) return 0.0;
    a = std::max(a, 0.0);
    if (as_exponential()) return value(a);
    return table_.sup_on(a, b);
  }

  bool nonincreasing() const { return as_exponential() != nullptr || table_.nonincreasing(); }

  /// Draw from the normalized density h / alpha.
  double sample_displacement(RandomStream& rng) const {
    if (!(alpha_ > 0.0)) throw Error("degenerate kernel has no offspring (alpha = 0)");
    if (const auto* e = as_exponential()) return rng.exponential(e->beta);
    return table_.inverse_integral(rng.uniform() * alpha_);
  }

 private:
  Family family_;
  PiecewiseLinear table_;
  double alpha_ = 0.0;
};

/// Branching ratio; throws unless it is < 1.
inline double kernel_mass(const ExcitationKernel& kernel) {
  const double a = kernel.alpha();
  if (!(a < 1.0)) throw Error("branching ratio must be < 1 (got alpha=" + std::to_string(a) + "; subcriticality violated)");
  return a;
}

inline double sample_offspring_displacement(const ExcitationKernel& kernel, RandomStream& rng) {
  return kernel.sample_displacement(rng);
}

}  // namespace rhp
