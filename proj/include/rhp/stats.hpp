#pragma once

// Goodness-of-fit statistics used by the validation harness: one- and
// two-sample Kolmogorov–Smirnov tests and the chi-square test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "rhp/error.hpp"

namespace rhp::stats {

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;  // sample variance
  double standard_error = 0.0;
};

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  double m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double d = x - s.mean;
    s.mean += d / static_cast<double>(k);
    m2 += d * (x - s.mean);
  }
  if (s.n > 1) s.variance = m2 / static_cast<double>(s.n - 1);
  if (s.n > 0) s.standard_error = std::sqrt(s.variance / static_cast<double>(s.n));
  return s;
}

/// P(K > x) for the limiting Kolmogorov distribution.
inline double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 1.18) {
    // Theta-function form converges fast for small x.
    const double pi = std::numbers::pi;
    const double w = -pi * pi / (8.0 * x * x);
    double cdf = 0.0;
    for (int k = 1; k <= 20; ++k) {
      const double j = 2.0 * k - 1.0;
      cdf += std::exp(j * j * w);
    }
    return 1.0 - std::sqrt(2.0 * pi) / x * cdf;
  }
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    q += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-18) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

/// P(D_n < d) exactly (Marsaglia, Tsang & Wang 2003).
inline double kolmogorov_exact_cdf(std::size_t n, double d) {
  if (d <= 0.0) return 0.0;
  if (d >= 1.0) return 1.0;
  const double nd = static_cast<double>(n) * d;
  const auto k = static_cast<std::size_t>(std::floor(nd)) + 1;
  const std::size_t m = 2 * k - 1;
  const double h = static_cast<double>(k) - nd;
  using Matrix = std::vector<double>;
  Matrix H(m * m, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i + 1 >= j) H[i * m + j] = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    H[i * m] -= std::pow(h, static_cast<double>(i + 1));
    H[(m - 1) * m + i] -= std::pow(h, static_cast<double>(m - i));
  }
  H[(m - 1) * m] += (2.0 * h - 1.0 > 0.0 ? std::pow(2.0 * h - 1.0, static_cast<double>(m)) : 0.0);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (i + 1 > j)
        for (std::size_t g = 1; g <= i + 1 - j; ++g) H[i * m + j] /= static_cast<double>(g);

  auto multiply = [m](const Matrix& a, const Matrix& b) {
    Matrix c(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t l = 0; l < m; ++l) {
        const double ail = a[i * m + l];
        if (ail == 0.0) continue;
        for (std::size_t j = 0; j < m; ++j) c[i * m + j] += ail * b[l * m + j];
      }
    return c;
  };
  // Q = H^n by repeated squaring, tracking a decimal exponent.
  std::function<void(std::size_t, Matrix&, int&)> power = [&](std::size_t p, Matrix& out, int& exponent) {
    if (p == 1) {
      out = H;
      exponent = 0;
      return;
    }
    Matrix half;
    int half_exp = 0;
    power(p / 2, half, half_exp);
    out = multiply(half, half);
    exponent = 2 * half_exp;
    if (p % 2 == 1) out = multiply(H, out);
    if (out[(m / 2) * m + m / 2] > 1e140) {
      for (double& v : out) v *= 1e-140;
      exponent += 140;
    }
  };
  Matrix Q;
  int exponent = 0;
  power(n, Q, exponent);
  double s = Q[(k - 1) * m + (k - 1)];
  for (std::size_t i = 1; i <= n; ++i) {
    s = s * static_cast<double>(i) / static_cast<double>(n);
    if (s < 1e-140) {
      s *= 1e140;
      exponent -= 140;
    }
  }
  return std::clamp(s * std::pow(10.0, exponent), 0.0, 1.0);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::size_t m = 0;  // second sample size (two-sample only)
};

/// Samples below this size (effective size for two samples) get exact p-values.
inline constexpr std::size_t kExactKsBelow = 50;

/// One-sample KS test of `sample` against a continuous CDF.
inline KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw Error("KS test needs a nonempty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  KsResult r;
  r.statistic = d;
  r.n = sample.size();
  r.p_value = sample.size() < kExactKsBelow ? 1.0 - kolmogorov_exact_cdf(sample.size(), d)
                                            : kolmogorov_survival(std::sqrt(n) * d);
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  return r;
}

/// Two-sample KS statistic sup |F_a - F_b|, with ties handled by stepping
/// over each distinct value.
inline double ks_two_sample_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (j >= b.size()) x = a[i];
    else if (i >= a.size()) x = b[j];
    else x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

/// P(D_{m,n} < d) for continuous data by lattice-path counting.
inline double smirnov_exact_cdf(std::size_t m, std::size_t n, double d) {
  if (m > n) std::swap(m, n);
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double q = (0.5 + std::floor(d * md * nd - 1e-7)) / (md * nd);
  std::vector<double> u(n + 1);
  for (std::size_t j = 0; j <= n; ++j) u[j] = static_cast<double>(j) / nd > q ? 0.0 : 1.0;
  for (std::size_t i = 1; i <= m; ++i) {
    const double w = static_cast<double>(i) / static_cast<double>(i + n);
    u[0] = static_cast<double>(i) / md > q ? 0.0 : w * u[0];
    for (std::size_t j = 1; j <= n; ++j)
      u[j] = std::abs(static_cast<double>(i) / md - static_cast<double>(j) / nd) > q ? 0.0 : w * u[j] + u[j - 1];
  }
  return std::clamp(u[n], 0.0, 1.0);
}

/// Two-sample KS test. For discrete data (counts) the p-value is
/// conservative.
inline KsResult ks_two_sample(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) throw Error("two-sample KS test needs nonempty samples");
  KsResult r;
  r.statistic = ks_two_sample_statistic(a, b);
  r.n = a.size();
  r.m = b.size();
  const double ne = static_cast<double>(a.size()) * static_cast<double>(b.size()) /
                    static_cast<double>(a.size() + b.size());
  if (ne < static_cast<double>(kExactKsBelow)) {
    r.p_value = 1.0 - smirnov_exact_cdf(a.size(), b.size(), r.statistic);
  } else {
    r.p_value = kolmogorov_survival(std::sqrt(ne) * r.statistic);
  }
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  return r;
}

/// Asymptotic critical value of the two-sample statistic at `level`.
inline double ks_two_sample_critical(std::size_t n, std::size_t m, double level) {
  const double c = std::sqrt(-0.5 * std::log(level / 2.0));
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  return c * std::sqrt((nd + md) / (nd * md));
}

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t dof = 0;
  std::size_t bins = 0;  // after pooling
};

/// Chi-square goodness of fit of integer-valued data. observed[k] counts the
/// value k; probabilities[k] is its model probability. Mass beyond the last
/// listed value forms an overflow bin. Adjacent bins are pooled from the
/// right until each expected count is at least `min_expected`.
inline ChiSquareResult chi_square_gof(const std::vector<std::size_t>& observed, const std::vector<double>& probabilities,
                                      std::size_t fitted_parameters = 0, double min_expected = 5.0) {
  double total = 0.0;
  for (auto c : observed) total += static_cast<double>(c);
  if (total <= 0.0) throw Error("chi-square test needs observations");
  const std::size_t k = std::max(observed.size(), probabilities.size());
  std::vector<double> obs(k + 1, 0.0);
  std::vector<double> expct(k + 1, 0.0);
  double listed = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    obs[i] = i < observed.size() ? static_cast<double>(observed[i]) : 0.0;
    const double p = i < probabilities.size() ? probabilities[i] : 0.0;
    expct[i] = p * total;
    listed += p;
  }
  // Values beyond the probability list go to the overflow bin.
  if (observed.size() > probabilities.size()) {
    for (std::size_t i = probabilities.size(); i < observed.size(); ++i) {
      obs[k] += obs[i];
      obs[i] = 0.0;
    }
  }
  expct[k] = std::max(0.0, 1.0 - listed) * total;

  std::vector<double> po;
  std::vector<double> pe;
  double acc_o = 0.0;
  double acc_e = 0.0;
  for (std::size_t i = k + 1; i-- > 0;) {
    acc_o += obs[i];
    acc_e += expct[i];
    if (acc_e >= min_expected) {
      po.push_back(acc_o);
      pe.push_back(acc_e);
      acc_o = acc_e = 0.0;
    }
  }
  if (acc_e > 0.0 || acc_o > 0.0) {
    if (pe.empty()) {
      po.push_back(acc_o);
      pe.push_back(acc_e);
    } else {
      po.back() += acc_o;
      pe.back() += acc_e;
    }
  }
  ChiSquareResult r;
  r.bins = pe.size();
  if (r.bins < 2 + fitted_parameters) throw Error("chi-square test: too few bins after pooling");
  for (std::size_t i = 0; i < pe.size(); ++i) {
    const double diff = po[i] - pe[i];
    r.statistic += diff * diff / pe[i];
  }
  r.dof = r.bins - 1 - fitted_parameters;
  boost::math::chi_squared dist(static_cast<double>(r.dof));
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

}  // namespace rhp::stats
