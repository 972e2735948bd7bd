#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "peatclust/common.hpp"
#include "peatclust/dataset.hpp"

namespace peatclust {

// Penalized natural cubic smoothing spline (Reinsch formulation):
// minimize sum_i (g_i - f(t_i))^2 + omega * int f''(t)^2 dt over twice-
// differentiable f. The minimizer is a natural cubic spline with knots at
// the observation times; its knot values fhat and interior second
// derivatives gamma satisfy
//   (R + omega Q^T Q) gamma = Q^T g,   fhat = g - omega Q gamma,
// with the standard second-difference matrix Q (n x (n-2)) and tridiagonal
// R built from the knot gaps.

struct SmoothingSplineFit {
  std::vector<double> knots;          // observation times, strictly increasing
  std::vector<double> values;         // fitted values at knots
  std::vector<double> second_derivs;  // natural: zero at both ends
  double omega = 0.0;
  double spar = std::numeric_limits<double>::quiet_NaN();  // NaN when fit via omega directly

  std::size_t size() const { return knots.size(); }

  /// Spline value at t; linear (natural) extrapolation outside the knot span.
  double value_at(double t) const {
    const auto& x = knots;
    const std::size_t n = x.size();
    if (t <= x.front()) return values.front() + end_slope_left() * (t - x.front());
    if (t >= x.back()) return values.back() + end_slope_right() * (t - x.back());
    const std::size_t i = interval_of(t);
    const double h = x[i + 1] - x[i];
    const double A = (x[i + 1] - t) / h;
    const double B = (t - x[i]) / h;
    return A * values[i] + B * values[i + 1] +
           ((A * A * A - A) * second_derivs[i] + (B * B * B - B) * second_derivs[i + 1]) *
               (h * h) / 6.0;
  }

  /// Analytic first derivative; constant outside the knot span.
  double deriv_at(double t) const {
    const auto& x = knots;
    if (t <= x.front()) return end_slope_left();
    if (t >= x.back()) return end_slope_right();
    const std::size_t i = interval_of(t);
    const double h = x[i + 1] - x[i];
    const double A = (x[i + 1] - t) / h;
    const double B = (t - x[i]) / h;
    return (values[i + 1] - values[i]) / h -
           (3.0 * A * A - 1.0) * h * second_derivs[i] / 6.0 +
           (3.0 * B * B - 1.0) * h * second_derivs[i + 1] / 6.0;
  }

  /// int f''^2 dt of the fitted spline (gamma^T R gamma).
  double roughness() const {
    double s = 0.0;
    const std::size_t n = knots.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double h = knots[i + 1] - knots[i];
      const double a = second_derivs[i], b = second_derivs[i + 1];
      s += h * (a * a + a * b + b * b) / 3.0;
    }
    return s;
  }

 private:
  std::size_t interval_of(double t) const {
    // largest i with knots[i] <= t, clamped to [0, n-2]
    const auto it = std::upper_bound(knots.begin(), knots.end(), t);
    std::size_t i = static_cast<std::size_t>(it - knots.begin());
    if (i == 0) return 0;
    return std::min(i - 1, knots.size() - 2);
  }
  double end_slope_left() const {
    const double h = knots[1] - knots[0];
    return (values[1] - values[0]) / h - h * second_derivs[1] / 6.0;
  }
  double end_slope_right() const {
    const std::size_t n = knots.size();
    const double h = knots[n - 1] - knots[n - 2];
    return (values[n - 1] - values[n - 2]) / h + h * second_derivs[n - 2] / 6.0;
  }
};

namespace detail {

/// Q column entries for interior knot k (0-based over the n-2 interior knots).
struct QColumn {
  double a, b, c;  // rows k, k+1, k+2
};

inline std::vector<QColumn> build_q(std::span<const double> h) {
  const std::size_t m = h.size() - 1;  // n-2
  std::vector<QColumn> q(m);
  for (std::size_t k = 0; k < m; ++k)
    q[k] = {1.0 / h[k], -1.0 / h[k] - 1.0 / h[k + 1], 1.0 / h[k + 1]};
  return q;
}

/// Solves the SPD pentadiagonal system A x = rhs in band storage
/// (d = diagonal, e1/e2 = first/second superdiagonals) by LDL^T.
inline std::vector<double> solve_banded_spd(std::vector<double> d, std::vector<double> e1,
                                            std::vector<double> e2, std::vector<double> rhs) {
  const std::size_t m = d.size();
  // factor: A = L D L^T with unit lower-banded L (bands l1, l2)
  std::vector<double> l1(m, 0.0), l2(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double di = d[i];
    if (i >= 1) di -= l1[i - 1] * l1[i - 1] * d[i - 1];
    if (i >= 2) di -= l2[i - 2] * l2[i - 2] * d[i - 2];
    if (!(di > 0.0)) throw NumericError("smoothing spline system not positive definite");
    d[i] = di;
    if (i + 1 < m) {
      double v = e1[i];
      if (i >= 1) v -= l1[i - 1] * d[i - 1] * l2[i - 1];
      l1[i] = v / di;
    }
    if (i + 2 < m) l2[i] = e2[i] / di;
  }
  // forward substitution L y = rhs
  for (std::size_t i = 0; i < m; ++i) {
    if (i >= 1) rhs[i] -= l1[i - 1] * rhs[i - 1];
    if (i >= 2) rhs[i] -= l2[i - 2] * rhs[i - 2];
  }
  // diagonal
  for (std::size_t i = 0; i < m; ++i) rhs[i] /= d[i];
  // back substitution L^T x = y
  for (std::size_t ii = m; ii-- > 0;) {
    if (ii + 1 < m) rhs[ii] -= l1[ii] * rhs[ii + 1];
    if (ii + 2 < m) rhs[ii] -= l2[ii] * rhs[ii + 2];
  }
  return rhs;
}

/// Solves tridiagonal SPD R y = rhs (diag r0, superdiag r1), Thomas algorithm.
inline std::vector<double> solve_tridiag_spd(std::span<const double> r0, std::span<const double> r1,
                                             std::vector<double> rhs) {
  const std::size_t m = r0.size();
  std::vector<double> c(m, 0.0), dd(m, 0.0);
  dd[0] = r0[0];
  for (std::size_t i = 1; i < m; ++i) {
    c[i - 1] = r1[i - 1] / dd[i - 1];
    dd[i] = r0[i] - c[i - 1] * r1[i - 1];
  }
  for (std::size_t i = 1; i < m; ++i) rhs[i] -= c[i - 1] * rhs[i - 1];
  for (std::size_t i = 0; i < m; ++i) rhs[i] /= dd[i];
  for (std::size_t ii = m - 1; ii-- > 0;) rhs[ii] -= c[ii] * rhs[ii + 1];
  return rhs;
}

inline void validate_fit_input(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw ValidationError("times/values length mismatch");
  if (times.size() < 4) throw ValidationError("smoothing spline needs at least 4 points");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw ValidationError("times must be strictly increasing");
  for (double v : values)
    if (!std::isfinite(v)) throw ValidationError("non-finite value in spline input");
}

}  // namespace detail

inline SmoothingSplineFit fit_smoothing_spline_omega(std::span<const double> times,
                                                     std::span<const double> values, double omega) {
  detail::validate_fit_input(times, values);
  if (!(omega >= 0.0)) throw ValidationError("omega must be >= 0");
  const std::size_t n = times.size();
  const std::size_t m = n - 2;

  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = times[i + 1] - times[i];
  const auto q = detail::build_q(h);

  // R (tridiagonal) and omega * Q^T Q (pentadiagonal) in band storage
  std::vector<double> d(m), e1(m, 0.0), e2(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    d[k] = (h[k] + h[k + 1]) / 3.0 + omega * (q[k].a * q[k].a + q[k].b * q[k].b + q[k].c * q[k].c);
    if (k + 1 < m) e1[k] = h[k + 1] / 6.0 + omega * (q[k].b * q[k + 1].a + q[k].c * q[k + 1].b);
    if (k + 2 < m) e2[k] = omega * (q[k].c * q[k + 2].a);
  }
  std::vector<double> rhs(m);
  for (std::size_t k = 0; k < m; ++k)
    rhs[k] = q[k].a * values[k] + q[k].b * values[k + 1] + q[k].c * values[k + 2];

  std::vector<double> gamma_int =
      detail::solve_banded_spd(std::move(d), std::move(e1), std::move(e2), std::move(rhs));

  SmoothingSplineFit fit;
  fit.omega = omega;
  fit.knots.assign(times.begin(), times.end());
  fit.values.assign(values.begin(), values.end());
  fit.second_derivs.assign(n, 0.0);
  for (std::size_t k = 0; k < m; ++k) fit.second_derivs[k + 1] = gamma_int[k];
  // fhat = g - omega Q gamma
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    if (r < m) acc += q[r].a * gamma_int[r];
    if (r >= 1 && r - 1 < m) acc += q[r - 1].b * gamma_int[r - 1];
    if (r >= 2 && r - 2 < m) acc += q[r - 2].c * gamma_int[r - 2];
    fit.values[r] -= omega * acc;
  }
  return fit;
}

/// spar -> omega: omega = r * 256^(3*spar - 1) with r = n / tr(Q R^-1 Q^T),
/// the trace ratio of the (identity) value-basis design matrix against the
/// roughness matrix on the observation knots. Scale-free in the time units.
inline double spar_to_omega(std::span<const double> times, double spar) {
  if (!(spar >= 0.0 && spar <= 1.5)) throw ValidationError("spar must lie in [0, 1.5]");
  const std::size_t n = times.size();
  if (n < 4) throw ValidationError("smoothing spline needs at least 4 points");
  const std::size_t m = n - 2;
  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = times[i + 1] - times[i];
  const auto q = detail::build_q(h);

  std::vector<double> r0(m), r1(m - 1);
  for (std::size_t k = 0; k < m; ++k) r0[k] = (h[k] + h[k + 1]) / 3.0;
  for (std::size_t k = 0; k + 1 < m; ++k) r1[k] = h[k + 1] / 6.0;

  // tr(Q R^-1 Q^T) = sum_k col_k(Q^T Q) . (R^-1 e_k)
  double trace = 0.0;
  std::vector<double> unit(m, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    unit.assign(m, 0.0);
    unit[k] = 1.0;
    std::vector<double> rinv = detail::solve_tridiag_spd(r0, r1, std::move(unit));
    // column k of Q^T Q has entries at k-2..k+2
    double acc = (q[k].a * q[k].a + q[k].b * q[k].b + q[k].c * q[k].c) * rinv[k];
    if (k + 1 < m) acc += (q[k].b * q[k + 1].a + q[k].c * q[k + 1].b) * rinv[k + 1];
    if (k + 2 < m) acc += (q[k].c * q[k + 2].a) * rinv[k + 2];
    if (k >= 1) acc += (q[k - 1].b * q[k].a + q[k - 1].c * q[k].b) * rinv[k - 1];
    if (k >= 2) acc += (q[k - 2].c * q[k].a) * rinv[k - 2];
    trace += acc;
  }
  const double ratio = static_cast<double>(n) / trace;
  return ratio * std::pow(256.0, 3.0 * spar - 1.0);
}

inline SmoothingSplineFit fit_smoothing_spline(std::span<const double> times,
                                               std::span<const double> values, double spar) {
  detail::validate_fit_input(times, values);
  SmoothingSplineFit fit = fit_smoothing_spline_omega(times, values, spar_to_omega(times, spar));
  fit.spar = spar;
  return fit;
}

/// Daily-resolution curve on contiguous 1-based day indices
/// t = t_start .. t_start+size-1, where t=1 is the dataset epoch date.
struct DailyCurve {
  int t_start = 1;
  std::vector<double> values;

  int t_end() const { return t_start + static_cast<int>(values.size()) - 1; }
  std::size_t size() const { return values.size(); }
};

/// Trend/oscillation split of one series. combined = trend + oscillation
/// holds exactly by construction; trend_gradient is the analytic derivative
/// of the trend spline in mm/day. Gradient values within `boundary_days`
/// of either end are least reliable and flagged, not trimmed.
struct Decomposition {
  DailyCurve combined;
  DailyCurve trend;
  DailyCurve oscillation;
  DailyCurve trend_gradient;

  static constexpr int boundary_days = 30;

  bool near_boundary(int t) const {
    return t < combined.t_start + boundary_days || t > combined.t_end() - boundary_days;
  }
};

inline Decomposition decompose(const Series& series, double spar_combined = 0.7,
                               double spar_trend = 1.0) {
  std::vector<double> times(series.times.begin(), series.times.end());
  SmoothingSplineFit combined_fit, trend_fit;
  try {
    combined_fit = fit_smoothing_spline(times, series.values, spar_combined);
    trend_fit = fit_smoothing_spline(times, series.values, spar_trend);
  } catch (const ValidationError& e) {
    throw ValidationError("location '" + series.location_id + "': " + e.what());
  }

  Decomposition d;
  const int t_first = series.times.front() + 1;  // day index: epoch day is t=1
  const int t_last = series.times.back() + 1;
  const std::size_t len = static_cast<std::size_t>(t_last - t_first + 1);
  d.combined.t_start = d.trend.t_start = d.oscillation.t_start = d.trend_gradient.t_start = t_first;
  d.combined.values.resize(len);
  d.trend.values.resize(len);
  d.oscillation.values.resize(len);
  d.trend_gradient.values.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double day = static_cast<double>(series.times.front()) + static_cast<double>(i);
    const double c = combined_fit.value_at(day);
    const double tr = trend_fit.value_at(day);
    if (!std::isfinite(c) || !std::isfinite(tr))
      throw NumericError("non-finite spline evaluation", series.location_id);
    d.combined.values[i] = c;
    d.trend.values[i] = tr;
    d.oscillation.values[i] = c - tr;
    d.trend_gradient.values[i] = trend_fit.deriv_at(day);
  }
  return d;
}

}  // namespace peatclust
