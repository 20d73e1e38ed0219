#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqc/error.hpp"
#include "aqc/io.hpp"
#include "aqc/spectra.hpp"

namespace aqc {

/// Avoided crossing of two adjacent levels: location, minimum gap, and the
/// difference of the asymptotic slopes dE/ds.
struct LzCrossing {
  std::size_t lower_level = 0;
  double s_star = 0.0;
  double delta_e = 0.0;
  double delta_m = 0.0;
  /// Slope difference moved by more than 10% when the window was doubled.
  bool slope_unconverged = false;
};

/// Landau-Zener diabatic transition probability exp(-2 pi gamma) with
/// gamma = delta_e / (4 |delta_m| s_dot), hbar = 1.
inline double lz_probability(double delta_e, double delta_m, double s_dot) {
  if (!(s_dot > 0)) throw ParameterError("LZ probability needs s_dot > 0");
  if (!(std::abs(delta_m) > 0)) throw ParameterError("LZ probability needs delta_m != 0");
  if (!(delta_e >= 0)) throw ParameterError("LZ probability needs delta_e >= 0");
  const double gamma = 0.25 * delta_e / (std::abs(delta_m) * s_dot);
  return std::exp(-2.0 * std::numbers::pi * gamma);
}

inline double lz_probability(const LzCrossing& c, double s_dot) {
  return lz_probability(c.delta_e, c.delta_m, s_dot);
}

struct CrossingOptions {
  /// Grid steps between s* and the points where asymptotic slopes are taken.
  std::size_t slope_window = 5;
  double convergence_tol = 0.10;
};

struct CrossingScan {
  std::vector<LzCrossing> crossings;
  std::vector<std::string> warnings;
};

namespace detail {

// Central-difference slope of one level at grid index j (one-sided at the ends).
inline double level_slope(const LevelCurves& c, std::size_t level, std::size_t j) {
  const std::size_t last = c.s.size() - 1;
  const std::size_t lo = j == 0 ? 0 : j - 1;
  const std::size_t hi = j == last ? last : j + 1;
  return (c.at(hi, level) - c.at(lo, level)) / (c.s[hi] - c.s[lo]);
}

// |slope(upper) - slope(lower)| averaged over the points w steps either side.
inline double slope_difference(const LevelCurves& c, std::size_t lower, std::size_t j,
                               std::size_t w, bool& clipped) {
  const std::size_t last = c.s.size() - 1;
  const std::size_t left = j >= w ? j - w : 0;
  const std::size_t right = std::min(last, j + w);
  clipped = (j < w) || (j + w > last);
  double sum = 0;
  for (std::size_t k : {left, right})
    sum += std::abs(level_slope(c, lower + 1, k) - level_slope(c, lower, k));
  return 0.5 * sum;
}

}  // namespace detail

/// Interior local minima of E_{i+1}(s) - E_i(s) on the tracked grid, refined
/// by a parabola through the three bracketing grid points.
inline CrossingScan extract_crossings(const LevelCurves& curves, std::size_t lower_level,
                                      const CrossingOptions& opt = {}) {
  if (lower_level + 1 >= curves.num_levels())
    throw ParameterError("level pair exceeds tracked levels");
  if (curves.s.size() < 3) throw ParameterError("need at least 3 grid points");
  if (opt.slope_window < 1) throw ParameterError("slope window must be >= 1");
  const std::size_t n = curves.s.size();
  std::vector<double> gap(n);
  for (std::size_t j = 0; j < n; ++j)
    gap[j] = curves.at(j, lower_level + 1) - curves.at(j, lower_level);

  CrossingScan scan;
  if (gap[0] < gap[1])
    scan.warnings.push_back("gap minimum at grid boundary s=" + fmt_double(curves.s[0]) +
                            " excluded");
  if (gap[n - 1] < gap[n - 2])
    scan.warnings.push_back("gap minimum at grid boundary s=" + fmt_double(curves.s[n - 1]) +
                            " excluded");

  for (std::size_t j = 1; j + 1 < n; ++j) {
    if (!(gap[j] < gap[j - 1] && gap[j] <= gap[j + 1])) continue;
    const double x0 = curves.s[j - 1], x1 = curves.s[j], x2 = curves.s[j + 1];
    const double y0 = gap[j - 1], y1 = gap[j], y2 = gap[j + 1];
    // vertex of the interpolating parabola
    const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
    const double curv = (d12 - d01) / (x2 - x0);
    LzCrossing c;
    c.lower_level = lower_level;
    if (curv > 0) {
      c.s_star = 0.5 * (x0 + x1) - d01 / (2.0 * curv);
      c.s_star = std::clamp(c.s_star, x0, x2);
      c.delta_e = y1 + d01 * (c.s_star - x1) + curv * (c.s_star - x0) * (c.s_star - x1);
    } else {
      c.s_star = x1;
      c.delta_e = y1;
    }
    c.delta_e = std::max(0.0, std::min(c.delta_e, y1));

    bool clipped = false, clipped2 = false;
    c.delta_m = detail::slope_difference(curves, lower_level, j, opt.slope_window, clipped);
    const double wide =
        detail::slope_difference(curves, lower_level, j, 2 * opt.slope_window, clipped2);
    c.slope_unconverged =
        !(std::abs(wide - c.delta_m) <= opt.convergence_tol * std::max(c.delta_m, wide));
    if (clipped)
      scan.warnings.push_back("slope window clipped at grid edge near s=" + fmt_double(c.s_star));
    scan.crossings.push_back(c);
  }
  return scan;
}

// Ensemble scaling model ---------------------------------------------------------

struct ScalingModel {
  double sigma_tilde = 1.0;  // unfolded asymptotic slope
  double rho = 1.0;          // mean E0-E1 level density at the s of interest
  double rho_min = 1.0;      // minimum of rho over the irregular region
  double s_dot = 1.0;
  double delta_s = 1.0;      // width of the irregular region
  double t_total = 1.0;
  double c_prop = 1.0;
};

namespace detail {
inline void require_positive(double x, const char* what) {
  if (!(x > 0) || !std::isfinite(x))
    throw ParameterError(std::string(what) + " must be positive and finite");
}
}  // namespace detail

/// Ground-state transition rate. Folded form c sigma^(3/2) rho^2 s_dot^(3/2)
/// with sigma = sigma_tilde / rho; unfolded form c sigma_tilde^(3/2)
/// rho^(1/2) s_dot^(3/2). The two agree algebraically.
inline double transition_rate(const ScalingModel& m, bool unfolded) {
  detail::require_positive(m.sigma_tilde, "sigma_tilde");
  detail::require_positive(m.rho, "rho");
  detail::require_positive(m.s_dot, "s_dot");
  detail::require_positive(m.c_prop, "proportionality constant");
  if (unfolded)
    return m.c_prop * std::pow(m.sigma_tilde, 1.5) * std::sqrt(m.rho) * std::pow(m.s_dot, 1.5);
  const double sigma = m.sigma_tilde / m.rho;
  return m.c_prop * std::pow(sigma, 1.5) * m.rho * m.rho * std::pow(m.s_dot, 1.5);
}

/// min(1, c sigma_tilde^(3/2) delta_s^(3/2) (rho_min / T)^(1/2)).
inline double failure_lower_bound(const ScalingModel& m) {
  detail::require_positive(m.sigma_tilde, "sigma_tilde");
  detail::require_positive(m.delta_s, "delta_s");
  detail::require_positive(m.rho_min, "rho_min");
  detail::require_positive(m.t_total, "T");
  detail::require_positive(m.c_prop, "proportionality constant");
  const double p = m.c_prop * std::pow(m.sigma_tilde, 1.5) * std::pow(m.delta_s, 1.5) *
                   std::sqrt(m.rho_min / m.t_total);
  return std::min(1.0, p);
}

/// Interpolation time at which the (unclipped) bound equals `p`; linear in rho_min.
inline double time_for_failure_bound(const ScalingModel& m, double p) {
  if (!(p > 0 && p <= 1)) throw ParameterError("target probability must lie in (0,1]");
  detail::require_positive(m.sigma_tilde, "sigma_tilde");
  detail::require_positive(m.delta_s, "delta_s");
  detail::require_positive(m.rho_min, "rho_min");
  const double k = m.c_prop * std::pow(m.sigma_tilde, 1.5) * std::pow(m.delta_s, 1.5);
  return k * k * m.rho_min / (p * p);
}

/// Ensemble E0-E1 level density: reciprocal of the mean ground gap.
inline double estimate_rho(std::span<const double> ground_gaps) {
  if (ground_gaps.size() < 2) throw SampleSizeError("rho needs an ensemble of >= 2 instances");
  double sum = 0;
  for (double g : ground_gaps) sum += g;
  const double mean = sum / double(ground_gaps.size());
  if (!(mean > 0)) throw DegeneracyError("ensemble-mean ground gap is zero");
  return 1.0 / mean;
}

struct RhoMin {
  bool irregular_region_found = false;
  double rho_min = std::numeric_limits<double>::quiet_NaN();
  double s_at_min = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> irregular_s;
  /// Measure of the irregular region: each irregular grid point contributes
  /// the width of its grid cell (half the distance to each neighbour).
  double delta_s = 0.0;
};

/// Minimum of rho(s) over the points whose Brody parameter reaches q_irr.
inline RhoMin rho_min_over_irregular(std::span<const double> s, std::span<const double> q,
                                     std::span<const double> rho, double q_irr = 0.2) {
  if (s.size() != q.size() || s.size() != rho.size())
    throw ContractError("s, q and rho must have equal length");
  RhoMin r;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (!(q[j] >= q_irr) || !std::isfinite(rho[j])) continue;
    r.irregular_s.push_back(s[j]);
    const double left = j > 0 ? s[j] - s[j - 1] : 0.0;
    const double right = j + 1 < s.size() ? s[j + 1] - s[j] : 0.0;
    r.delta_s += s.size() > 1 ? 0.5 * (left + right) : 0.0;
    if (!r.irregular_region_found || rho[j] < r.rho_min) {
      r.rho_min = rho[j];
      r.s_at_min = s[j];
    }
    r.irregular_region_found = true;
  }
  return r;
}

/// Mean |d(unfolded ground gap)/ds| over the irregular points, where the
/// unfolded gap of instance i is gap_i(s) * rho(s). gaps[j][i] is instance i
/// at grid point j; NaN entries are skipped.
inline double estimate_sigma_tilde(std::span<const double> s,
                                   const std::vector<std::vector<double>>& gaps,
                                   std::span<const double> rho, std::span<const double> q,
                                   double q_irr = 0.2) {
  if (s.size() < 2 || gaps.size() != s.size()) throw ContractError("sigma estimate: bad grid");
  double sum = 0;
  std::size_t count = 0;
  const std::size_t last = s.size() - 1;
  for (std::size_t j = 0; j <= last; ++j) {
    if (!(q[j] >= q_irr)) continue;
    const std::size_t lo = j == 0 ? 0 : j - 1, hi = j == last ? last : j + 1;
    for (std::size_t i = 0; i < gaps[j].size(); ++i) {
      const double a = gaps[lo][i] * rho[lo], b = gaps[hi][i] * rho[hi];
      if (!std::isfinite(a) || !std::isfinite(b)) continue;
      sum += std::abs(b - a) / (s[hi] - s[lo]);
      ++count;
    }
  }
  return count ? sum / double(count) : std::numeric_limits<double>::quiet_NaN();
}

struct ScalingFit {
  double exponent = 0.0;   // a in log(rho_min) = a n + b
  double intercept = 0.0;  // b
  double stderr_exponent = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares of log(rho_min) against n.
inline ScalingFit scaling_fit(std::span<const double> n, std::span<const double> rho_min) {
  if (n.size() != rho_min.size()) throw ContractError("n and rho_min lengths differ");
  if (n.size() < 3) throw SampleSizeError("scaling fit needs at least 3 problem sizes");
  const double k = double(n.size());
  double mx = 0, my = 0;
  std::vector<double> y(n.size());
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(rho_min[i] > 0)) throw ParameterError("rho_min must be positive");
    y[i] = std::log(rho_min[i]);
    mx += n[i];
    my += y[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    sxx += (n[i] - mx) * (n[i] - mx);
    sxy += (n[i] - mx) * (y[i] - my);
  }
  if (sxx == 0) throw ParameterError("scaling fit needs distinct problem sizes");
  ScalingFit f;
  f.points = n.size();
  f.exponent = sxy / sxx;
  f.intercept = my - f.exponent * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double r = y[i] - (f.intercept + f.exponent * n[i]);
    ssr += r * r;
  }
  f.stderr_exponent = std::sqrt(ssr / (k - 2.0) / sxx);
  return f;
}

}  // namespace aqc
