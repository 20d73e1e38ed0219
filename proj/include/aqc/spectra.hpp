#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "aqc/eigensolver.hpp"
#include "aqc/error.hpp"
#include "aqc/hamiltonian.hpp"
#include "aqc/io.hpp"

namespace aqc {

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
  double s = 0.0;
  std::size_t instance_id = 0;

  std::size_t size() const noexcept { return eigenvalues.size(); }
  double gap(std::size_t i = 0) const { return eigenvalues.at(i + 1) - eigenvalues.at(i); }
};

inline Spectrum spectrum_at(const InterpolatedHamiltonian& ih, double s,
                            std::size_t instance_id = 0) {
  return {eig_sym(h_of_s(ih, s)).values, s, instance_id};
}

/// E1 - E0 of H(s).
inline double ground_gap(const InterpolatedHamiltonian& ih, double s) {
  if (ih.dim() < 2) throw ContractError("ground gap needs dim >= 2");
  const auto ev = eig_sym(h_of_s(ih, s)).values;
  return ev[1] - ev[0];
}

struct GapMinimum {
  double g_min = 0.0;
  double s_star = 0.0;
};

struct MinGapOptions {
  bool refine = true;
  double s_tol = 1e-6;
};

/// Minimum of E1(s) - E0(s): best grid point, then golden-section search on
/// the bracketing interval.
inline GapMinimum min_gap(const InterpolatedHamiltonian& ih, std::span<const double> s_grid,
                          const MinGapOptions& opt = {}) {
  if (s_grid.size() < 2) throw ParameterError("min_gap needs at least two grid points");
  for (double s : s_grid)
    if (!(s >= 0.0 && s <= 1.0)) throw ParameterError("grid point outside [0,1]");
  std::vector<double> gaps(s_grid.size());
  for (std::size_t j = 0; j < s_grid.size(); ++j) gaps[j] = ground_gap(ih, s_grid[j]);
  const std::size_t j = std::size_t(std::min_element(gaps.begin(), gaps.end()) - gaps.begin());
  GapMinimum best{gaps[j], s_grid[j]};
  if (!opt.refine) return best;

  double a = s_grid[j == 0 ? 0 : j - 1];
  double b = s_grid[j + 1 == s_grid.size() ? j : j + 1];
  if (a > b) std::swap(a, b);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = ground_gap(ih, x1), f2 = ground_gap(ih, x2);
  while (b - a > opt.s_tol) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = ground_gap(ih, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = ground_gap(ih, x2);
    }
  }
  const double s_mid = 0.5 * (a + b);
  const double g_mid = ground_gap(ih, s_mid);
  if (g_mid < best.g_min) best = {g_mid, s_mid};
  return best;
}

/// |<E1| dH/ds |E0> * s_dot| / (E1 - E0)^2 at interpolation point s.
inline double adiabatic_ratio(const InterpolatedHamiltonian& ih, double s, double s_dot) {
  const auto eig = eig_sym(h_of_s(ih, s), {.vectors = true});
  if (eig.dim() < 2) throw ContractError("adiabatic ratio needs dim >= 2");
  const double gap = eig.values[1] - eig.values[0];
  if (gap <= 1e-12)
    throw DegeneracyError("E0 and E1 are degenerate at s=" + fmt_double(s));
  const auto dh = dh_ds(ih);
  const auto w = dh.apply(eig.vector(0));
  const auto v1 = eig.vector(1);
  double element = 0;
  for (std::size_t k = 0; k < w.size(); ++k) element += v1[k] * w[k];
  return std::abs(element * s_dot) / (gap * gap);
}

// Unfolding ------------------------------------------------------------------

struct UnfoldOptions {
  int fit_degree = 7;
  double trim_fraction = 0.05;
  std::size_t min_levels = 20;
  /// Lower the degree when the trimmed window has too few distinct energies
  /// for a full-rank fit (strongly degenerate spectra), instead of failing.
  bool adaptive_degree = true;
};

struct UnfoldedSpectrum {
  std::vector<double> epsilons;  // ascending
  int fit_degree = 0;            // degree actually used
  double trim_fraction = 0.0;
  std::size_t trimmed_per_edge = 0;
  std::size_t non_monotone = 0;  // adjacent pairs reordered after the fit

  double mean_spacing() const {
    if (epsilons.size() < 2) return 0.0;
    return (epsilons.back() - epsilons.front()) / double(epsilons.size() - 1);
  }
};

namespace detail {

/// Least-squares coefficients of a Legendre series on x in [-1, 1], via
/// Householder QR. Throws when the design matrix is numerically singular.
inline std::vector<double> legendre_lsq(std::span<const double> x, std::span<const double> y,
                                        int degree) {
  const std::size_t rows = x.size(), cols = std::size_t(degree) + 1;
  if (rows < cols) throw SampleSizeError("fewer points than polynomial coefficients");
  // column-major design matrix
  std::vector<double> a(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    double p0 = 1.0, p1 = x[i];
    a[i] = 1.0;
    if (cols > 1) a[rows + i] = p1;
    for (std::size_t k = 2; k < cols; ++k) {
      const double p2 = ((2.0 * double(k) - 1.0) * x[i] * p1 - (double(k) - 1.0) * p0) / double(k);
      a[k * rows + i] = p2;
      p0 = p1;
      p1 = p2;
    }
  }
  std::vector<double> b(y.begin(), y.end());
  std::vector<double> rdiag(cols);
  double max_norm = 0;
  for (std::size_t k = 0; k < cols; ++k) {
    double* col = &a[k * rows];
    double norm = 0;
    for (std::size_t i = k; i < rows; ++i) norm = std::hypot(norm, col[i]);
    max_norm = std::max(max_norm, norm);
    if (norm == 0.0 || norm < 1e-10 * max_norm)
      throw SampleSizeError("unfolding fit matrix is singular");
    if (col[k] > 0) norm = -norm;
    for (std::size_t i = k; i < rows; ++i) col[i] /= -norm;
    col[k] += 1.0;
    for (std::size_t j = k + 1; j < cols; ++j) {
      double* cj = &a[j * rows];
      double s = 0;
      for (std::size_t i = k; i < rows; ++i) s += col[i] * cj[i];
      s = -s / col[k];
      for (std::size_t i = k; i < rows; ++i) cj[i] += s * col[i];
    }
    double s = 0;
    for (std::size_t i = k; i < rows; ++i) s += col[i] * b[i];
    s = -s / col[k];
    for (std::size_t i = k; i < rows; ++i) b[i] += s * col[i];
    rdiag[k] = norm;
  }
  std::vector<double> coef(cols);
  for (std::size_t k = cols; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < cols; ++j) s -= a[j * rows + k] * coef[j];
    coef[k] = s / rdiag[k];
  }
  return coef;
}

inline double legendre_eval(std::span<const double> coef, double x) {
  double p0 = 1.0, p1 = x, sum = coef[0];
  if (coef.size() > 1) sum += coef[1] * p1;
  for (std::size_t k = 2; k < coef.size(); ++k) {
    const double p2 = ((2.0 * double(k) - 1.0) * x * p1 - (double(k) - 1.0) * p0) / double(k);
    sum += coef[k] * p2;
    p0 = p1;
    p1 = p2;
  }
  return sum;
}

}  // namespace detail

/// Maps levels to unit mean spacing by a least-squares polynomial fit of the
/// cumulative level count N(E) over the edge-trimmed window.
inline UnfoldedSpectrum unfold(std::span<const double> eigenvalues, const UnfoldOptions& opt = {}) {
  if (opt.fit_degree < 1) throw ParameterError("unfolding degree must be >= 1");
  if (!(opt.trim_fraction >= 0.0 && opt.trim_fraction < 0.5))
    throw ParameterError("trim fraction must lie in [0, 0.5)");
  const std::size_t total = eigenvalues.size();
  const auto trim = std::size_t(std::floor(opt.trim_fraction * double(total)));
  if (total < 2 * trim + opt.min_levels)
    throw SampleSizeError("unfold: " + std::to_string(total) + " levels leave fewer than " +
                          std::to_string(opt.min_levels) + " after trimming");
  std::vector<double> e(eigenvalues.begin(), eigenvalues.end());
  std::sort(e.begin(), e.end());
  const std::span<const double> window(e.data() + trim, total - 2 * trim);

  const double lo = window.front(), hi = window.back();
  if (!(hi > lo)) throw SampleSizeError("unfolding fit matrix is singular (all levels equal)");
  const double center = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  std::vector<double> x(window.size()), y(window.size());
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    x[i] = (window[i] - center) / half;
    y[i] = double(trim + i) + 0.5;
    if (i == 0 || window[i] - window[i - 1] > 1e-9 * std::max(1.0, std::abs(window[i])))
      ++distinct;
  }
  int degree = opt.fit_degree;
  if (opt.adaptive_degree) degree = std::min<int>(degree, int(distinct) - 1);
  if (degree < 1) throw SampleSizeError("unfolding fit matrix is singular");
  const auto coef = detail::legendre_lsq(x, y, degree);

  UnfoldedSpectrum u;
  u.fit_degree = degree;
  u.trim_fraction = opt.trim_fraction;
  u.trimmed_per_edge = trim;
  u.epsilons.resize(window.size());
  for (std::size_t i = 0; i < window.size(); ++i) u.epsilons[i] = detail::legendre_eval(coef, x[i]);
  for (std::size_t i = 1; i < u.epsilons.size(); ++i) u.non_monotone += u.epsilons[i] < u.epsilons[i - 1];
  if (u.non_monotone) std::sort(u.epsilons.begin(), u.epsilons.end());
  return u;
}

inline UnfoldedSpectrum unfold(const Spectrum& s, const UnfoldOptions& opt = {}) {
  return unfold(s.eigenvalues, opt);
}

/// Differences of consecutive levels, in order.
inline std::vector<double> nns(std::span<const double> levels) {
  if (levels.size() < 2) throw SampleSizeError("nearest-neighbour spacings need >= 2 levels");
  std::vector<double> d(levels.size() - 1);
  for (std::size_t i = 0; i + 1 < levels.size(); ++i) d[i] = levels[i + 1] - levels[i];
  return d;
}

inline std::vector<double> nns(const UnfoldedSpectrum& u) { return nns(u.epsilons); }

struct NnsHistogram {
  double bin_width = 0.1;
  std::vector<std::size_t> counts;
  std::size_t total = 0;
  std::vector<double> density;

  double bin_left(std::size_t k) const { return double(k) * bin_width; }
};

/// Bins [k w, (k + 1) w) starting at 0, normalised to unit area.
inline NnsHistogram histogram(std::span<const double> spacings, double bin_width = 0.1) {
  if (!(bin_width > 0)) throw ParameterError("bin width must be positive");
  NnsHistogram h;
  h.bin_width = bin_width;
  for (double d : spacings) {
    if (!(d >= 0) || !std::isfinite(d)) throw ParameterError("spacings must be finite and >= 0");
    // nudge so exact multiples of the bin width land in the bin they open
    const auto k = std::size_t(std::floor(d / bin_width + 1e-9));
    if (k >= h.counts.size()) h.counts.resize(k + 1, 0);
    ++h.counts[k];
  }
  h.total = spacings.size();
  h.density.resize(h.counts.size());
  for (std::size_t k = 0; k < h.counts.size(); ++k)
    h.density[k] = h.total ? double(h.counts[k]) / (double(h.total) * bin_width) : 0.0;
  return h;
}

inline std::string histogram_csv(const NnsHistogram& h) {
  std::ostringstream out;
  out << "bin_left,density,count\n";
  for (std::size_t k = 0; k < h.counts.size(); ++k)
    out << fmt_double(h.bin_left(k)) << ',' << fmt_double(h.density[k]) << ',' << h.counts[k]
        << '\n';
  return out.str();
}

// Level tracking ---------------------------------------------------------------

struct LevelCurves {
  std::vector<double> s;
  std::vector<std::vector<double>> levels;  // levels[j][i] = E_i(s_j)
  double slope_bound = 0.0;
  std::vector<std::string> warnings;

  std::size_t num_levels() const { return levels.empty() ? 0 : levels.front().size(); }
  double at(std::size_t j, std::size_t i) const { return levels[j][i]; }
};

/// The k lowest levels at each grid point, ordered by index. Flags steps where
/// a level moves faster than the bound |dE/ds| <= ||h1 - h0||.
inline LevelCurves track_levels(const InterpolatedHamiltonian& ih, std::span<const double> s_grid,
                                std::size_t k_levels) {
  if (k_levels > ih.dim() || k_levels == 0)
    throw ParameterError("track_levels: k must lie in [1, dim]");
  LevelCurves c;
  c.s.assign(s_grid.begin(), s_grid.end());
  c.slope_bound = dh_ds(ih).inf_norm();
  for (double s : s_grid) {
    auto ev = eig_sym(h_of_s(ih, s)).values;
    ev.resize(k_levels);
    c.levels.push_back(std::move(ev));
  }
  for (std::size_t j = 0; j + 1 < c.s.size(); ++j) {
    const double ds = std::abs(c.s[j + 1] - c.s[j]);
    for (std::size_t i = 0; i < k_levels; ++i)
      if (std::abs(c.levels[j + 1][i] - c.levels[j][i]) >
          c.slope_bound * ds * (1 + 1e-9) + 1e-12) {
        c.warnings.push_back("grid too coarse: level " + std::to_string(i) + " between s=" +
                             fmt_double(c.s[j]) + " and s=" + fmt_double(c.s[j + 1]));
      }
  }
  return c;
}

inline std::string spectrum_csv(const std::vector<Spectrum>& spectra) {
  std::ostringstream out;
  out << "instance_id,s,level_index,eigenvalue\n";
  for (const auto& sp : spectra)
    for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i)
      out << sp.instance_id << ',' << fmt_double(sp.s) << ',' << i << ','
          << fmt_double(sp.eigenvalues[i]) << '\n';
  return out.str();
}

}  // namespace aqc
