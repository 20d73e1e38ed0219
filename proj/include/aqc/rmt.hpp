#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "aqc/error.hpp"
#include "aqc/hamiltonian.hpp"
#include "aqc/rng.hpp"
#include "aqc/spectra.hpp"
#include "json.hpp"

namespace aqc {

// Brody distribution ------------------------------------------------------------
//
//   p_q(d) = (1 + q) beta d^q exp(-beta d^(1+q)),
//   beta   = Gamma((2 + q) / (1 + q))^(1 + q).
//
// q = 0 is the Poisson (exponential) law, q = 1 the Wigner surmise. The beta
// normalisation gives unit mean for every q.

namespace detail {
inline void check_brody_q(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("Brody parameter q must lie in [0,1]");
}
}  // namespace detail

inline double brody_beta(double q) {
  detail::check_brody_q(q);
  return std::pow(std::tgamma((2.0 + q) / (1.0 + q)), 1.0 + q);
}

inline double brody_pdf(double q, double delta) {
  detail::check_brody_q(q);
  if (!(delta >= 0.0)) throw ParameterError("spacing must be >= 0");
  const double beta = brody_beta(q);
  return (1.0 + q) * beta * std::pow(delta, q) * std::exp(-beta * std::pow(delta, 1.0 + q));
}

inline double brody_cdf(double q, double delta) {
  detail::check_brody_q(q);
  if (!(delta >= 0.0)) throw ParameterError("spacing must be >= 0");
  return -std::expm1(-brody_beta(q) * std::pow(delta, 1.0 + q));
}

// Fitting -------------------------------------------------------------------------

enum class BrodyFitMethod { max_likelihood, histogram_lsq };

struct BrodyFitOptions {
  BrodyFitMethod method = BrodyFitMethod::max_likelihood;
  std::size_t min_sample = 50;
  /// Zero spacings are raised to this floor before taking logarithms.
  double delta_min = 1e-8;
  /// Rescale the sample to unit mean before fitting.
  bool normalize_mean = true;
  std::size_t bootstrap = 200;
  std::uint64_t seed = 1;
  double q_tol = 1e-6;
  double bin_width = 0.1;  // histogram_lsq only
};

struct BrodyFit {
  double q = 0.0;
  double log_likelihood = 0.0;
  std::size_t sample_size = 0;
  double stderr_q = std::numeric_limits<double>::quiet_NaN();
  std::size_t clipped_zeros = 0;
  bool at_lower_bound = false;
  bool at_upper_bound = false;
  BrodyFitMethod method = BrodyFitMethod::max_likelihood;
  // optimizer trace summary
  int iterations = 0;
  int evaluations = 0;
  double final_bracket = 0.0;
};

namespace detail {

struct ScalarMax {
  double x = 0, fx = 0;
  int iterations = 0, evaluations = 0;
  double bracket = 0;
};

/// Golden-section maximisation on [0, 1]; the endpoints are compared
/// explicitly so boundary optima are reported exactly.
inline ScalarMax maximize_unit_interval(const std::function<double(double)>& f, double tol) {
  ScalarMax r;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 1.0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  r.evaluations = 2;
  while (b - a > tol) {
    ++r.iterations;
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
    ++r.evaluations;
  }
  r.bracket = b - a;
  r.x = 0.5 * (a + b);
  r.fx = f(r.x);
  const double f0 = f(0.0), fend = f(1.0);
  r.evaluations += 3;
  if (f0 >= r.fx && f0 >= fend) {
    r.x = 0.0;
    r.fx = f0;
  } else if (fend > r.fx && fend > f0) {
    r.x = 1.0;
    r.fx = fend;
  }
  return r;
}

/// Log-likelihood of a Brody sample, given sum(log d) and log d per point.
class BrodyLikelihood {
 public:
  explicit BrodyLikelihood(std::span<const double> log_delta) : log_delta_(log_delta) {
    for (double l : log_delta_) sum_log_ += l;
  }

  double operator()(double q) const {
    const double beta = brody_beta(q);
    double tail = 0;
    for (double l : log_delta_) tail += std::exp((1.0 + q) * l);
    return double(log_delta_.size()) * std::log((1.0 + q) * beta) + q * sum_log_ - beta * tail;
  }

 private:
  std::span<const double> log_delta_;
  double sum_log_ = 0;
};

struct PreparedSample {
  std::vector<double> values;  // normalised, clipped
  std::size_t clipped = 0;
};

inline PreparedSample prepare_sample(std::span<const double> spacings, const BrodyFitOptions& opt) {
  if (spacings.size() < std::max<std::size_t>(opt.min_sample, 1))
    throw SampleSizeError("Brody fit needs at least " + std::to_string(opt.min_sample) +
                          " spacings, got " + std::to_string(spacings.size()));
  double sum = 0;
  for (double d : spacings) {
    if (!(d >= 0) || !std::isfinite(d)) throw ParameterError("spacings must be finite and >= 0");
    sum += d;
  }
  if (sum <= 0) throw SampleSizeError("all spacings are zero");
  const double scale = opt.normalize_mean ? double(spacings.size()) / sum : 1.0;
  PreparedSample p;
  p.values.reserve(spacings.size());
  for (double d : spacings) {
    double x = d * scale;
    if (x < opt.delta_min) {
      x = opt.delta_min;
      ++p.clipped;
    }
    p.values.push_back(x);
  }
  return p;
}

inline ScalarMax fit_prepared(std::span<const double> values, const BrodyFitOptions& opt) {
  if (opt.method == BrodyFitMethod::max_likelihood) {
    std::vector<double> logs(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) logs[i] = std::log(values[i]);
    const BrodyLikelihood ll(logs);
    return maximize_unit_interval(std::cref(ll), opt.q_tol);
  }
  // Least squares between histogram density and p_q at the bin centres.
  const auto h = histogram(values, opt.bin_width);
  auto neg_sse = [&](double q) {
    double sse = 0;
    for (std::size_t k = 0; k < h.counts.size(); ++k) {
      const double r = h.density[k] - brody_pdf(q, (double(k) + 0.5) * h.bin_width);
      sse += r * r;
    }
    return -sse;
  };
  return maximize_unit_interval(neg_sse, opt.q_tol);
}

}  // namespace detail

/// Brody parameter of a spacing sample, with a bootstrap standard error.
inline BrodyFit fit_brody(std::span<const double> spacings, const BrodyFitOptions& opt = {}) {
  const auto prepared = detail::prepare_sample(spacings, opt);
  const auto best = detail::fit_prepared(prepared.values, opt);

  BrodyFit fit;
  fit.method = opt.method;
  fit.q = best.x;
  fit.sample_size = spacings.size();
  fit.clipped_zeros = prepared.clipped;
  fit.at_lower_bound = best.x == 0.0;
  fit.at_upper_bound = best.x == 1.0;
  fit.iterations = best.iterations;
  fit.evaluations = best.evaluations;
  fit.final_bracket = best.bracket;
  {
    std::vector<double> logs(prepared.values.size());
    for (std::size_t i = 0; i < logs.size(); ++i) logs[i] = std::log(prepared.values[i]);
    fit.log_likelihood = detail::BrodyLikelihood(logs)(fit.q);
  }

  if (opt.bootstrap >= 2) {
    std::vector<double> qs;
    qs.reserve(opt.bootstrap);
    std::vector<double> resample(spacings.size());
    BrodyFitOptions inner = opt;
    inner.bootstrap = 0;
    for (std::size_t r = 0; r < opt.bootstrap; ++r) {
      Rng rng(substream_seed(opt.seed, r));
      for (auto& x : resample) x = spacings[rng.below(spacings.size())];
      try {
        const auto p = detail::prepare_sample(resample, inner);
        qs.push_back(detail::fit_prepared(p.values, inner).x);
      } catch (const SampleSizeError&) {
        // an all-zero resample carries no information about q
      }
    }
    if (qs.size() >= 2) {
      double mean = 0;
      for (double q : qs) mean += q;
      mean /= double(qs.size());
      double ss = 0;
      for (double q : qs) ss += (q - mean) * (q - mean);
      fit.stderr_q = std::sqrt(ss / double(qs.size() - 1));
    }
  }
  return fit;
}

/// Log-likelihood of the (normalised, clipped) sample at a given q.
inline double brody_log_likelihood(std::span<const double> spacings, double q,
                                   const BrodyFitOptions& opt = {}) {
  detail::check_brody_q(q);
  const auto p = detail::prepare_sample(spacings, opt);
  std::vector<double> logs(p.values.size());
  for (std::size_t i = 0; i < logs.size(); ++i) logs[i] = std::log(p.values[i]);
  return detail::BrodyLikelihood(logs)(q);
}

inline nlohmann::json to_json(const BrodyFit& f) {
  return {{"q", f.q},
          {"stderr", f.stderr_q},
          {"sample_size", f.sample_size},
          {"clipped_zeros", f.clipped_zeros},
          {"log_likelihood", f.log_likelihood},
          {"method", f.method == BrodyFitMethod::max_likelihood ? "max_likelihood" : "histogram_lsq"},
          {"at_lower_bound", f.at_lower_bound},
          {"at_upper_bound", f.at_upper_bound},
          {"optimizer",
           {{"algorithm", "golden_section"},
            {"iterations", f.iterations},
            {"evaluations", f.evaluations},
            {"final_bracket", f.final_bracket}}}};
}

// Reference ensembles -------------------------------------------------------------

/// I.i.d. unit-mean exponential spacings (a regular, Poisson spectrum).
inline std::vector<double> sample_poisson_spacings(std::size_t count, Rng& rng) {
  if (count < 1) throw ParameterError("need count >= 1");
  std::vector<double> d(count);
  for (auto& x : d) x = rng.exponential();
  return d;
}

/// GOE matrix (B + B^T) / 2 with standard normal B: diagonal variance 1,
/// off-diagonal variance 1/2.
inline DenseSymMatrix sample_goe(std::size_t dim, Rng& rng) {
  if (dim < 2) throw ParameterError("GOE sample needs dim >= 2");
  DenseSymMatrix b(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) b(i, j) = rng.normal();
  DenseSymMatrix a(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) a(i, j) = 0.5 * (b(i, j) + b(j, i));
  return a;
}

/// Semicircle radius 2 sqrt(dim) sigma for off-diagonal variance sigma^2 = 1/2.
inline double goe_semicircle_radius(std::size_t dim) { return 2.0 * std::sqrt(double(dim) * 0.5); }

}  // namespace aqc
