#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aqc/classical_solvers.hpp"
#include "aqc/error.hpp"
#include "aqc/hamiltonian.hpp"
#include "aqc/instance_gen.hpp"
#include "aqc/io.hpp"
#include "aqc/lz_model.hpp"
#include "aqc/parallel.hpp"
#include "aqc/rmt.hpp"
#include "aqc/spectra.hpp"
#include "json.hpp"

#ifndef AQC_VERSION
#define AQC_VERSION "0.1.0"
#endif

namespace aqc {

inline constexpr const char* kCodeVersion = AQC_VERSION;

/// 0, step, 2 step, ..., 1 (the last point is forced to exactly 1).
inline std::vector<double> uniform_grid(double step) {
  if (!(step > 0 && step <= 1)) throw ParameterError("grid step must lie in (0,1]");
  const auto k = std::size_t(std::llround(1.0 / step));
  std::vector<double> g(k + 1);
  for (std::size_t j = 0; j <= k; ++j) g[j] = std::min(1.0, double(j) / double(k));
  return g;
}

struct ExperimentConfig {
  EnsembleSpec ensemble;
  std::vector<double> s_grid = uniform_grid(0.1);
  UnfoldOptions unfold;
  BrodyFitOptions fit;
  double bin_width = 0.1;
  double q_irr = 0.2;
  int dense_bound = kDefaultDenseBound;
  unsigned threads = 1;

  void validate() const {
    ensemble.validate();
    if (s_grid.empty()) throw ParameterError("empty s grid");
    for (std::size_t j = 0; j < s_grid.size(); ++j) {
      if (!(s_grid[j] >= 0.0 && s_grid[j] <= 1.0)) throw ParameterError("s grid outside [0,1]");
      if (j && !(s_grid[j] > s_grid[j - 1])) throw ParameterError("s grid must be increasing");
    }
  }
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"ensemble", to_json(c.ensemble)},
          {"s_grid", c.s_grid},
          {"unfold",
           {{"fit_degree", c.unfold.fit_degree},
            {"trim_fraction", c.unfold.trim_fraction},
            {"min_levels", c.unfold.min_levels},
            {"adaptive_degree", c.unfold.adaptive_degree}}},
          {"fit",
           {{"method", c.fit.method == BrodyFitMethod::max_likelihood ? "max_likelihood"
                                                                       : "histogram_lsq"},
            {"min_sample", c.fit.min_sample},
            {"delta_min", c.fit.delta_min},
            {"normalize_mean", c.fit.normalize_mean},
            {"bootstrap", c.fit.bootstrap},
            {"seed", c.fit.seed}}},
          {"bin_width", c.bin_width},
          {"q_irr", c.q_irr},
          {"dense_bound", c.dense_bound}};
}

// q(s) ------------------------------------------------------------------------------

struct QPoint {
  double s = 0;
  double q = std::numeric_limits<double>::quiet_NaN();
  double stderr_q = std::numeric_limits<double>::quiet_NaN();
  std::size_t sample_size = 0;
  std::size_t failed_cells = 0;
  bool fit_failed = false;
  BrodyFit fit;
  NnsHistogram histogram;
  double rho = std::numeric_limits<double>::quiet_NaN();  // 1 / mean ground gap
};

struct QCurve {
  std::vector<QPoint> points;
  /// ground_gaps[j][i]: E1 - E0 of instance i at s_grid[j]; NaN if the cell failed.
  std::vector<std::vector<double>> ground_gaps;
  std::vector<std::string> cell_errors;
  std::size_t instances = 0;
  std::size_t attempts = 0;

  std::vector<double> s() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.s);
    return v;
  }
  std::vector<double> q() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.q);
    return v;
  }
  std::vector<double> rho() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.rho);
    return v;
  }
  /// Index of the largest finite q (first on ties), if any.
  std::optional<std::size_t> argmax_q() const {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < points.size(); ++j)
      if (std::isfinite(points[j].q) && (!best || points[j].q > points[*best].q)) best = j;
    return best;
  }
};

struct CellResult {
  std::vector<double> spacings;
  double ground_gap = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

/// Diagonalise, unfold and pool nearest-neighbour spacings at every (instance, s)
/// cell, then fit one Brody parameter per s. Failed cells are counted and left
/// out of the pool; they never abort the sweep.
inline QCurve run_q_of_s(const ExperimentConfig& cfg, const std::vector<CnfFormula>& instances) {
  cfg.validate();
  const std::size_t ns = cfg.s_grid.size(), ni = instances.size();
  if (ni == 0) throw SampleSizeError("q(s) needs at least one instance");
  std::vector<CellResult> cells(ns * ni);

  parallel_for(ni * ns, cfg.threads, [&](std::size_t item) {
    const std::size_t i = item / ns, j = item % ns;
    CellResult& cell = cells[j * ni + i];
    try {
      const auto ih = InterpolatedHamiltonian::from_formula(instances[i], cfg.dense_bound);
      const auto ev = eig_sym(h_of_s(ih, cfg.s_grid[j])).values;
      cell.ground_gap = ev[1] - ev[0];
      cell.spacings = nns(unfold(ev, cfg.unfold));
    } catch (const Error& e) {
      cell.error = e.what();
      cell.spacings.clear();
    }
  });

  QCurve curve;
  curve.instances = ni;
  curve.ground_gaps.assign(ns, std::vector<double>(ni));
  for (std::size_t j = 0; j < ns; ++j) {
    QPoint p;
    p.s = cfg.s_grid[j];
    std::vector<double> pooled;
    std::vector<double> gaps;
    for (std::size_t i = 0; i < ni; ++i) {
      const auto& cell = cells[j * ni + i];
      curve.ground_gaps[j][i] = cell.ground_gap;
      if (std::isfinite(cell.ground_gap)) gaps.push_back(cell.ground_gap);
      if (!cell.error.empty()) {
        ++p.failed_cells;
        curve.cell_errors.push_back("instance " + std::to_string(i) + " s=" + fmt_double(p.s) +
                                    ": " + cell.error);
        continue;
      }
      pooled.insert(pooled.end(), cell.spacings.begin(), cell.spacings.end());
    }
    p.sample_size = pooled.size();
    if (gaps.size() >= 2) {
      try {
        p.rho = estimate_rho(gaps);
      } catch (const DegeneracyError&) {
      }
    }
    try {
      auto fo = cfg.fit;
      fo.seed = substream_seed(cfg.fit.seed, j);
      p.fit = fit_brody(pooled, fo);
      p.q = p.fit.q;
      p.stderr_q = p.fit.stderr_q;
      p.histogram = histogram(pooled, cfg.bin_width);
    } catch (const Error& e) {
      p.fit_failed = true;
      curve.cell_errors.push_back("fit at s=" + fmt_double(p.s) + ": " + e.what());
    }
    curve.points.push_back(std::move(p));
  }
  return curve;
}

inline QCurve run_q_of_s(const ExperimentConfig& cfg) {
  const auto ens = generate_ensemble(cfg.ensemble, cfg.threads);
  auto curve = run_q_of_s(cfg, ens.instances);
  curve.attempts = ens.attempts;
  return curve;
}

inline std::string qcurve_csv(const QCurve& c) {
  std::ostringstream out;
  out << "s,q,stderr,sample_size,failed_cells,rho\n";
  for (const auto& p : c.points)
    out << fmt_double(p.s) << ',' << fmt_double(p.q) << ',' << fmt_double(p.stderr_q) << ','
        << p.sample_size << ',' << p.failed_cells << ',' << fmt_double(p.rho) << '\n';
  return out.str();
}

inline std::string ground_gaps_csv(const QCurve& c) {
  std::ostringstream out;
  out << "instance_id,s,gap\n";
  for (std::size_t i = 0; i < c.instances; ++i)
    for (std::size_t j = 0; j < c.points.size(); ++j)
      out << i << ',' << fmt_double(c.points[j].s) << ',' << fmt_double(c.ground_gaps[j][i])
          << '\n';
  return out.str();
}

// Ground-gap distribution --------------------------------------------------------------

struct GapDistribution {
  double s = 0;
  std::vector<double> gaps;        // raw E1 - E0 per instance
  std::vector<double> normalized;  // unit ensemble mean
  NnsHistogram histogram;
  BrodyFit fit;
  std::optional<QCurve> selection_curve;  // q(s) used to choose s, if any
};

/// Normalise ground gaps to unit mean, histogram them and fit q.
inline GapDistribution gap_distribution_from_gaps(std::vector<double> gaps, double s,
                                                  const BrodyFitOptions& fit,
                                                  double bin_width = 0.1) {
  GapDistribution d;
  d.s = s;
  d.gaps = std::move(gaps);
  double sum = 0;
  for (double g : d.gaps) sum += g;
  if (d.gaps.empty() || !(sum > 0)) throw SampleSizeError("ground gaps are empty or all zero");
  const double mean = sum / double(d.gaps.size());
  for (double g : d.gaps) d.normalized.push_back(g / mean);
  d.histogram = histogram(d.normalized, bin_width);
  d.fit = fit_brody(d.normalized, fit);
  return d;
}

struct GapDistributionOptions {
  std::size_t min_count = 100;
  /// Instances (from the front of the ensemble) used for the q(s) curve that
  /// picks the evaluation point.
  std::size_t selection_count = 20;
  std::optional<double> fixed_s;
};

/// One E1 - E0 sample per instance at a point of the irregular region (by
/// default where the ensemble q(s) peaks), then a Brody fit of the
/// normalised gaps.
inline GapDistribution run_gap_distribution(const ExperimentConfig& cfg,
                                            const GapDistributionOptions& opt = {}) {
  cfg.validate();
  if (cfg.ensemble.count < opt.min_count)
    throw SampleSizeError("gap distribution needs at least " + std::to_string(opt.min_count) +
                          " instances, got " + std::to_string(cfg.ensemble.count));
  const auto ens = generate_ensemble(cfg.ensemble, cfg.threads);

  double s = 0;
  std::optional<QCurve> selection;
  if (opt.fixed_s) {
    s = *opt.fixed_s;
  } else {
    const std::size_t k = std::min(opt.selection_count, ens.instances.size());
    std::vector<CnfFormula> head(ens.instances.begin(), ens.instances.begin() + std::ptrdiff_t(k));
    selection = run_q_of_s(cfg, head);
    const auto best = selection->argmax_q();
    if (!best || !(selection->points[*best].q >= cfg.q_irr))
      throw NoIrregularRegion(
          "no s with q >= " + fmt_double(cfg.q_irr) +
          "; the ensemble looks regular everywhere (easy instances?), so the ground-gap "
          "statistics are not in the random-matrix regime");
    s = selection->points[*best].s;
  }

  std::vector<double> gaps(ens.instances.size());
  parallel_for(ens.instances.size(), cfg.threads, [&](std::size_t i) {
    const auto ih = InterpolatedHamiltonian::from_formula(ens.instances[i], cfg.dense_bound);
    gaps[i] = ground_gap(ih, s);
  });
  auto fo = cfg.fit;
  fo.seed = substream_seed(cfg.fit.seed, 0xfeedULL);
  auto d = gap_distribution_from_gaps(std::move(gaps), s, fo, cfg.bin_width);
  d.selection_curve = std::move(selection);
  return d;
}

// Scaling study ---------------------------------------------------------------------

struct ScalingPoint {
  int n = 0;
  int m = 0;
  QCurve curve;
  RhoMin rho_min;
  double sigma_tilde = std::numeric_limits<double>::quiet_NaN();
};

struct ScalingReport {
  double ratio = 0;
  std::vector<ScalingPoint> points;
  std::optional<ScalingFit> fit;
  std::string status;
};

/// rho_min per problem size at a fixed clause/variable ratio, and its
/// log-linear growth rate. Sizes with no irregular region are reported as
/// such and left out of the fit.
inline ScalingReport run_scaling_study(const ExperimentConfig& base, std::span<const int> n_list,
                                       double ratio) {
  if (n_list.size() < 3) throw SampleSizeError("scaling study needs at least 3 problem sizes");
  if (!(ratio > 0)) throw ParameterError("ratio must be positive");
  for (int n : n_list)
    if (n > base.dense_bound) throw CapacityError("n=" + std::to_string(n) + " exceeds dense bound");
  ScalingReport rep;
  rep.ratio = ratio;
  std::vector<double> ns, rhos;
  for (int n : n_list) {
    ExperimentConfig cfg = base;
    cfg.ensemble.n = n;
    cfg.ensemble.m = std::max(1, int(std::lround(ratio * n)));
    cfg.ensemble.seed = substream_seed(base.ensemble.seed, std::uint64_t(n));
    ScalingPoint p;
    p.n = n;
    p.m = cfg.ensemble.m;
    p.curve = run_q_of_s(cfg);
    const auto s = p.curve.s(), q = p.curve.q(), rho = p.curve.rho();
    p.rho_min = rho_min_over_irregular(s, q, rho, cfg.q_irr);
    p.sigma_tilde = estimate_sigma_tilde(s, p.curve.ground_gaps, rho, q, cfg.q_irr);
    if (p.rho_min.irregular_region_found) {
      ns.push_back(n);
      rhos.push_back(p.rho_min.rho_min);
    }
    rep.points.push_back(std::move(p));
  }
  if (ns.size() >= 3) {
    rep.fit = scaling_fit(ns, rhos);
    rep.status = "ok";
  } else if (ns.empty()) {
    rep.status = "no irregular region at any size";
  } else {
    rep.status = "irregular region found at fewer than 3 sizes";
  }
  return rep;
}

inline nlohmann::json to_json(const ScalingReport& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points) {
    nlohmann::json j = {{"n", p.n},
                        {"m", p.m},
                        {"irregular_region_found", p.rho_min.irregular_region_found},
                        {"irregular_s", p.rho_min.irregular_s}};
    if (p.rho_min.irregular_region_found) {
      j["rho_min"] = p.rho_min.rho_min;
      j["s_at_rho_min"] = p.rho_min.s_at_min;
      j["delta_s"] = p.rho_min.delta_s;
    } else {
      j["rho_min"] = nullptr;
    }
    j["sigma_tilde"] = std::isfinite(p.sigma_tilde) ? nlohmann::json(p.sigma_tilde) : nullptr;
    if (const auto best = p.curve.argmax_q()) {
      j["q_max"] = p.curve.points[*best].q;
      j["s_at_q_max"] = p.curve.points[*best].s;
    }
    pts.push_back(j);
  }
  nlohmann::json out = {{"ratio", r.ratio}, {"status", r.status}, {"sizes", pts}};
  if (r.fit) {
    out["fit"] = {{"model", "log(rho_min) = a n + b"},
                  {"a", r.fit->exponent},
                  {"b", r.fit->intercept},
                  {"stderr_a", r.fit->stderr_exponent},
                  {"points", r.fit->points}};
    // Fixed failure bound forces T proportional to rho_min, so T grows like exp(a n).
    out["implied_time_scaling"] = {{"model", "T proportional to exp(a n)"},
                                   {"a", r.fit->exponent}};
  } else {
    out["fit"] = nullptr;
  }
  return out;
}

// Crossing tables ---------------------------------------------------------------------

struct CrossingRow {
  std::size_t instance_id = 0;
  std::size_t pair = 0;
  LzCrossing crossing;
  double probability = 0;
};

inline std::vector<CrossingRow> crossing_table(const std::vector<CnfFormula>& instances,
                                               std::span<const double> s_grid,
                                               std::size_t lower_level, double s_dot,
                                               const CrossingOptions& opt = {},
                                               unsigned threads = 1,
                                               int dense_bound = kDefaultDenseBound) {
  std::vector<std::vector<CrossingRow>> per(instances.size());
  parallel_for(instances.size(), threads, [&](std::size_t i) {
    const auto ih = InterpolatedHamiltonian::from_formula(instances[i], dense_bound);
    const auto curves = track_levels(ih, s_grid, lower_level + 2);
    for (const auto& c : extract_crossings(curves, lower_level, opt).crossings)
      per[i].push_back({i, lower_level, c, lz_probability(c, s_dot)});
  });
  std::vector<CrossingRow> rows;
  for (auto& v : per) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

inline std::string crossing_csv(const std::vector<CrossingRow>& rows) {
  std::ostringstream out;
  out << "instance_id,pair,s_star,delta_e,delta_m,P\n";
  for (const auto& r : rows)
    out << r.instance_id << ',' << r.pair << ',' << fmt_double(r.crossing.s_star) << ','
        << fmt_double(r.crossing.delta_e) << ',' << fmt_double(r.crossing.delta_m) << ','
        << fmt_double(r.probability) << '\n';
  return out.str();
}

// Result directories --------------------------------------------------------------------

/// Directory name derived from the experiment name and a hash of its config.
inline std::filesystem::path run_directory(const std::filesystem::path& root,
                                           const std::string& experiment,
                                           const nlohmann::json& config) {
  return root / (experiment + "-" + hex64(fnv1a64(config.dump())));
}

inline std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// metadata.json next to the outputs: everything needed to regenerate them.
inline void write_metadata(const std::filesystem::path& dir, const std::string& experiment,
                           const nlohmann::json& config, const nlohmann::json& extra = {}) {
  nlohmann::json meta = {{"experiment", experiment},
                         {"config", config},
                         {"code_version", kCodeVersion},
                         {"rng", kRngAlgorithm},
                         {"created_utc", utc_timestamp()}};
  if (!extra.is_null()) meta["diagnostics"] = extra;
  write_text(dir / "metadata.json", meta.dump(2) + "\n");
}

}  // namespace aqc
