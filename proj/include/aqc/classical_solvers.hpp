#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "aqc/error.hpp"
#include "aqc/instance_gen.hpp"
#include "aqc/io.hpp"
#include "aqc/parallel.hpp"
#include "aqc/rng.hpp"
#include "aqc/sat_core.hpp"

namespace aqc {

struct GsatParams {
  std::uint64_t max_flips = 80;
  std::uint64_t max_tries = 50;
  std::uint64_t seed = 1;

  /// Sweep defaults: 10 n flips per try, 50 tries.
  static GsatParams for_size(int n, std::uint64_t seed = 1) {
    return {std::uint64_t(10 * n), 50, seed};
  }

  void validate() const {
    if (max_flips < 1 || max_tries < 1)
      throw ParameterError("GSAT needs max_flips >= 1 and max_tries >= 1");
  }
};

struct SolveReport {
  bool solved = false;
  /// GSAT: flips consumed over all tries. DPLL: branching nodes.
  std::uint64_t cost = 0;
  std::optional<Assignment> assignment;
};

namespace detail {

struct Occurrences {
  // occ[v] = list of (clause index, literal negated)
  std::vector<std::vector<std::pair<std::size_t, bool>>> occ;

  explicit Occurrences(const CnfFormula& f) : occ(std::size_t(f.num_vars())) {
    for (std::size_t c = 0; c < f.num_clauses(); ++c)
      for (const auto& l : f.clauses()[c].literals()) occ[std::size_t(l.var)].push_back({c, l.negated});
  }
};

}  // namespace detail

/// Classic GSAT. Each try draws from its own stream (seed, try index), so a
/// larger flip budget replays every earlier try's prefix exactly.
inline SolveReport gsat_solve(const CnfFormula& f, const GsatParams& params) {
  params.validate();
  if (f.num_clauses() == 0) throw ContractError("GSAT needs a nonempty formula");
  const std::size_t n = std::size_t(f.num_vars());
  const std::size_t m = f.num_clauses();
  const detail::Occurrences occ(f);

  SolveReport report;
  std::vector<bool> value(n);
  std::vector<int> num_true(m);
  std::vector<long> score(n);
  std::vector<std::size_t> best;

  for (std::uint64_t t = 0; t < params.max_tries; ++t) {
    Rng rng(substream_seed(params.seed, t));
    for (std::size_t v = 0; v < n; ++v) value[v] = rng.coin();
    std::size_t unsat = 0;
    for (std::size_t c = 0; c < m; ++c) {
      int k = 0;
      for (const auto& l : f.clauses()[c].literals()) k += value[std::size_t(l.var)] != l.negated;
      num_true[c] = k;
      unsat += k == 0;
    }

    for (std::uint64_t flip = 0;; ++flip) {
      if (unsat == 0) {
        report.solved = true;
        report.assignment = Assignment(value);
        return report;
      }
      if (flip == params.max_flips) break;

      // score = clauses fixed minus clauses broken by flipping v
      long top = std::numeric_limits<long>::min();
      best.clear();
      for (std::size_t v = 0; v < n; ++v) {
        long s = 0;
        for (const auto& [c, neg] : occ.occ[v]) {
          if (num_true[c] == 0) ++s;
          else if (num_true[c] == 1 && value[v] != neg) --s;
        }
        score[v] = s;
        if (s > top) {
          top = s;
          best.clear();
        }
        if (s == top) best.push_back(v);
      }
      const std::size_t v = best[rng.below(best.size())];
      value[v] = !value[v];
      for (const auto& [c, neg] : occ.occ[v]) {
        const bool now_true = value[v] != neg;
        if (now_true) {
          if (num_true[c]++ == 0) --unsat;
        } else {
          if (--num_true[c] == 0) ++unsat;
        }
      }
      ++report.cost;
    }
  }
  return report;
}

namespace detail {

class Dpll {
 public:
  explicit Dpll(const CnfFormula& f) : f_(f), value_(std::size_t(f.num_vars()), kUnassigned) {}

  SolveReport run() {
    SolveReport r;
    r.solved = search();
    r.cost = nodes_;
    if (r.solved) {
      Assignment a(value_.size());
      for (std::size_t v = 0; v < value_.size(); ++v) a.bits[v] = value_[v] == kTrue;
      r.assignment = std::move(a);
    }
    return r;
  }

 private:
  static constexpr signed char kUnassigned = -1, kFalse = 0, kTrue = 1;

  enum class Status { conflict, satisfied, open };

  bool lit_true(const Literal& l) const {
    const auto v = value_[std::size_t(l.var)];
    return v != kUnassigned && (v == kTrue) != l.negated;
  }

  // Unit propagation and pure-literal elimination to a fixpoint.
  Status simplify() {
    for (;;) {
      bool changed = false;
      bool all_sat = true;
      std::vector<signed char> polarity(value_.size(), 0);  // bit0: positive, bit1: negative
      for (const auto& c : f_.clauses()) {
        bool sat = false;
        int free = 0;
        const Literal* last_free = nullptr;
        for (const auto& l : c.literals()) {
          if (value_[std::size_t(l.var)] == kUnassigned) {
            ++free;
            last_free = &l;
          } else if (lit_true(l)) {
            sat = true;
            break;
          }
        }
        if (sat) continue;
        all_sat = false;
        if (free == 0) return Status::conflict;
        if (free == 1) {
          value_[std::size_t(last_free->var)] = last_free->negated ? kFalse : kTrue;
          changed = true;
          continue;
        }
        for (const auto& l : c.literals())
          if (value_[std::size_t(l.var)] == kUnassigned)
            polarity[std::size_t(l.var)] |= l.negated ? 2 : 1;
      }
      if (all_sat) return Status::satisfied;
      if (changed) continue;
      for (std::size_t v = 0; v < value_.size(); ++v) {
        if (value_[v] != kUnassigned) continue;
        if (polarity[v] == 1) value_[v] = kTrue, changed = true;
        else if (polarity[v] == 2) value_[v] = kFalse, changed = true;
      }
      if (!changed) return Status::open;
    }
  }

  // Branch on a free literal of the first shortest open clause.
  Literal pick() const {
    const Literal* choice = nullptr;
    int best = std::numeric_limits<int>::max();
    for (const auto& c : f_.clauses()) {
      int free = 0;
      bool sat = false;
      const Literal* first = nullptr;
      for (const auto& l : c.literals()) {
        if (value_[std::size_t(l.var)] == kUnassigned) {
          ++free;
          if (!first) first = &l;
        } else if (lit_true(l)) {
          sat = true;
        }
      }
      if (!sat && free > 0 && free < best) {
        best = free;
        choice = first;
      }
    }
    return *choice;
  }

  bool search() {
    const auto saved = value_;
    switch (simplify()) {
      case Status::conflict: value_ = saved; return false;
      case Status::satisfied:
        for (auto& v : value_)
          if (v == kUnassigned) v = kFalse;
        return true;
      case Status::open: break;
    }
    ++nodes_;
    const Literal l = pick();
    const auto after_simplify = value_;
    for (bool positive : {true, false}) {
      value_[std::size_t(l.var)] = (positive != l.negated) ? kTrue : kFalse;
      if (search()) return true;
      value_ = after_simplify;
    }
    value_ = saved;
    return false;
  }

  const CnfFormula& f_;
  std::vector<signed char> value_;
  std::uint64_t nodes_ = 0;
};

}  // namespace detail

/// Davis-Putnam style complete search (DPLL with unit propagation and
/// pure-literal elimination). Cost counts branching nodes only.
inline SolveReport dp_solve(const CnfFormula& f) { return detail::Dpll(f).run(); }

enum class SweepSolver { gsat, dp };

struct HardnessRow {
  int m = 0;
  int n = 0;
  double ratio = 0;
  double mean_cost = 0;
  double std_err = 0;
  double solved_fraction = 0;
};

struct MeanStderr {
  double mean = 0;
  double std_err = std::numeric_limits<double>::quiet_NaN();
};

/// Sample mean and standard error of the mean; stderr is NaN for one sample.
inline MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr r;
  if (xs.empty()) {
    r.mean = std::numeric_limits<double>::quiet_NaN();
    return r;
  }
  double sum = 0;
  for (double x : xs) sum += x;
  r.mean = sum / double(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.std_err = std::sqrt(ss / double(xs.size() - 1) / double(xs.size()));
  }
  return r;
}

struct HardnessSweepConfig {
  int n = 8;
  std::vector<int> m_list;
  std::size_t instances_per_point = 1000;
  GsatParams gsat = GsatParams::for_size(8);
  SweepSolver solver = SweepSolver::gsat;
  SolubilityFilter filter = SolubilityFilter::soluble;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Mean solver cost per clause count over filtered random ensembles.
inline std::vector<HardnessRow> hardness_sweep(const HardnessSweepConfig& cfg) {
  std::vector<HardnessRow> rows;
  for (std::size_t k = 0; k < cfg.m_list.size(); ++k) {
    const int m = cfg.m_list[k];
    EnsembleSpec spec;
    spec.n = cfg.n;
    spec.m = m;
    spec.filter = cfg.filter;
    spec.count = cfg.instances_per_point;
    spec.seed = substream_seed(cfg.seed, std::uint64_t(m));
    const auto ens = generate_ensemble(spec, cfg.threads);

    std::vector<double> costs(ens.instances.size());
    std::vector<char> solved(ens.instances.size());
    parallel_for(ens.instances.size(), cfg.threads, [&](std::size_t i) {
      SolveReport r;
      if (cfg.solver == SweepSolver::gsat) {
        GsatParams p = cfg.gsat;
        p.seed = substream_seed(cfg.gsat.seed ^ (std::uint64_t(m) << 32), i);
        r = gsat_solve(ens.instances[i], p);
      } else {
        r = dp_solve(ens.instances[i]);
      }
      costs[i] = double(r.cost);
      solved[i] = r.solved;
    });

    const auto ms = mean_stderr(costs);
    std::size_t ok = 0;
    for (char s : solved) ok += s != 0;
    rows.push_back({m, cfg.n, double(m) / double(cfg.n), ms.mean, ms.std_err,
                    double(ok) / double(solved.size())});
  }
  return rows;
}

inline std::string hardness_csv(const std::vector<HardnessRow>& rows) {
  std::ostringstream out;
  out << "m,n,ratio,mean_cost,std_err,solved_fraction\n";
  for (const auto& r : rows)
    out << r.m << ',' << r.n << ',' << fmt_double(r.ratio) << ',' << fmt_double(r.mean_cost)
        << ',' << fmt_double(r.std_err) << ',' << fmt_double(r.solved_fraction) << '\n';
  return out.str();
}

}  // namespace aqc
