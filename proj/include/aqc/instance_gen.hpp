#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "aqc/error.hpp"
#include "aqc/parallel.hpp"
#include "aqc/rng.hpp"
#include "aqc/sat_core.hpp"
#include "json.hpp"

namespace aqc {

enum class SolubilityFilter { any, soluble, unique_solution };

inline std::string_view to_string(SolubilityFilter f) {
  switch (f) {
    case SolubilityFilter::any: return "any";
    case SolubilityFilter::soluble: return "soluble";
    case SolubilityFilter::unique_solution: return "unique_solution";
  }
  return "?";
}

inline SolubilityFilter parse_filter(std::string_view s) {
  if (s == "any") return SolubilityFilter::any;
  if (s == "soluble") return SolubilityFilter::soluble;
  if (s == "unique_solution" || s == "unique") return SolubilityFilter::unique_solution;
  throw ParameterError("unknown filter '" + std::string(s) + "'");
}

struct EnsembleSpec {
  int n = 8;
  int m = 48;
  SolubilityFilter filter = SolubilityFilter::unique_solution;
  std::size_t count = 20;
  std::uint64_t seed = 1;
  std::size_t max_attempts = 1'000'000;
  int enumeration_bound = kDefaultEnumerationBound;

  void validate() const {
    if (n < 1 || m < 1 || count < 1)
      throw ParameterError("ensemble needs n >= 1, m >= 1, count >= 1");
    if (filter != SolubilityFilter::any && n > enumeration_bound)
      throw CapacityError("filtered ensemble needs n <= enumeration bound " +
                          std::to_string(enumeration_bound));
  }
};

struct Ensemble {
  EnsembleSpec spec;
  std::vector<CnfFormula> instances;
  std::size_t attempts = 0;

  double acceptance_rate() const {
    return attempts ? double(instances.size()) / double(attempts) : 0.0;
  }
};

/// Three distinct variables drawn uniformly without replacement, each
/// negated with probability 1/2.
inline Clause random_clause(int n, Rng& rng) {
  if (n < 3) throw ParameterError("random 3-SAT clause needs n >= 3, got " + std::to_string(n));
  std::vector<Literal> lits;
  lits.reserve(3);
  while (lits.size() < 3) {
    const int v = int(rng.below(std::uint64_t(n)));
    bool seen = false;
    for (const auto& l : lits) seen |= (l.var == v);
    if (!seen) lits.push_back({v, rng.coin()});
  }
  return Clause(std::move(lits));
}

inline CnfFormula random_formula(int n, int m, Rng& rng) {
  std::vector<Clause> clauses;
  clauses.reserve(std::size_t(m));
  for (int j = 0; j < m; ++j) clauses.push_back(random_clause(n, rng));
  return CnfFormula(n, std::move(clauses));
}

inline bool passes_filter(const CnfFormula& f, SolubilityFilter filter, int enumeration_bound) {
  switch (filter) {
    case SolubilityFilter::any: return true;
    case SolubilityFilter::soluble: return count_solutions_capped(f, 1, enumeration_bound) >= 1;
    case SolubilityFilter::unique_solution:
      return count_solutions_capped(f, 2, enumeration_bound) == 1;
  }
  return false;
}

/// Rejection sampler. Instance i draws from its own stream keyed by
/// seed ^ i, so the output is a pure function of the spec whatever the
/// worker count. The attempt budget is shared by the whole ensemble.
inline Ensemble generate_ensemble(const EnsembleSpec& spec, unsigned threads = 1) {
  spec.validate();
  Ensemble out;
  out.spec = spec;
  out.instances.resize(spec.count);
  std::vector<std::size_t> attempts(spec.count, 0);
  std::atomic<std::size_t> used{0};
  std::atomic<bool> exhausted{false};

  parallel_for(spec.count, threads, [&](std::size_t i) {
    Rng rng(substream_seed(spec.seed, i));
    for (;;) {
      if (exhausted.load(std::memory_order_relaxed)) return;
      if (used.fetch_add(1) >= spec.max_attempts) {
        exhausted = true;
        return;
      }
      ++attempts[i];
      auto f = random_formula(spec.n, spec.m, rng);
      if (passes_filter(f, spec.filter, spec.enumeration_bound)) {
        out.instances[i] = std::move(f);
        return;
      }
    }
  });

  std::size_t total = 0;
  for (auto a : attempts) total += a;
  if (exhausted) {
    std::size_t accepted = 0;
    for (std::size_t i = 0; i < spec.count; ++i)
      accepted += out.instances[i].num_clauses() == std::size_t(spec.m);
    throw GenerationExhausted(total, accepted);
  }
  out.attempts = total;
  return out;
}

inline nlohmann::json to_json(const EnsembleSpec& s) {
  return {{"n", s.n},
          {"m", s.m},
          {"filter", std::string(to_string(s.filter))},
          {"count", s.count},
          {"seed", s.seed},
          {"max_attempts", s.max_attempts},
          {"enumeration_bound", s.enumeration_bound},
          {"rng", kRngAlgorithm}};
}

/// Writes one DIMACS file per instance plus manifest.json into `dir`.
inline nlohmann::json write_ensemble(const Ensemble& e, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json files = nlohmann::json::array();
  const int width = int(std::to_string(e.instances.size()).size());
  for (std::size_t i = 0; i < e.instances.size(); ++i) {
    std::string idx = std::to_string(i);
    idx.insert(0, std::size_t(std::max(0, width - int(idx.size()))), '0');
    const std::string name = "instance_" + idx + ".cnf";
    write_dimacs(e.instances[i], dir / name);
    files.push_back(name);
  }
  nlohmann::json manifest = {{"spec", to_json(e.spec)},
                             {"files", files},
                             {"acceptance",
                              {{"attempts", e.attempts},
                               {"accepted", e.instances.size()},
                               {"rate", e.acceptance_rate()}}}};
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << '\n';
  return manifest;
}

}  // namespace aqc
