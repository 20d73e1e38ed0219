#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "aqc/error.hpp"

namespace aqc {

/// Largest n accepted by count_solutions unless the caller raises it.
inline constexpr int kDefaultEnumerationBound = 24;
inline constexpr int kMaxClauseWidth = 3;

/// A literal over a 0-based variable index.
struct Literal {
  int var = 0;
  bool negated = false;

  /// Literal from a signed 1-based DIMACS integer (nonzero).
  static Literal from_dimacs(int lit) { return {lit > 0 ? lit - 1 : -lit - 1, lit < 0}; }
  int to_dimacs() const { return negated ? -(var + 1) : var + 1; }

  friend bool operator==(const Literal&, const Literal&) = default;
};

class Clause {
 public:
  Clause() = default;

  explicit Clause(std::vector<Literal> literals) : literals_(std::move(literals)) {
    if (literals_.empty()) throw ContractError("clause must be nonempty");
    if (literals_.size() > std::size_t(kMaxClauseWidth))
      throw ContractError("clause width exceeds 3");
    for (std::size_t i = 0; i < literals_.size(); ++i) {
      if (literals_[i].var < 0) throw ContractError("negative variable index");
      for (std::size_t j = 0; j < i; ++j)
        if (literals_[i].var == literals_[j].var)
          throw ContractError("repeated variable within a clause");
    }
    for (const auto& l : literals_) {
      if (l.var >= 64) continue;  // packed evaluation is only used for n <= 62
      var_mask_ |= std::uint64_t{1} << l.var;
      if (l.negated) falsifying_bits_ |= std::uint64_t{1} << l.var;
    }
  }

  /// Clause from signed 1-based DIMACS literals, e.g. {1, -2, 3}.
  static Clause dimacs(std::initializer_list<int> lits) {
    std::vector<Literal> v;
    for (int l : lits) {
      if (l == 0) throw ContractError("0 is not a literal");
      v.push_back(Literal::from_dimacs(l));
    }
    return Clause(std::move(v));
  }

  const std::vector<Literal>& literals() const noexcept { return literals_; }
  std::size_t width() const noexcept { return literals_.size(); }

  /// True when every literal is false for the packed assignment `bits`
  /// (bit i set means variable i is true). Valid for variable indices < 64.
  bool violated_by(std::uint64_t bits) const noexcept {
    return (bits & var_mask_) == falsifying_bits_;
  }

  int max_var() const noexcept {
    int m = -1;
    for (const auto& l : literals_) m = std::max(m, l.var);
    return m;
  }

  friend bool operator==(const Clause& a, const Clause& b) { return a.literals_ == b.literals_; }

 private:
  std::vector<Literal> literals_;
  std::uint64_t var_mask_ = 0;
  std::uint64_t falsifying_bits_ = 0;
};

struct Assignment {
  std::vector<bool> bits;

  Assignment() = default;
  explicit Assignment(std::size_t n, bool value = false) : bits(n, value) {}
  explicit Assignment(std::vector<bool> b) : bits(std::move(b)) {}

  /// Little-endian unpacking: variable i takes bit i of `packed`.
  static Assignment from_index(std::uint64_t packed, int n) {
    Assignment a(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) a.bits[std::size_t(i)] = (packed >> i) & 1U;
    return a;
  }

  std::uint64_t to_index() const {
    std::uint64_t x = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
      if (bits[i]) x |= std::uint64_t{1} << i;
    return x;
  }

  std::size_t size() const noexcept { return bits.size(); }
  bool operator[](std::size_t i) const { return bits[i]; }

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

class CnfFormula {
 public:
  CnfFormula() = default;

  CnfFormula(int num_vars, std::vector<Clause> clauses)
      : num_vars_(num_vars), clauses_(std::move(clauses)) {
    if (num_vars_ < 1) throw ContractError("formula needs at least one variable");
    for (const auto& c : clauses_)
      if (c.max_var() >= num_vars_)
        throw ContractError("literal references variable outside [1, n]");
  }

  int num_vars() const noexcept { return num_vars_; }
  std::size_t num_clauses() const noexcept { return clauses_.size(); }
  const std::vector<Clause>& clauses() const noexcept { return clauses_; }
  double ratio() const noexcept { return double(clauses_.size()) / double(num_vars_); }

  /// Number of clause occurrences that mention each variable.
  std::vector<int> variable_degrees() const {
    std::vector<int> d(std::size_t(num_vars_), 0);
    for (const auto& c : clauses_)
      for (const auto& l : c.literals()) ++d[std::size_t(l.var)];
    return d;
  }

  /// Violated-clause count for a packed little-endian assignment. Requires n <= 64.
  int violated_count(std::uint64_t bits) const noexcept {
    int v = 0;
    for (const auto& c : clauses_) v += c.violated_by(bits);
    return v;
  }

  friend bool operator==(const CnfFormula&, const CnfFormula&) = default;

 private:
  int num_vars_ = 1;
  std::vector<Clause> clauses_;
};

/// Number of clauses falsified by `a`; duplicate clauses count separately.
inline int evaluate(const CnfFormula& f, const Assignment& a) {
  if (a.size() != std::size_t(f.num_vars()))
    throw ContractError("assignment length " + std::to_string(a.size()) +
                        " does not match formula with n=" + std::to_string(f.num_vars()));
  int violated = 0;
  for (const auto& c : f.clauses()) {
    bool sat = false;
    for (const auto& l : c.literals())
      if (a[std::size_t(l.var)] != l.negated) {
        sat = true;
        break;
      }
    violated += !sat;
  }
  return violated;
}

/// Exact model count by enumerating all 2^n assignments.
inline std::uint64_t count_solutions(const CnfFormula& f,
                                     int enumeration_bound = kDefaultEnumerationBound) {
  if (f.num_vars() > enumeration_bound || f.num_vars() > 62)
    throw CapacityError("count_solutions: n=" + std::to_string(f.num_vars()) +
                        " exceeds enumeration bound " + std::to_string(enumeration_bound));
  const std::uint64_t total = std::uint64_t{1} << f.num_vars();
  std::uint64_t count = 0;
  for (std::uint64_t b = 0; b < total; ++b) {
    bool ok = true;
    for (const auto& c : f.clauses())
      if (c.violated_by(b)) {
        ok = false;
        break;
      }
    count += ok;
  }
  return count;
}

/// Early-exit variant of count_solutions: stops once `cap` models are seen.
inline std::uint64_t count_solutions_capped(const CnfFormula& f, std::uint64_t cap,
                                            int enumeration_bound = kDefaultEnumerationBound) {
  if (f.num_vars() > enumeration_bound || f.num_vars() > 62)
    throw CapacityError("count_solutions: n=" + std::to_string(f.num_vars()) +
                        " exceeds enumeration bound " + std::to_string(enumeration_bound));
  const std::uint64_t total = std::uint64_t{1} << f.num_vars();
  std::uint64_t count = 0;
  for (std::uint64_t b = 0; b < total && count < cap; ++b) {
    bool ok = true;
    for (const auto& c : f.clauses())
      if (c.violated_by(b)) {
        ok = false;
        break;
      }
    count += ok;
  }
  return count;
}

// DIMACS ---------------------------------------------------------------------

inline CnfFormula read_dimacs(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  long n = -1, m = -1;
  std::size_t header_line = 0;
  std::vector<Clause> clauses;
  std::vector<int> pending;
  std::size_t pending_line = 0;

  auto finish_clause = [&](std::size_t at) {
    std::vector<Literal> lits;
    for (int l : pending) {
      if (std::abs(l) > n)
        throw ParseError(at, "literal " + std::to_string(l) + " out of range for n=" +
                                 std::to_string(n));
      lits.push_back(Literal::from_dimacs(l));
    }
    try {
      clauses.emplace_back(std::move(lits));
    } catch (const ContractError& e) {
      throw ParseError(at, e.what());
    }
    pending.clear();
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const char lead = line[first];
    if (lead == 'c') continue;
    if (lead == '%') break;  // SATLIB end marker
    if (lead == 'p') {
      if (header_line) throw ParseError(lineno, "duplicate header");
      std::istringstream hs(line.substr(first));
      std::string p, fmt, extra;
      if (!(hs >> p >> fmt >> n >> m) || p != "p" || fmt != "cnf" || n < 1 || m < 0 ||
          (hs >> extra))
        throw ParseError(lineno, "malformed header, expected 'p cnf <n> <m>'");
      header_line = lineno;
      continue;
    }
    if (!header_line) throw ParseError(lineno, "clause data before 'p cnf' header");
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      long v = 0;
      std::size_t used = 0;
      try {
        v = std::stol(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw ParseError(lineno, "bad token '" + tok + "'");
      if (v == 0) {
        if (pending.empty()) throw ParseError(lineno, "empty clause");
        finish_clause(lineno);
      } else {
        if (pending.empty()) pending_line = lineno;
        if (std::abs(v) > n)
          throw ParseError(lineno, "literal " + tok + " out of range for n=" + std::to_string(n));
        pending.push_back(int(v));
      }
    }
  }
  if (!header_line) throw ParseError(lineno, "missing 'p cnf' header");
  if (!pending.empty()) throw ParseError(pending_line, "clause missing 0 terminator");
  if (long(clauses.size()) != m)
    throw ParseError(lineno, "header declares " + std::to_string(m) + " clauses but file has " +
                                 std::to_string(clauses.size()));
  return CnfFormula(int(n), std::move(clauses));
}

inline CnfFormula parse_dimacs(const std::string& text) {
  std::istringstream in(text);
  return read_dimacs(in);
}

inline CnfFormula read_dimacs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_dimacs(in);
}

inline void write_dimacs(const CnfFormula& f, std::ostream& out) {
  out << "p cnf " << f.num_vars() << ' ' << f.num_clauses() << '\n';
  for (const auto& c : f.clauses()) {
    for (const auto& l : c.literals()) out << l.to_dimacs() << ' ';
    out << "0\n";
  }
}

inline std::string to_dimacs(const CnfFormula& f) {
  std::ostringstream out;
  write_dimacs(f, out);
  return out.str();
}

inline void write_dimacs(const CnfFormula& f, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_dimacs(f, out);
}

}  // namespace aqc
