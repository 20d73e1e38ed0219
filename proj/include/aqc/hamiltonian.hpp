#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "aqc/error.hpp"
#include "aqc/sat_core.hpp"
#include "json.hpp"

namespace aqc {

/// Largest n for which dense 2^n x 2^n matrices are built by default.
inline constexpr int kDefaultDenseBound = 14;

/// Dense real symmetric matrix, row-major. Symmetry is a precondition checked
/// by is_symmetric(); mutation through operator() is the caller's
/// responsibility to keep symmetric.
class DenseSymMatrix {
 public:
  DenseSymMatrix() = default;
  explicit DenseSymMatrix(std::size_t dim) : dim_(dim), data_(dim * dim, 0.0) {}

  DenseSymMatrix(std::size_t dim, std::vector<double> row_major)
      : dim_(dim), data_(std::move(row_major)) {
    if (data_.size() != dim_ * dim_) throw ContractError("matrix data size != dim^2");
  }

  static DenseSymMatrix diagonal(std::span<const double> d) {
    DenseSymMatrix a(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) a(i, i) = d[i];
    return a;
  }

  std::size_t dim() const noexcept { return dim_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool is_symmetric(double rel_tol = 1e-12) const {
    const double scale = std::max(1.0, max_abs());
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = i + 1; j < dim_; ++j)
        if (std::abs((*this)(i, j) - (*this)(j, i)) > rel_tol * scale) return false;
    return true;
  }

  double max_abs() const {
    double m = 0;
    for (double x : data_) m = std::max(m, std::abs(x));
    return m;
  }

  double trace() const {
    double t = 0;
    for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  double frobenius_norm() const {
    double s = 0;
    for (double x : data_) s += x * x;
    return std::sqrt(s);
  }

  /// Upper bound on the spectral norm: max absolute row sum.
  double inf_norm() const {
    double best = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
      double row = 0;
      for (std::size_t j = 0; j < dim_; ++j) row += std::abs((*this)(i, j));
      best = std::max(best, row);
    }
    return best;
  }

  std::vector<double> apply(std::span<const double> x) const {
    std::vector<double> y(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i) {
      double acc = 0;
      const double* row = &data_[i * dim_];
      for (std::size_t j = 0; j < dim_; ++j) acc += row[j] * x[j];
      y[i] = acc;
    }
    return y;
  }

  friend bool operator==(const DenseSymMatrix&, const DenseSymMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

/// Entrywise (1 - s) a + s b.
inline DenseSymMatrix lerp(const DenseSymMatrix& a, const DenseSymMatrix& b, double s) {
  if (a.dim() != b.dim()) throw ContractError("lerp: dimension mismatch");
  DenseSymMatrix out(a.dim());
  auto x = a.data();
  auto y = b.data();
  auto z = out.data();
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = (1.0 - s) * x[k] + s * y[k];
  return out;
}

namespace detail {
inline void check_dense_capacity(const CnfFormula& f, int bound) {
  if (f.num_vars() > bound)
    throw CapacityError("dense Hamiltonian for n=" + std::to_string(f.num_vars()) +
                        " exceeds bound n <= " + std::to_string(bound));
}
}  // namespace detail

/// Diagonal cost matrix: entry b is the number of clauses violated by the
/// assignment whose variable i is bit i-1 of b (little-endian, 1 = true).
inline DenseSymMatrix build_problem_hamiltonian(const CnfFormula& f,
                                                int dense_bound = kDefaultDenseBound) {
  detail::check_dense_capacity(f, dense_bound);
  const std::size_t dim = std::size_t{1} << f.num_vars();
  DenseSymMatrix h(dim);
  for (std::size_t b = 0; b < dim; ++b) h(b, b) = f.violated_count(b);
  return h;
}

/// Degree-weighted transverse field: sum_j d_j (1 - X_j) / 2, where d_j is
/// the number of clauses containing variable j. Ground energy 0 with the
/// uniform superposition as ground vector.
inline DenseSymMatrix build_initial_hamiltonian(const CnfFormula& f,
                                                int dense_bound = kDefaultDenseBound) {
  detail::check_dense_capacity(f, dense_bound);
  const auto d = f.variable_degrees();
  const std::size_t dim = std::size_t{1} << f.num_vars();
  double diag = 0;
  for (int dj : d) diag += 0.5 * dj;
  DenseSymMatrix h(dim);
  for (std::size_t b = 0; b < dim; ++b) {
    h(b, b) = diag;
    for (std::size_t j = 0; j < d.size(); ++j)
      if (d[j] != 0) h(b, b ^ (std::size_t{1} << j)) = -0.5 * d[j];
  }
  return h;
}

struct InterpolatedHamiltonian {
  DenseSymMatrix h0;
  DenseSymMatrix h1;
  int n = 0;

  InterpolatedHamiltonian() = default;
  InterpolatedHamiltonian(DenseSymMatrix initial, DenseSymMatrix problem, int num_vars)
      : h0(std::move(initial)), h1(std::move(problem)), n(num_vars) {
    if (h0.dim() != h1.dim()) throw ContractError("h0 and h1 dimensions differ");
  }

  /// Pair for a formula; h1 is the clause-count diagonal.
  static InterpolatedHamiltonian from_formula(const CnfFormula& f,
                                              int dense_bound = kDefaultDenseBound) {
    return {build_initial_hamiltonian(f, dense_bound), build_problem_hamiltonian(f, dense_bound),
            f.num_vars()};
  }

  std::size_t dim() const noexcept { return h0.dim(); }
};

inline DenseSymMatrix h_of_s(const InterpolatedHamiltonian& ih, double s) {
  if (!(s >= 0.0 && s <= 1.0))
    throw ParameterError("interpolation parameter s must lie in [0,1]");
  if (s == 0.0) return ih.h0;
  if (s == 1.0) return ih.h1;
  return lerp(ih.h0, ih.h1, s);
}

/// dH/ds = h1 - h0 (multiply by ds/dt for dH/dt).
inline DenseSymMatrix dh_ds(const InterpolatedHamiltonian& ih) {
  DenseSymMatrix out(ih.dim());
  auto a = ih.h0.data();
  auto b = ih.h1.data();
  auto z = out.data();
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = b[k] - a[k];
  return out;
}

/// Raw little-endian doubles at `path` plus `path`.json with dim, n and s.
inline void write_matrix_dump(const DenseSymMatrix& a, int n, double s,
                              const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (double x : a.data()) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, sizeof bits);
    char bytes[8];
    for (int k = 0; k < 8; ++k) bytes[k] = char((bits >> (8 * k)) & 0xff);
    out.write(bytes, 8);
  }
  nlohmann::json side = {{"dim", a.dim()}, {"n", n}, {"s", s}, {"dtype", "float64-le"},
                         {"layout", "row-major"}};
  std::ofstream(path.string() + ".json") << side.dump(2) << '\n';
}

inline DenseSymMatrix read_matrix_dump(const std::filesystem::path& path) {
  std::ifstream side_in(path.string() + ".json");
  if (!side_in) throw Error("missing sidecar for " + path.string());
  const auto side = nlohmann::json::parse(side_in);
  const std::size_t dim = side.at("dim").get<std::size_t>();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<double> data(dim * dim);
  for (auto& x : data) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw Error("truncated matrix dump");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= std::uint64_t(bytes[k]) << (8 * k);
    std::memcpy(&x, &bits, sizeof x);
  }
  return DenseSymMatrix(dim, std::move(data));
}

}  // namespace aqc
