#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "aqc/error.hpp"
#include "aqc/hamiltonian.hpp"

namespace aqc {

/// Eigenvalues in ascending order; when requested, eigenvector k is stored
/// contiguously at vectors[k * dim, (k + 1) * dim).
struct EigenDecomposition {
  std::vector<double> values;
  std::vector<double> vectors;

  std::size_t dim() const noexcept { return values.size(); }
  bool has_vectors() const noexcept { return !vectors.empty(); }
  std::span<const double> vector(std::size_t k) const {
    return {vectors.data() + k * dim(), dim()};
  }
};

namespace detail {

// Householder reduction to tridiagonal form followed by the implicit QL
// iteration (the EISPACK tred2/tql2 pair). The working matrix w is the
// transpose of the classic V, so every inner loop walks contiguous memory.
class SymmetricQl {
 public:
  SymmetricQl(const DenseSymMatrix& a, bool want_vectors, int max_sweeps_per_value)
      : n_(a.dim()),
        want_vectors_(want_vectors),
        max_iter_(max_sweeps_per_value),
        w_(a.data().begin(), a.data().end()),
        d_(n_),
        e_(n_) {}

  EigenDecomposition run() {
    EigenDecomposition out;
    if (n_ == 0) return out;
    if (n_ == 1) {
      out.values = {w_[0]};
      if (want_vectors_) out.vectors = {1.0};
      return out;
    }
    tridiagonalize();
    ql();
    std::vector<std::size_t> order(n_);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return d_[x] < d_[y]; });
    out.values.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) out.values[k] = d_[order[k]];
    if (want_vectors_) {
      out.vectors.resize(n_ * n_);
      for (std::size_t k = 0; k < n_; ++k)
        std::copy_n(&w_[order[k] * n_], n_, &out.vectors[k * n_]);
    }
    return out;
  }

 private:
  // v(r, c) is element (r, c) of the classic accumulator V.
  double& v(std::size_t r, std::size_t c) { return w_[c * n_ + r]; }

  void tridiagonalize() {
    const std::size_t n = n_;
    for (std::size_t j = 0; j < n; ++j) d_[j] = v(n - 1, j);

    for (std::size_t i = n - 1; i > 0; --i) {
      double scale = 0.0, h = 0.0;
      for (std::size_t k = 0; k < i; ++k) scale += std::abs(d_[k]);
      if (scale == 0.0) {
        e_[i] = d_[i - 1];
        for (std::size_t j = 0; j < i; ++j) {
          d_[j] = v(i - 1, j);
          v(i, j) = 0.0;
          v(j, i) = 0.0;
        }
      } else {
        for (std::size_t k = 0; k < i; ++k) {
          d_[k] /= scale;
          h += d_[k] * d_[k];
        }
        double f = d_[i - 1];
        double g = std::sqrt(h);
        if (f > 0) g = -g;
        e_[i] = scale * g;
        h -= f * g;
        d_[i - 1] = f - g;
        for (std::size_t j = 0; j < i; ++j) e_[j] = 0.0;

        for (std::size_t j = 0; j < i; ++j) {
          f = d_[j];
          v(j, i) = f;
          g = e_[j] + v(j, j) * f;
          double* col = &w_[j * n];
          for (std::size_t k = j + 1; k < i; ++k) {
            g += col[k] * d_[k];
            e_[k] += col[k] * f;
          }
          e_[j] = g;
        }
        f = 0.0;
        for (std::size_t j = 0; j < i; ++j) {
          e_[j] /= h;
          f += e_[j] * d_[j];
        }
        const double hh = f / (h + h);
        for (std::size_t j = 0; j < i; ++j) e_[j] -= hh * d_[j];
        for (std::size_t j = 0; j < i; ++j) {
          f = d_[j];
          g = e_[j];
          double* col = &w_[j * n];
          for (std::size_t k = j; k < i; ++k) col[k] -= (f * e_[k] + g * d_[k]);
          d_[j] = v(i - 1, j);
          v(i, j) = 0.0;
        }
      }
      d_[i] = h;
    }

    if (!want_vectors_) {
      for (std::size_t j = 0; j < n; ++j) d_[j] = v(j, j);
      e_[0] = 0.0;
      return;
    }

    for (std::size_t i = 0; i + 1 < n; ++i) {
      v(n - 1, i) = v(i, i);
      v(i, i) = 1.0;
      const double h = d_[i + 1];
      double* next = &w_[(i + 1) * n];
      if (h != 0.0) {
        for (std::size_t k = 0; k <= i; ++k) d_[k] = next[k] / h;
        for (std::size_t j = 0; j <= i; ++j) {
          double* col = &w_[j * n];
          double g = 0.0;
          for (std::size_t k = 0; k <= i; ++k) g += next[k] * col[k];
          for (std::size_t k = 0; k <= i; ++k) col[k] -= g * d_[k];
        }
      }
      for (std::size_t k = 0; k <= i; ++k) next[k] = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
      d_[j] = v(n - 1, j);
      v(n - 1, j) = 0.0;
    }
    v(n - 1, n - 1) = 1.0;
    e_[0] = 0.0;
  }

  void ql() {
    const std::size_t n = n_;
    for (std::size_t i = 1; i < n; ++i) e_[i - 1] = e_[i];
    e_[n - 1] = 0.0;

    double f = 0.0, tst1 = 0.0;
    const double eps = std::ldexp(1.0, -52);
    for (std::size_t l = 0; l < n; ++l) {
      tst1 = std::max(tst1, std::abs(d_[l]) + std::abs(e_[l]));
      std::size_t m = l;
      while (m < n) {
        if (std::abs(e_[m]) <= eps * tst1) break;
        ++m;
      }
      if (m > l) {
        int iter = 0;
        do {
          if (++iter > max_iter_)
            throw ConvergenceError("QL iteration did not converge within " +
                                   std::to_string(max_iter_) + " sweeps for eigenvalue " +
                                   std::to_string(l));
          double g = d_[l];
          double p = (d_[l + 1] - g) / (2.0 * e_[l]);
          double r = std::hypot(p, 1.0);
          if (p < 0) r = -r;
          d_[l] = e_[l] / (p + r);
          d_[l + 1] = e_[l] * (p + r);
          const double dl1 = d_[l + 1];
          double h = g - d_[l];
          for (std::size_t i = l + 2; i < n; ++i) d_[i] -= h;
          f += h;

          p = d_[m];
          double c = 1.0, c2 = c, c3 = c;
          const double el1 = e_[l + 1];
          double s = 0.0, s2 = 0.0;
          for (std::size_t ii = m; ii-- > l;) {
            c3 = c2;
            c2 = c;
            s2 = s;
            g = c * e_[ii];
            h = c * p;
            r = std::hypot(p, e_[ii]);
            e_[ii + 1] = s * r;
            s = e_[ii] / r;
            c = p / r;
            p = c * d_[ii] - s * g;
            d_[ii + 1] = h + s * (c * g + s * d_[ii]);
            if (want_vectors_) {
              double* a = &w_[ii * n];
              double* b = &w_[(ii + 1) * n];
              for (std::size_t k = 0; k < n; ++k) {
                h = b[k];
                b[k] = s * a[k] + c * h;
                a[k] = c * a[k] - s * h;
              }
            }
          }
          p = -s * s2 * c3 * el1 * e_[l] / dl1;
          e_[l] = s * p;
          d_[l] = c * p;
        } while (std::abs(e_[l]) > eps * tst1);
      }
      d_[l] += f;
      e_[l] = 0.0;
    }
  }

  std::size_t n_;
  bool want_vectors_;
  int max_iter_;
  std::vector<double> w_;
  std::vector<double> d_;
  std::vector<double> e_;
};

}  // namespace detail

struct EigOptions {
  bool vectors = false;
  bool check_symmetry = true;
  double symmetry_tol = 1e-12;
  /// QL sweeps allowed per eigenvalue before reporting non-convergence.
  int max_sweeps = 60;
};

/// Full eigendecomposition of a real symmetric matrix.
inline EigenDecomposition eig_sym(const DenseSymMatrix& a, const EigOptions& opt = {}) {
  if (opt.check_symmetry && !a.is_symmetric(opt.symmetry_tol))
    throw ContractError("eig_sym: input matrix is not symmetric");
  for (double x : a.data())
    if (!std::isfinite(x)) throw ContractError("eig_sym: non-finite matrix entry");
  return detail::SymmetricQl(a, opt.vectors, opt.max_sweeps).run();
}

}  // namespace aqc
