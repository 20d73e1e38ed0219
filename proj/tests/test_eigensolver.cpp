#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "aqc/eigensolver.hpp"
#include "aqc/instance_gen.hpp"
#include "aqc/rmt.hpp"

using namespace aqc;

namespace {

DenseSymMatrix random_symmetric(std::size_t dim, Rng& rng) {
  DenseSymMatrix a(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i; j < dim; ++j) a(i, j) = a(j, i) = 2 * rng.uniform() - 1;
  return a;
}

std::vector<double> eigen_reference(const DenseSymMatrix& a) {
  Eigen::MatrixXd m(a.dim(), a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) m(Eigen::Index(i), Eigen::Index(j)) = a(i, j);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size()};
}

}  // namespace

TEST(EigSym, SingleSpinHamiltonian) {
  const auto ev = eig_sym(DenseSymMatrix(2, {0.5, -0.5, -0.5, 0.5})).values;
  EXPECT_NEAR(ev[0], 0.0, 1e-15);
  EXPECT_NEAR(ev[1], 1.0, 1e-15);
}

TEST(EigSym, DiagonalIsSorted) {
  const std::vector<double> d{3, -1, 2, 2, 0.5, -7};
  const auto ev = eig_sym(DenseSymMatrix::diagonal(d)).values;
  auto sorted = d;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(ev, sorted);
}

TEST(EigSym, TraceIdentity) {
  Rng rng(42);
  for (int k = 0; k < 20; ++k) {
    const auto a = random_symmetric(6, rng);
    const auto ev = eig_sym(a).values;
    double sum = 0;
    for (double x : ev) sum += x;
    EXPECT_NEAR(sum, a.trace(), 1e-10);
    EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end()));
  }
}

TEST(EigSym, MatchesEigenOnRandomMatrices) {
  Rng rng(7);
  for (std::size_t dim : {1u, 2u, 3u, 5u, 17u, 64u, 130u}) {
    const auto a = random_symmetric(dim, rng);
    const auto ours = eig_sym(a).values;
    const auto ref = eigen_reference(a);
    ASSERT_EQ(ours.size(), ref.size());
    for (std::size_t k = 0; k < dim; ++k) EXPECT_NEAR(ours[k], ref[k], 1e-11 * double(dim));
  }
}

TEST(EigSym, MatchesEigenOnInterpolatedHamiltonian) {
  EnsembleSpec spec;
  spec.count = 2;
  for (const auto& f : generate_ensemble(spec).instances) {
    const auto ih = InterpolatedHamiltonian::from_formula(f);
    for (double s : {0.0, 0.3, 0.7, 1.0}) {
      const auto h = h_of_s(ih, s);
      const auto ours = eig_sym(h).values;
      const auto ref = eigen_reference(h);
      for (std::size_t k = 0; k < ours.size(); ++k) ASSERT_NEAR(ours[k], ref[k], 1e-10);
    }
  }
}

TEST(EigSym, VectorsAreOrthonormalWithSmallResiduals) {
  Rng rng(3);
  const auto a = sample_goe(80, rng);
  const auto dec = eig_sym(a, {.vectors = true});
  ASSERT_TRUE(dec.has_vectors());
  const double scale = a.inf_norm();
  for (std::size_t k = 0; k < dec.dim(); ++k) {
    const auto v = dec.vector(k);
    const auto av = a.apply(v);
    double res = 0;
    for (std::size_t i = 0; i < av.size(); ++i) res = std::max(res, std::abs(av[i] - dec.values[k] * v[i]));
    EXPECT_LT(res, 1e-12 * scale);
    for (std::size_t l = 0; l <= k; ++l) {
      const auto w = dec.vector(l);
      double dot = 0;
      for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * w[i];
      EXPECT_NEAR(dot, k == l ? 1.0 : 0.0, 1e-12);
    }
  }
}

TEST(EigSym, ValuesWithAndWithoutVectorsAgree) {
  Rng rng(13);
  const auto a = random_symmetric(40, rng);
  const auto v0 = eig_sym(a).values;
  const auto v1 = eig_sym(a, {.vectors = true}).values;
  for (std::size_t k = 0; k < v0.size(); ++k) EXPECT_NEAR(v0[k], v1[k], 1e-12);
}

TEST(EigSym, DegenerateSpectrum) {
  // J - I on 8 points: eigenvalues -1 (seven times) and 7.
  DenseSymMatrix a(8);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) a(i, j) = i == j ? 0.0 : 1.0;
  const auto ev = eig_sym(a).values;
  for (std::size_t k = 0; k < 7; ++k) EXPECT_NEAR(ev[k], -1.0, 1e-13);
  EXPECT_NEAR(ev[7], 7.0, 1e-13);
}

TEST(EigSym, RejectsBadInput) {
  EXPECT_THROW(eig_sym(DenseSymMatrix(2, {1, 2, 3, 4})), ContractError);
  EXPECT_THROW(eig_sym(DenseSymMatrix(2, {1, NAN, NAN, 4})), ContractError);
  EXPECT_TRUE(eig_sym(DenseSymMatrix(0)).values.empty());
}

TEST(EigSym, SweepBudgetExhaustionIsReported) {
  Rng rng(1);
  EXPECT_THROW(eig_sym(random_symmetric(20, rng), {.max_sweeps = 0}), ConvergenceError);
}
