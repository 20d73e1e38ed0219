#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "aqc/eigensolver.hpp"
#include "aqc/rmt.hpp"

using namespace aqc;

namespace {

// Inverse-CDF draws from the Brody law: F(d) = 1 - exp(-beta d^(1+q)).
std::vector<double> brody_sample(double q, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double beta = std::pow(std::tgamma((2 + q) / (1 + q)), 1 + q);
  std::vector<double> d(count);
  for (auto& x : d) x = std::pow(-std::log1p(-u(gen)) / beta, 1 / (1 + q));
  return d;
}

std::vector<double> wigner_sample(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> d(count);
  for (auto& x : d) x = std::sqrt(-4 / std::numbers::pi * std::log1p(-u(gen)));
  return d;
}

// Composite Simpson for the integral of f over [0, upper], after the change of
// variables d = t^4, which smooths the d^q behaviour at the origin.
template <class F>
double simpson(F f, double upper, int panels = 20000) {
  auto g = [&](double t) { return f(t * t * t * t) * 4 * t * t * t; };
  const double top = std::pow(upper, 0.25), h = top / panels;
  double s = g(0.0) + g(top);
  for (int k = 1; k < panels; ++k) s += (k % 2 ? 4 : 2) * g(k * h);
  return s * h / 3;
}

}  // namespace

TEST(BrodyPdf, PoissonLimit) {
  EXPECT_DOUBLE_EQ(brody_beta(0), 1.0);
  EXPECT_DOUBLE_EQ(brody_pdf(0, 0), 1.0);
  for (double d : {0.1, 1.0, 3.5}) EXPECT_NEAR(brody_pdf(0, d), std::exp(-d), 1e-15);
}

TEST(BrodyPdf, WignerLimit) {
  EXPECT_NEAR(brody_beta(1), std::numbers::pi / 4, 1e-15);
  EXPECT_NEAR(brody_pdf(1, 1), 0.716186, 1e-6);
  for (double d : {0.2, 1.0, 2.4})
    EXPECT_NEAR(brody_pdf(1, d),
                std::numbers::pi / 2 * d * std::exp(-std::numbers::pi * d * d / 4), 1e-15);
  EXPECT_EQ(brody_pdf(1, 0), 0.0);
}

TEST(BrodyPdf, UnitAreaAndUnitMeanForAllQ) {
  for (double q : {0.0, 0.1, 0.3, 0.5, 0.8, 1.0}) {
    const double area = simpson([q](double d) { return brody_pdf(q, d); }, 40.0);
    const double mean = simpson([q](double d) { return d * brody_pdf(q, d); }, 40.0);
    EXPECT_NEAR(area, 1.0, 1e-9) << q;
    EXPECT_NEAR(mean, 1.0, 1e-9) << q;
  }
}

TEST(BrodyPdf, CdfIsIntegralOfPdf) {
  for (double q : {0.2, 0.7}) {
    for (double x : {0.5, 1.0, 2.0})
      EXPECT_NEAR(brody_cdf(q, x), simpson([q](double d) { return brody_pdf(q, d); }, x), 1e-9);
  }
}

TEST(BrodyPdf, DomainErrors) {
  EXPECT_THROW(brody_pdf(-0.1, 1), ParameterError);
  EXPECT_THROW(brody_pdf(1.1, 1), ParameterError);
  EXPECT_THROW(brody_pdf(0.5, -1), ParameterError);
  EXPECT_THROW(brody_cdf(0.5, -1), ParameterError);
}

TEST(FitBrody, PoissonSample) {
  const auto fit = fit_brody(brody_sample(0.0, 10000, 1));
  EXPECT_GE(fit.q, 0.0);
  EXPECT_LE(fit.q, 0.05);
  EXPECT_EQ(fit.sample_size, 10000u);
}

TEST(FitBrody, WignerSample) {
  const auto fit = fit_brody(wigner_sample(10000, 2));
  EXPECT_GE(fit.q, 0.95);
  EXPECT_LE(fit.q, 1.0);
}

TEST(FitBrody, RecoversIntermediateQ) {
  for (double q : {0.25, 0.5, 0.75}) {
    const auto fit = fit_brody(brody_sample(q, 20000, 3));
    EXPECT_NEAR(fit.q, q, 0.03);
    EXPECT_GT(fit.stderr_q, 0.0);
    EXPECT_LT(fit.stderr_q, 0.03);
  }
}

TEST(FitBrody, HistogramMethodAgreesRoughly) {
  BrodyFitOptions opt;
  opt.method = BrodyFitMethod::histogram_lsq;
  opt.bootstrap = 0;
  EXPECT_LE(fit_brody(brody_sample(0.0, 20000, 4), opt).q, 0.08);
  EXPECT_GE(fit_brody(wigner_sample(20000, 5), opt).q, 0.9);
  EXPECT_NEAR(fit_brody(brody_sample(0.5, 20000, 6), opt).q, 0.5, 0.08);
}

TEST(FitBrody, LikelihoodIsMaximalAtFit) {
  const auto d = brody_sample(0.4, 5000, 7);
  const auto fit = fit_brody(d, {.bootstrap = 0});
  for (double q : {0.0, 0.2, 0.6, 1.0}) EXPECT_LE(brody_log_likelihood(d, q), fit.log_likelihood);
  EXPECT_NEAR(brody_log_likelihood(d, fit.q), fit.log_likelihood, 1e-9);
}

TEST(FitBrody, BoundaryOptimaAreExact) {
  // Heavily clustered spacings: the likelihood is maximal at q = 0.
  std::vector<double> d;
  for (int k = 0; k < 200; ++k) d.push_back(k % 2 ? 0.01 : 3.0);
  const auto fit = fit_brody(d, {.bootstrap = 0});
  EXPECT_EQ(fit.q, 0.0);
  EXPECT_TRUE(fit.at_lower_bound);

  // Nearly rigid spacings: q pinned at 1.
  std::vector<double> rigid(200, 1.0);
  for (std::size_t k = 0; k < rigid.size(); ++k) rigid[k] += 0.05 * std::sin(double(k));
  const auto top = fit_brody(rigid, {.bootstrap = 0});
  EXPECT_EQ(top.q, 1.0);
  EXPECT_TRUE(top.at_upper_bound);
}

TEST(FitBrody, ZeroSpacingsAreClipped) {
  auto d = brody_sample(0.0, 500, 9);
  d[0] = d[1] = 0.0;
  const auto fit = fit_brody(d, {.bootstrap = 0});
  EXPECT_EQ(fit.clipped_zeros, 2u);
  EXPECT_TRUE(std::isfinite(fit.log_likelihood));
}

TEST(FitBrody, SampleErrors) {
  EXPECT_THROW(fit_brody(std::vector<double>(10, 1.0)), SampleSizeError);
  EXPECT_THROW(fit_brody(std::vector<double>(100, 0.0)), SampleSizeError);
  std::vector<double> bad(100, 1.0);
  bad[3] = -1;
  EXPECT_THROW(fit_brody(bad), ParameterError);
}

TEST(FitBrody, ScaleInvarianceWithMeanNormalisation) {
  auto d = brody_sample(0.6, 3000, 10);
  const auto a = fit_brody(d, {.bootstrap = 0});
  for (auto& x : d) x *= 7.5;
  EXPECT_NEAR(fit_brody(d, {.bootstrap = 0}).q, a.q, 1e-6);
}

TEST(FitBrody, BootstrapIsSeedDeterministic) {
  const auto d = brody_sample(0.5, 2000, 11);
  const auto a = fit_brody(d, {.bootstrap = 50, .seed = 3});
  const auto b = fit_brody(d, {.bootstrap = 50, .seed = 3});
  EXPECT_EQ(a.stderr_q, b.stderr_q);
  EXPECT_TRUE(std::isnan(fit_brody(d, {.bootstrap = 0}).stderr_q));
}

TEST(FitBrody, JsonReport) {
  const auto j = to_json(fit_brody(brody_sample(0.5, 500, 12), {.bootstrap = 20}));
  EXPECT_EQ(j["method"], "max_likelihood");
  EXPECT_EQ(j["sample_size"], 500);
  EXPECT_TRUE(j["optimizer"].contains("final_bracket"));
}

TEST(PoissonSampler, MeanNearOne) {
  Rng rng(5);
  const std::size_t count = 40000;
  const auto d = sample_poisson_spacings(count, rng);
  double mean = 0;
  for (double x : d) mean += x;
  mean /= double(count);
  EXPECT_NEAR(mean, 1.0, 3 / std::sqrt(double(count)));
  EXPECT_THROW(sample_poisson_spacings(0, rng), ParameterError);
}

TEST(GoeSampler, SymmetricWithSemicircleSupport) {
  Rng rng(6);
  const auto a = sample_goe(256, rng);
  EXPECT_TRUE(a.is_symmetric(0.0));
  const auto ev = eig_sym(a).values;
  const double r = goe_semicircle_radius(256);
  EXPECT_NEAR(ev.back(), r, 0.1 * r);
  EXPECT_NEAR(-ev.front(), r, 0.1 * r);
  EXPECT_THROW(sample_goe(1, rng), ParameterError);
}

TEST(GoeSampler, EntryVariances) {
  Rng rng(7);
  double diag = 0, off = 0;
  const int reps = 200;
  const std::size_t dim = 30;
  for (int k = 0; k < reps; ++k) {
    const auto a = sample_goe(dim, rng);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j) (i == j ? diag : off) += a(i, j) * a(i, j);
  }
  EXPECT_NEAR(diag / (reps * dim), 1.0, 0.05);
  EXPECT_NEAR(off / (reps * dim * (dim - 1)), 0.5, 0.02);
}

TEST(GoeSampler, PooledUnfoldedSpacingsFitNearWigner) {
  Rng rng(8);
  std::vector<double> pooled;
  for (int k = 0; k < 20; ++k) {
    const auto d = nns(unfold(eig_sym(sample_goe(256, rng)).values));
    pooled.insert(pooled.end(), d.begin(), d.end());
  }
  EXPECT_GE(fit_brody(pooled, {.bootstrap = 0}).q, 0.85);
}
