#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "aqc/lz_model.hpp"

using namespace aqc;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> grid(double lo, double hi, std::size_t points) {
  std::vector<double> g(points);
  for (std::size_t j = 0; j < points; ++j) g[j] = lo + (hi - lo) * double(j) / double(points - 1);
  return g;
}

InterpolatedHamiltonian two_by_two() {
  return {DenseSymMatrix(2, {0.5, -0.5, -0.5, 0.5}), DenseSymMatrix::diagonal(std::vector{0.0, 1.0}),
          1};
}

// H(s) = A + s B + C with diabatic levels 0, 1 - 5s, 2.5 - 8s and a uniform
// coupling c. The ground pair has two avoided crossings: at s = 0.2
// (slopes 0 and -5) and at s = 0.5 (slopes -5 and -8).
InterpolatedHamiltonian three_level(double c) {
  DenseSymMatrix h0(3), h1(3);
  const double a[3] = {0, 1, 2.5}, b[3] = {0, -5, -8};
  for (std::size_t i = 0; i < 3; ++i) {
    h0(i, i) = a[i];
    h1(i, i) = a[i] + b[i];
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) h0(i, j) = h1(i, j) = c;
  }
  return {h0, h1, 0};
}

// Synthetic pair of hyperbolae E = +- sqrt(2 x^2 + 1/2) / 2, x = s - 1/2,
// sampled on an arbitrary (also unphysical) s range.
LevelCurves hyperbola_curves(std::span<const double> s) {
  LevelCurves c;
  c.s.assign(s.begin(), s.end());
  for (double x : s) {
    const double g = std::sqrt(2 * (x - 0.5) * (x - 0.5) + 0.5);
    c.levels.push_back({-g / 2, g / 2});
  }
  return c;
}

}  // namespace

TEST(LzProbability, GammaOneIsExpMinusTwoPi) {
  EXPECT_NEAR(lz_probability(0.4, 1.0, 0.1), std::exp(-2 * kPi), 1e-12);
  EXPECT_NEAR(lz_probability(0.4, 1.0, 0.1), 1.8674e-3, 1e-7);
  EXPECT_NEAR(lz_probability(0.4, -1.0, 0.1), std::exp(-2 * kPi), 1e-12);
  LzCrossing c;
  c.delta_e = 0.4;
  c.delta_m = 1.0;
  EXPECT_EQ(lz_probability(c, 0.1), lz_probability(0.4, 1.0, 0.1));
}

TEST(LzProbability, Limits) {
  EXPECT_EQ(lz_probability(0.0, 1.0, 0.1), 1.0);
  EXPECT_LT(lz_probability(0.4, 1.0, 1e-4), 1e-300);
  EXPECT_GT(lz_probability(1e-9, 1.0, 0.1), 1 - 1e-6);
  double prev = 0;
  for (double sdot : {0.01, 0.1, 1.0, 10.0}) {
    const double p = lz_probability(0.4, 1.0, sdot);
    EXPECT_GT(p, prev);
    prev = p;
  }
}

TEST(LzProbability, InvalidArguments) {
  EXPECT_THROW(lz_probability(0.4, 1.0, 0.0), ParameterError);
  EXPECT_THROW(lz_probability(0.4, 0.0, 0.1), ParameterError);
  EXPECT_THROW(lz_probability(-0.1, 1.0, 0.1), ParameterError);
}

TEST(ExtractCrossings, TwoByTwoMinimumGap) {
  const auto curves = track_levels(two_by_two(), grid(0, 1, 101), 2);
  const auto scan = extract_crossings(curves, 0);
  ASSERT_EQ(scan.crossings.size(), 1u);
  const auto& c = scan.crossings[0];
  EXPECT_NEAR(c.s_star, 0.5, 1e-4);
  EXPECT_NEAR(c.delta_e, 1 / std::sqrt(2.0), 1e-6);
  EXPECT_EQ(c.lower_level, 0u);
}

TEST(ExtractCrossings, TwoByTwoSlopeDifferenceMatchesDerivativeOfGap) {
  // d/ds sqrt(2 x^2 + 1/2) = 2 x / sqrt(2 x^2 + 1/2) at x = w h either side.
  const double h = 0.01;
  const auto curves = track_levels(two_by_two(), grid(0, 1, 101), 2);
  for (std::size_t w : {2u, 5u, 10u, 20u, 40u}) {
    const auto c = extract_crossings(curves, 0, {.slope_window = w}).crossings.at(0);
    const double x = double(w) * h;
    EXPECT_NEAR(c.delta_m, 2 * x / std::sqrt(2 * x * x + 0.5), 1e-3) << w;
  }
}

TEST(ExtractCrossings, AsymptoticSlopeDifferenceIsRootTwo) {
  const auto s = grid(-99.5, 100.5, 2001);  // step 0.1, minimum at index 1000
  const auto curves = hyperbola_curves(s);
  double prev = 0;
  for (std::size_t w : {1u, 10u, 100u, 500u}) {
    const auto c = extract_crossings(curves, 0, {.slope_window = w}).crossings.at(0);
    EXPECT_GT(c.delta_m, prev);
    prev = c.delta_m;
  }
  EXPECT_NEAR(prev, std::sqrt(2.0), 1e-4);
}

TEST(ExtractCrossings, MonotoneGapHasNoCrossing) {
  const auto d0 = DenseSymMatrix::diagonal(std::vector{0.0, 1.0});
  const auto d1 = DenseSymMatrix::diagonal(std::vector{0.0, 3.0});
  const auto scan = extract_crossings(track_levels({d0, d1, 1}, grid(0, 1, 21), 2), 0);
  EXPECT_TRUE(scan.crossings.empty());
}

TEST(ExtractCrossings, ThreeLevelModelHasTwoCrossings) {
  const auto curves = track_levels(three_level(0.02), grid(0, 1, 401), 3);
  const auto scan = extract_crossings(curves, 0, {.slope_window = 40});
  ASSERT_EQ(scan.crossings.size(), 2u);
  const auto& a = scan.crossings[0];
  const auto& b = scan.crossings[1];
  EXPECT_NEAR(a.s_star, 0.2, 0.01);
  EXPECT_NEAR(b.s_star, 0.5, 0.01);
  EXPECT_NEAR(a.delta_m, 5.0, 0.25);
  EXPECT_NEAR(b.delta_m, 3.0, 0.15);
  // Two-level estimate 2c, shifted slightly by the third level.
  EXPECT_NEAR(a.delta_e, 0.04, 0.01);
  EXPECT_NEAR(b.delta_e, 0.04, 0.01);
  // similar gaps, steeper first crossing: more likely to jump there
  EXPECT_GT(lz_probability(a, 0.01), lz_probability(b, 0.01));
}

TEST(ExtractCrossings, WarnsAboutBoundaryMinimumAndClippedWindow) {
  const auto curves = track_levels(two_by_two(), grid(0, 0.6, 13), 2);
  const auto scan = extract_crossings(curves, 0, {.slope_window = 20});
  ASSERT_EQ(scan.crossings.size(), 1u);
  EXPECT_FALSE(scan.warnings.empty());

  const auto half = track_levels(two_by_two(), grid(0, 0.4, 9), 2);
  const auto edge = extract_crossings(half, 0);
  EXPECT_TRUE(edge.crossings.empty());
  ASSERT_EQ(edge.warnings.size(), 1u);
  EXPECT_NE(edge.warnings[0].find("boundary"), std::string::npos);
}

TEST(ExtractCrossings, Validation) {
  const auto curves = track_levels(two_by_two(), grid(0, 1, 11), 2);
  EXPECT_THROW(extract_crossings(curves, 1), ParameterError);
  EXPECT_THROW(extract_crossings(curves, 0, {.slope_window = 0}), ParameterError);
}

TEST(TransitionRate, FoldedAndUnfoldedAgree) {
  for (double sigma : {0.3, 1.0, 2.7})
    for (double rho : {0.5, 4.0, 123.0}) {
      ScalingModel m{.sigma_tilde = sigma, .rho = rho, .s_dot = 0.02};
      const double a = transition_rate(m, true), b = transition_rate(m, false);
      EXPECT_NEAR(a, b, 1e-12 * a);
    }
}

TEST(TransitionRate, Exponents) {
  ScalingModel m{.sigma_tilde = 0.8, .rho = 3.0, .s_dot = 0.05};
  const double base = transition_rate(m, true);
  auto faster = m;
  faster.s_dot *= 2;
  EXPECT_NEAR(transition_rate(faster, true) / base, std::pow(2.0, 1.5), 1e-12);
  auto denser = m;
  denser.rho *= 4;
  EXPECT_NEAR(transition_rate(denser, true) / base, 2.0, 1e-12);
  m.rho = 0;
  EXPECT_THROW(transition_rate(m, true), ParameterError);
}

TEST(FailureBound, InverseSquareRootOfTime) {
  ScalingModel m{.sigma_tilde = 0.5, .rho_min = 2.0, .delta_s = 0.4, .t_total = 100.0};
  const double p = failure_lower_bound(m);
  ASSERT_LT(p, 0.5);
  m.t_total *= 4;
  EXPECT_NEAR(failure_lower_bound(m), p / 2, 1e-12 * p);
}

TEST(FailureBound, ClippedAtOne) {
  EXPECT_EQ(failure_lower_bound({}), 1.0);
  EXPECT_EQ(failure_lower_bound({.sigma_tilde = 3.0}), 1.0);
  EXPECT_THROW(failure_lower_bound({.t_total = 0.0}), ParameterError);
}

TEST(FailureBound, TimeForTargetIsLinearInRhoMin) {
  ScalingModel m{.sigma_tilde = 0.5, .rho_min = 2.0, .delta_s = 0.4};
  const double t1 = time_for_failure_bound(m, 0.01);
  m.rho_min *= 3;
  const double t3 = time_for_failure_bound(m, 0.01);
  EXPECT_NEAR(t3 / t1, 3.0, 1e-12);
  m.t_total = t3;
  EXPECT_NEAR(failure_lower_bound(m), 0.01, 1e-14);
  EXPECT_THROW(time_for_failure_bound(m, 0.0), ParameterError);
}

TEST(EstimateRho, ReciprocalOfMeanGap) {
  EXPECT_DOUBLE_EQ(estimate_rho(std::vector{0.5, 1.5}), 1.0);
  EXPECT_THROW(estimate_rho(std::vector{0.5}), SampleSizeError);
  EXPECT_THROW(estimate_rho(std::vector{0.0, 0.0}), DegeneracyError);
}

TEST(RhoMin, OverIrregularPointsOnly) {
  const std::vector<double> s{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  const std::vector<double> q{0.0, 0.05, 0.1, 0.3, 0.6, 0.0};
  const std::vector<double> rho{0.1, 0.5, 0.9, 2.0, 1.5, 0.2};
  const auto r = rho_min_over_irregular(s, q, rho, 0.2);
  ASSERT_TRUE(r.irregular_region_found);
  EXPECT_EQ(r.rho_min, 1.5);
  EXPECT_EQ(r.s_at_min, 0.8);
  EXPECT_EQ(r.irregular_s, (std::vector{0.6, 0.8}));
  EXPECT_NEAR(r.delta_s, 0.4, 1e-15);  // two cells of width 0.2
}

TEST(RhoMin, RegularEnsembleHasNoIrregularRegion) {
  const std::vector<double> s{0.0, 0.5, 1.0}, q{0.0, 0.1, 0.0}, rho{1, 2, 3};
  const auto r = rho_min_over_irregular(s, q, rho);
  EXPECT_FALSE(r.irregular_region_found);
  EXPECT_TRUE(std::isnan(r.rho_min));
  EXPECT_THROW(rho_min_over_irregular(s, q, std::vector{1.0}), ContractError);
}

TEST(SigmaTilde, LinearUnfoldedGaps) {
  // gap_i(s) = (1 + i) (1 + s) and rho = 1: slope 1 + i, mean over i = 2.
  const std::vector<double> s{0.0, 0.5, 1.0}, rho{1, 1, 1}, q{0.5, 0.5, 0.5};
  std::vector<std::vector<double>> gaps;
  for (double x : s) gaps.push_back({1 + x, 2 * (1 + x), 3 * (1 + x)});
  EXPECT_NEAR(estimate_sigma_tilde(s, gaps, rho, q), 2.0, 1e-12);
  EXPECT_TRUE(std::isnan(estimate_sigma_tilde(s, gaps, rho, std::vector{0.0, 0.0, 0.0})));
}

TEST(ScalingFit, ExactExponential) {
  const std::vector<double> n{6, 8, 10, 12};
  std::vector<double> rho;
  for (double x : n) rho.push_back(std::pow(2.0, x));
  const auto f = scaling_fit(n, rho);
  EXPECT_NEAR(f.exponent, std::log(2.0), 1e-9);
  EXPECT_NEAR(f.stderr_exponent, 0.0, 1e-9);
  EXPECT_EQ(f.points, 4u);
}

TEST(ScalingFit, ConstantAndErrors) {
  EXPECT_NEAR(scaling_fit(std::vector{6.0, 8.0, 10.0}, std::vector{0.3, 0.3, 0.3}).exponent, 0.0,
              1e-15);
  EXPECT_THROW(scaling_fit(std::vector{6.0, 8.0}, std::vector{1.0, 2.0}), SampleSizeError);
  EXPECT_THROW(scaling_fit(std::vector{6.0, 8.0, 10.0}, std::vector{1.0, 0.0, 2.0}), ParameterError);
  EXPECT_THROW(scaling_fit(std::vector{6.0, 6.0, 6.0}, std::vector{1.0, 2.0, 3.0}), ParameterError);
}

TEST(ScalingFit, StderrFromResiduals) {
  // y = log rho: 0, 1, 0 at n = 0, 1, 2: slope 0, residuals -1/3, 2/3, -1/3.
  const std::vector<double> n{0, 1, 2};
  const std::vector<double> rho{1.0, std::exp(1.0), 1.0};
  const auto f = scaling_fit(n, rho);
  EXPECT_NEAR(f.exponent, 0.0, 1e-15);
  EXPECT_NEAR(f.stderr_exponent, std::sqrt((2.0 / 3.0) / 1.0 / 2.0), 1e-12);
}
