#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "fisherpli/error.hpp"
#include "fisherpli/geometry.hpp"
#include "fisherpli/quadrature.hpp"

using namespace fisherpli;

namespace {

const DistributionSpec kNormal = DistributionSpec::normal(0.0, 1.0);

// Independent closed form: ds^2 = (dmu^2 + 2 dsigma^2) / sigma^2 is sqrt(2)
// times the Poincare metric in (mu / sqrt(2), sigma).
double artanh_distance(double m1, double s1, double m2, double s2) {
  const double dm = m1 - m2, ds = s1 - s2, ss = s1 + s2;
  return 2.0 * std::numbers::sqrt2 * std::atanh(std::sqrt((dm * dm + 2 * ds * ds) / (dm * dm + 2 * ss * ss)));
}

ParamVector vec(double a, double b) {
  ParamVector v(2);
  v << a, b;
  return v;
}

ParamVector direction_momentum(double angle, double delta) {
  const auto chart = natural_chart(kNormal);
  return initial_momenta(*chart, kNormal.theta(), delta, {Direction{angle, vec(std::cos(angle), std::sin(angle))}})[0];
}

}  // namespace

TEST(Geometry, InitialMomentaExamples) {
  const auto chart = natural_chart(kNormal);
  const auto p = initial_momenta(*chart, kNormal.theta(), 1.0,
                                 {Direction{0.0, vec(1, 0)}, Direction{std::numbers::pi / 2, vec(0, 1)}});
  EXPECT_NEAR(p[0][0], 1.0, 1e-15);
  EXPECT_NEAR(p[0][1], 0.0, 1e-15);
  EXPECT_NEAR(p[1][0], 0.0, 1e-15);
  EXPECT_NEAR(p[1][1], std::numbers::sqrt2, 1e-15);
}

TEST(Geometry, MomentaLieOnTheCotangentSphere) {
  for (const auto& spec : {kNormal, DistributionSpec::trunc_normal(30, 7.5, 15, 75),
                           DistributionSpec::trunc_lognormal(0, 0.76, 0.1, 10)}) {
    const ParamMatrix inv = fisher_information(spec).matrix.inverse();
    for (const auto& p : initial_momenta(spec, 0.7, 16)) EXPECT_NEAR(p.dot(inv * p), 0.49, 1e-12);
  }
}

TEST(Geometry, ZeroRadiusStaysAtCenter) {
  const auto spec = DistributionSpec::trunc_normal(30, 7.5, 15, 75);
  for (const auto& p : initial_momenta(spec, 0.0, 8)) {
    EXPECT_EQ(p.norm(), 0.0);
    const auto path = integrate_geodesic(spec, p, Integrator::AdamsMoulton, 50);
    EXPECT_EQ(path.status, PathStatus::Complete);
    EXPECT_LE((path.last().q - spec.theta()).norm(), 1e-14);
  }
}

TEST(Geometry, PathRecordsEveryStep) {
  const auto path = integrate_geodesic(kNormal, vec(1, 0), Integrator::AdamsMoulton, 1000);
  ASSERT_EQ(path.steps.size(), 1001u);
  EXPECT_EQ(path.steps.front().t, 0.0);
  EXPECT_NEAR(path.last().t, 1.0, 1e-12);
  for (std::size_t k = 1; k < path.steps.size(); ++k) ASSERT_GT(path.steps[k].t, path.steps[k - 1].t);
  EXPECT_EQ(path.steps.front().q, kNormal.theta());
}

TEST(Geometry, AdamsMoultonConservesHamiltonian) {
  const auto path = integrate_geodesic(kNormal, vec(1, 0), Integrator::AdamsMoulton, 1000);
  EXPECT_LE(path.max_abs_drift(), 1e-4);
  EXPECT_NEAR(path.measured_length(), 1.0, 1e-3);
}

TEST(Geometry, EulerDriftBound) {
  const auto sphere = fisher_sphere(kNormal, 1.0, {.K = 100, .method = Integrator::Euler});
  double worst = 0.0;
  for (const auto& pt : sphere.points) worst = std::max(worst, pt.max_abs_drift);
  EXPECT_LE(worst, 5e-3);
  EXPECT_GT(worst, 1e-4);
}

TEST(Geometry, ConvergenceOrdersUnderStepHalving) {
  const ParamVector p0 = direction_momentum(0.7, 1.0);
  auto drift = [&](Integrator m, int n) { return integrate_geodesic(kNormal, p0, m, n).max_abs_drift(); };
  const double euler = drift(Integrator::Euler, 500) / drift(Integrator::Euler, 1000);
  const double am = drift(Integrator::AdamsMoulton, 500) / drift(Integrator::AdamsMoulton, 1000);
  EXPECT_NEAR(euler, 2.0, 0.5);
  EXPECT_NEAR(am, 4.0, 1.0);
}

TEST(Geometry, Reversibility) {
  const auto chart = natural_chart(kNormal);
  for (double angle : {0.3, 2.0, 4.5}) {
    const auto forward = integrate_geodesic(*chart, kNormal.theta(), direction_momentum(angle, 1.0),
                                            Integrator::AdamsMoulton, 1000);
    const auto back = integrate_geodesic(*chart, forward.last().q, -forward.last().p, Integrator::AdamsMoulton, 1000);
    EXPECT_LE((back.last().q - kNormal.theta()).norm(), 1e-3);
  }
}

TEST(Geometry, DistanceFormulaExamples) {
  EXPECT_EQ(gaussian_fisher_distance(0, 1, 0, 1), 0.0);
  for (double s : {0.2, 0.5, 2.0, 7.0}) {
    EXPECT_NEAR(gaussian_fisher_distance(0, 1, 0, s), std::numbers::sqrt2 * std::abs(std::log(s)), 1e-12);
    const double quad = integrate_scalar([](double x) { return std::numbers::sqrt2 / x; }, std::min(1.0, s),
                                         std::max(1.0, s));
    EXPECT_NEAR(gaussian_fisher_distance(0, 1, 0, s), quad, 1e-10);
  }
  EXPECT_THROW(gaussian_fisher_distance(0, 0, 0, 1), DomainError);
  EXPECT_THROW(gaussian_fisher_distance(0, 1, 0, -1), DomainError);
}

TEST(Geometry, DistanceFormulaMatchesIndependentClosedForm) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> mu(-3, 3), sigma(0.2, 4);
  for (int k = 0; k < 200; ++k) {
    const double m1 = mu(gen), s1 = sigma(gen), m2 = mu(gen), s2 = sigma(gen);
    const double ref = artanh_distance(m1, s1, m2, s2);
    EXPECT_NEAR(gaussian_fisher_distance(m1, s1, m2, s2), ref, 1e-10 * std::max(1.0, ref));
  }
}

TEST(Geometry, DistanceFormulaMatchesFineEulerPaths) {
  for (double angle : {0.0, 1.0, 2.5, 4.0}) {
    const auto path = integrate_geodesic(kNormal, direction_momentum(angle, 1.0), Integrator::Euler, 20000);
    const auto& q = path.last().q;
    EXPECT_NEAR(path.measured_length(), 1.0, 1e-3);
    EXPECT_NEAR(gaussian_fisher_distance(0, 1, q[0], q[1]), 1.0, 1e-3);
  }
}

TEST(Geometry, TriangleInequality) {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> mu(-3, 3), sigma(0.2, 4);
  for (int k = 0; k < 100; ++k) {
    const double a[2] = {mu(gen), sigma(gen)}, b[2] = {mu(gen), sigma(gen)}, c[2] = {mu(gen), sigma(gen)};
    const double ab = gaussian_fisher_distance(a[0], a[1], b[0], b[1]);
    const double bc = gaussian_fisher_distance(b[0], b[1], c[0], c[1]);
    const double ac = gaussian_fisher_distance(a[0], a[1], c[0], c[1]);
    EXPECT_LE(ac, ab + bc + 1e-12);
  }
}

TEST(Geometry, GaussianSphereMatchesOracle) {
  const auto sphere = fisher_sphere(kNormal, 1.0);
  ASSERT_EQ(sphere.points.size(), 100u);
  EXPECT_EQ(sphere.valid_count(), 100u);
  for (const auto& pt : sphere.points) {
    EXPECT_NEAR(gaussian_fisher_distance(0, 1, pt.theta[0], pt.theta[1]), 1.0, 1e-3);
    EXPECT_NEAR(pt.measured_length, 1.0, 10.0 / kDefaultSteps);
    EXPECT_LE(pt.max_abs_drift, 1e-4);
  }
  EXPECT_NEAR(sphere.points[25].angle, std::numbers::pi / 2, 1e-12);
}

TEST(Geometry, SphereDirectionsCoverTheCircle) {
  const auto dirs = sphere_directions(2, 8);
  ASSERT_EQ(dirs.size(), 8u);
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    EXPECT_NEAR(dirs[k].angle, 2 * std::numbers::pi * k / 8, 1e-12);
    EXPECT_NEAR(dirs[k].unit.norm(), 1.0, 1e-15);
  }
  const auto pair = sphere_directions(1, 100);
  ASSERT_EQ(pair.size(), 2u);
  EXPECT_EQ(pair[0].unit[0], 1.0);
  EXPECT_EQ(pair[1].unit[0], -1.0);
}

TEST(Geometry, TriangularSphereIsAPointPair) {
  const auto tri = DistributionSpec::triangular(49, 50, 51);
  const auto sphere = fisher_sphere(tri, 0.3);
  ASSERT_EQ(sphere.points.size(), 2u);
  EXPECT_EQ(sphere.valid_count(), 2u);
  EXPECT_GT(sphere.points[0].theta[0], 50.0);
  EXPECT_LT(sphere.points[1].theta[0], 50.0);
  // I(m) = 1 / ((m - a)(b - m)) gives d(50, m) = |asin(m - 50)| on [49, 51].
  for (const auto& pt : sphere.points) EXPECT_NEAR(std::abs(std::asin(pt.theta[0] - 50.0)), 0.3, 1e-4);
}

TEST(Geometry, GumbelSphereOpensAtTheLocationBoundary) {
  const auto g = DistributionSpec::trunc_gumbel(1013, 558, 500, 3000);
  const auto closed = fisher_sphere(g, 0.2, {.K = 40});
  EXPECT_EQ(closed.valid_count(), 40u);
  const auto open = fisher_sphere(g, 0.3, {.K = 40});
  std::size_t truncated = 0;
  for (const auto& pt : open.points) truncated += pt.status == PathStatus::TruncatedAtBoundary;
  EXPECT_GT(truncated, 0u);
  EXPECT_GT(open.valid_count(), 0u);
  EXPECT_LT(open.valid_count(), 40u);
}

TEST(Geometry, HamiltonianConservedAcrossFamilies) {
  const std::vector<DistributionSpec> specs{
      kNormal, DistributionSpec::trunc_normal(30, 7.5, 15, 75), DistributionSpec::trunc_gumbel(1013, 558, 500, 3000),
      DistributionSpec::trunc_lognormal(0, 0.76, 0.1, 10), DistributionSpec::triangular(49, 50, 51)};
  for (const auto& spec : specs) {
    for (double delta : {0.5, 1.4}) {
      const auto sphere = fisher_sphere(spec, delta, {.K = 12});
      for (const auto& pt : sphere.points)
        if (pt.valid()) EXPECT_LE(pt.max_abs_drift, 1e-3) << describe(spec) << " delta " << delta;
    }
  }
}

TEST(Geometry, MetricPositiveDefiniteAlongPaths) {
  const auto spec = DistributionSpec::trunc_normal(30, 7.5, 15, 75);
  const auto chart = natural_chart(spec);
  for (const auto& p : initial_momenta(spec, 1.0, 6)) {
    const auto path = integrate_geodesic(*chart, spec.theta(), p, Integrator::AdamsMoulton, 200);
    for (const auto& step : path.steps) {
      Eigen::SelfAdjointEigenSolver<ParamMatrix> eig(chart->metric(step.q));
      ASSERT_GT(eig.eigenvalues().minCoeff(), 0.0);
    }
  }
}

TEST(Geometry, VarianceChartGivesTheSameDistributions) {
  const auto chart = normal_variance_chart();
  const auto sphere = fisher_sphere(chart, vec(0, 1), 0.5, {.K = 40});
  EXPECT_EQ(sphere.valid_count(), 40u);
  for (std::size_t k = 0; k < sphere.points.size(); ++k) {
    const auto spec = sphere.point_spec(k);
    EXPECT_NEAR(gaussian_fisher_distance(0, 1, spec.theta()[0], spec.theta()[1]), 0.5, 1e-3);
  }
}

TEST(Geometry, UniformHasNoChart) {
  EXPECT_THROW(natural_chart(DistributionSpec::uniform(0, 1)), UnsupportedFamilyError);
  EXPECT_THROW(fisher_sphere(DistributionSpec::uniform(0, 1), 0.5), UnsupportedFamilyError);
}

TEST(Geometry, ParallelSphereMatchesSerial) {
  const auto spec = DistributionSpec::trunc_normal(30, 7.5, 15, 75);
  const auto serial = fisher_sphere(spec, 0.8, {.K = 16, .parallelism = {1}});
  const auto threaded = fisher_sphere(spec, 0.8, {.K = 16, .parallelism = {4}});
  for (std::size_t k = 0; k < serial.points.size(); ++k) EXPECT_EQ(serial.points[k].theta, threaded.points[k].theta);
}
