#include <algorithm>
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fisherpli/error.hpp"
#include "fisherpli/models.hpp"
#include "fisherpli/quadrature.hpp"
#include "fisherpli/robustness.hpp"

using namespace fisherpli;

namespace {

const DistributionSpec kStd = DistributionSpec::normal(0.0, 1.0);

IOSample gaussian_toy(std::size_t n, std::uint64_t seed) {
  auto x = sample(kStd, seed, n);
  auto y = x;
  return IOSample({kStd}, std::move(x), std::move(y));
}

const IOSample& ishigami_sample() {
  static const IOSample s = generate_sample(ModelSpec::ishigami(), 2000, 42);
  return s;
}

OfpliOptions options(int K, EstimatorMode mode = EstimatorMode::ReverseIS) {
  OfpliOptions o;
  o.sphere.K = K;
  o.mode = mode;
  if (mode == EstimatorMode::DirectResample) o.resample = ResampleContext{model_function(ModelKind::Ishigami), 7, {}};
  return o;
}

}  // namespace

TEST(Robustness, PliIdentityIsZero) {
  const auto& s = ishigami_sample();
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(pli(s, i, kStd, 0.95), 0.0);
  const auto flood = generate_sample(ModelSpec::flood(), 500, 3);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(pli(flood, i, flood.input_specs()[i], 0.95), 0.0);
}

TEST(Robustness, PliGaussianToyShift) {
  const auto toy = gaussian_toy(100000, 77);
  const double expected = (1.8448536269514722 - 1.6448536269514722) / 1.6448536269514722;
  EXPECT_NEAR(pli(toy, 0, DistributionSpec::normal(0.2, 1.0), 0.95), expected, 0.02);
}

TEST(Robustness, PliSignFollowsQuantileShift) {
  auto x = sample(kStd, 4, 20000);
  std::vector<double> y(x.size());
  std::transform(x.begin(), x.end(), y.begin(), [](double v) { return std::exp(v); });
  const IOSample s({kStd}, x, y);
  EXPECT_GT(pli(s, 0, DistributionSpec::normal(0.3, 1.0), 0.95), 0.0);
  EXPECT_LT(pli(s, 0, DistributionSpec::normal(-0.3, 1.0), 0.95), 0.0);
}

TEST(Robustness, ZeroBaselineQuantileIsRejected) {
  const IOSample s({kStd}, {0.1, 0.2, 0.3}, {0.0, 0.0, 0.0});
  EXPECT_THROW(pli(s, 0, DistributionSpec::normal(0.1, 1.0), 0.5), DomainError);
}

TEST(Robustness, SmallRadiusGivesSmallIndices) {
  const auto& s = ishigami_sample();
  for (std::size_t i = 0; i < 3; ++i) {
    const auto level = ofpli_at_delta(s, i, 1e-3, options(24));
    EXPECT_LE(std::abs(level.s_plus), 1e-2);
    EXPECT_LE(std::abs(level.s_minus), 1e-2);
    EXPECT_LE(level.s_minus, level.s_plus);
  }
}

TEST(Robustness, ExtremesAreSpherePoints) {
  const auto& s = ishigami_sample();
  const auto sphere = fisher_sphere(kStd, 0.5, {.K = 24});
  const auto level = ofpli_at_delta(s, 2, sphere, options(24));
  ASSERT_TRUE(level.argmax && level.argmin);
  EXPECT_EQ(*level.argmax, sphere.point_spec(static_cast<std::size_t>(level.argmax_index)));
  EXPECT_EQ(*level.argmin, sphere.point_spec(static_cast<std::size_t>(level.argmin_index)));
  EXPECT_EQ(level.s_plus, level.points[static_cast<std::size_t>(level.argmax_index)].value);
  EXPECT_LE(level.s_minus, level.s_plus);
  EXPECT_LE(level.s_minus, 0.0);
  EXPECT_GE(level.s_plus, 0.0);
  for (const auto& p : level.points)
    if (p.valid) {
      EXPECT_LE(p.value, level.s_plus);
      EXPECT_GE(p.value, level.s_minus);
    }
}

TEST(Robustness, InadmissiblePointInvalidatesLevel) {
  const auto toy = gaussian_toy(300, 5);
  const auto level = ofpli_at_delta(toy, 0, 1.5, options(16));
  EXPECT_FALSE(level.admissible);
  bool any_bad = false;
  for (const auto& p : level.points) any_bad |= p.valid && !p.admissible;
  EXPECT_TRUE(any_bad);
  if (level.argmax) {
    EXPECT_TRUE(level.points[static_cast<std::size_t>(level.argmax_index)].admissible);
    EXPECT_TRUE(level.points[static_cast<std::size_t>(level.argmin_index)].admissible);
  }
}

TEST(Robustness, AdmissibilityCutoffIsMonotone) {
  PliCurve curve;
  for (double d : {0.1, 0.2, 0.3, 0.4}) {
    OfpliLevel l;
    l.delta = d;
    curve.levels.push_back(l);
  }
  curve.levels[1].admissible = false;
  apply_admissibility_cutoff(curve);
  EXPECT_TRUE(curve.levels[0].admissible);
  for (std::size_t k = 1; k < 4; ++k) EXPECT_FALSE(curve.levels[k].admissible);
  ASSERT_TRUE(curve.delta_max);
  EXPECT_EQ(*curve.delta_max, 0.1);

  curve.levels[0].admissible = false;
  apply_admissibility_cutoff(curve);
  EXPECT_FALSE(curve.delta_max.has_value());
}

TEST(Robustness, CurveOnTheGaussianToy) {
  const auto toy = gaussian_toy(400, 8);
  const auto curve = ofpli_curve(toy, 0, {0.1, 0.5, 1.0, 2.0}, options(16));
  ASSERT_EQ(curve.levels.size(), 4u);
  bool seen_bad = false;
  for (const auto& l : curve.levels) {
    if (seen_bad) EXPECT_FALSE(l.admissible);
    seen_bad |= !l.admissible;
  }
  EXPECT_TRUE(seen_bad);
  ASSERT_TRUE(curve.delta_max);
  EXPECT_GE(*curve.delta_max, 0.1);
  EXPECT_LE(curve.levels[0].s_plus, curve.levels[1].s_plus);
}

TEST(Robustness, GridValidation) {
  EXPECT_NO_THROW(validate_delta_grid({}));
  EXPECT_NO_THROW(validate_delta_grid({0.1, 0.2}));
  EXPECT_THROW(validate_delta_grid({0.2, 0.1}), DomainError);
  EXPECT_THROW(validate_delta_grid({0.1, 0.1}), DomainError);
  EXPECT_THROW(validate_delta_grid({0.0, 0.1}), DomainError);
  EXPECT_THROW(validate_delta_grid({-0.5}), DomainError);
}

TEST(Robustness, UnsupportedAndMisconfiguredInputs) {
  const auto u = DistributionSpec::uniform(0.0, 1.0);
  auto x = sample(u, 1, 100);
  const IOSample s({u}, x, x);
  EXPECT_THROW(ofpli_at_delta(s, 0, 0.3, options(8)), UnsupportedFamilyError);
  EXPECT_THROW(ofpli_at_delta(ishigami_sample(), 5, 0.3, options(8)), DomainError);
  OfpliOptions direct = options(8);
  direct.mode = EstimatorMode::DirectResample;
  EXPECT_THROW(ofpli_at_delta(ishigami_sample(), 0, 0.3, direct), DomainError);
  EXPECT_THROW(estimator_mode_from_name("bogus"), DomainError);
  EXPECT_EQ(estimator_mode_from_name("resample"), EstimatorMode::DirectResample);
}

TEST(Robustness, DirectResamplingIsDeterministic) {
  const auto& s = ishigami_sample();
  auto a = options(12, EstimatorMode::DirectResample);
  auto b = a;
  b.resample->parallelism = {3};
  b.sphere.parallelism = {3};
  const auto la = ofpli_at_delta(s, 1, 0.5, a);
  const auto lb = ofpli_at_delta(s, 1, 0.5, b);
  for (std::size_t k = 0; k < la.points.size(); ++k) EXPECT_EQ(la.points[k].value, lb.points[k].value);
  auto c = a;
  c.resample->seed = 8;
  EXPECT_NE(ofpli_at_delta(s, 1, 0.5, c).s_plus, la.s_plus);
}

TEST(Robustness, DirectResamplingOfTheNominalReusesTheSample) {
  const auto& s = ishigami_sample();
  const ResampleContext ctx{model_function(ModelKind::Ishigami), 3, {}};
  EXPECT_EQ(pli_resample(s, 0, law_from_spec(kStd), 0.95, ctx, 1).value, 0.0);
  EXPECT_NE(pli_resample(s, 0, law_from_spec(DistributionSpec::normal(0.0, 1.2)), 0.95, ctx, 1).value, 0.0);
}

TEST(Robustness, BootstrapIntervalsBracketTheBulk) {
  const auto& s = ishigami_sample();
  for (auto mode : {EstimatorMode::ReverseIS, EstimatorMode::DirectResample}) {
    auto o = options(12, mode);
    o.bootstrap = 40;
    o.seed = 5;
    const auto level = ofpli_at_delta(s, 2, 0.5, o);
    ASSERT_TRUE(level.ci_plus && level.ci_minus);
    EXPECT_EQ(level.ci_plus->values.size(), 40u);
    EXPECT_LT(level.ci_plus->lo95, level.ci_plus->hi95);
    EXPECT_LE(level.ci_minus->hi95, level.ci_plus->hi95);
    const auto again = ofpli_at_delta(s, 2, 0.5, o);
    EXPECT_EQ(again.ci_plus->values, level.ci_plus->values);
  }
}

TEST(Robustness, EpliIdentity) {
  for (const auto& spec : {kStd, DistributionSpec::triangular(49, 50, 51),
                           DistributionSpec::trunc_gumbel(1013, 558, 500, 3000)}) {
    const auto law = epli_perturbed_density(spec, 0.0);
    for (double u : {0.1, 0.5, 0.9}) {
      const double x = quantile(spec, u);
      EXPECT_EQ(law.pdf(x), pdf(spec, x));
      EXPECT_EQ(law.quantile(u), x);
    }
  }
  const auto& s = ishigami_sample();
  const auto pts = epli_curve(s, 0, {0.0}, 0.95, EpliMode::MeanShift);
  EXPECT_EQ(pts[0].estimate.value, 0.0);
  const auto v1 = epli_curve(s, 0, {1.0}, 0.95, EpliMode::VarianceScale);
  EXPECT_EQ(v1[0].estimate.value, 0.0);
}

TEST(Robustness, EpliGaussianReduction) {
  for (const auto& [mu, sigma, delta] : {std::tuple{0.0, 1.0, 0.5}, std::tuple{2.0, 3.0, -0.8}}) {
    const auto spec = DistributionSpec::normal(mu, sigma);
    const auto shifted = DistributionSpec::normal(mu + delta * sigma, sigma);
    const auto law = epli_perturbed_density(spec, delta);
    for (int k = 0; k <= 1000; ++k) {
      const double x = mu - 5 * sigma + 10 * sigma * k / 1000.0;
      EXPECT_NEAR(law.pdf(x), pdf(shifted, x), 1e-10);
    }
    for (double u : {0.05, 0.5, 0.95}) EXPECT_NEAR(law.quantile(u), quantile(shifted, u), 1e-9);
  }
}

TEST(Robustness, EpliDensityIntegratesToOne) {
  for (const auto& spec : {DistributionSpec::trunc_gumbel(1013, 558, 500, 3000),
                           DistributionSpec::triangular(49, 50, 51), DistributionSpec::trunc_lognormal(0, 0.76, 0.1, 10),
                           DistributionSpec::trunc_normal(30, 7.5, 15, 75)}) {
    for (double delta : {-0.7, 0.4, 1.2}) {
      const auto law = epli_perturbed_density(spec, delta);
      const Support w = integration_window(spec);
      std::vector<double> breaks;
      if (spec.family() == FamilyTag::Triangular) breaks.push_back(50.0);
      QuadratureOptions opt;
      opt.rel_tol = 1e-9;
      const double a = w.lo + 1e-12 * (w.hi - w.lo), b = w.hi - 1e-12 * (w.hi - w.lo);
      EXPECT_NEAR(integrate_scalar(law.pdf, a, b, opt, breaks), 1.0, 1e-6) << describe(spec) << " " << delta;
    }
  }
}

TEST(Robustness, EpliVarianceScaleNeedsGaussianInput) {
  EXPECT_THROW(epli_variance_law(DistributionSpec::triangular(49, 50, 51), 2.0), UnsupportedFamilyError);
  EXPECT_THROW(epli_variance_law(kStd, 0.0), DomainError);
  const auto law = epli_variance_law(DistributionSpec::trunc_normal(30, 7.5, 15, 75), 4.0);
  ASSERT_TRUE(law.spec);
  EXPECT_EQ(law.spec->theta()[1], 15.0);
  EXPECT_EQ(law.spec->theta()[0], 30.0);
}

TEST(Robustness, EpliIshigamiVarianceAndMeanCurves) {
  const auto s = generate_sample(ModelSpec::ishigami(), 20000, 11);
  const ResampleContext ctx{model_function(ModelKind::Ishigami), 19, {}};
  const auto var = epli_curve(s, 2, {0.25, 1.0, 2.0, 3.0, 4.0}, 0.95, EpliMode::VarianceScale,
                              EstimatorMode::DirectResample, ctx);
  for (std::size_t k = 1; k < var.size(); ++k) EXPECT_GT(var[k].estimate.value, var[k - 1].estimate.value);
  double vmax = 0.0;
  for (const auto& p : var) vmax = std::max(vmax, std::abs(p.estimate.value));
  const auto mean = epli_curve(s, 2, {-1.0, 1.0}, 0.95, EpliMode::MeanShift, EstimatorMode::DirectResample, ctx);
  for (const auto& p : mean) EXPECT_LT(std::abs(p.estimate.value), vmax);
}

TEST(Robustness, MeanShiftKullbackLeiblerCurves) {
  // Exact value is delta^2 / 2 for every law. Simpson's rule loses mass at
  // the uniform's singular endpoint, so its curve lies below the triangular one.
  const auto tri = DistributionSpec::triangular(-1, 0, 1);
  const auto uni = DistributionSpec::uniform(-1, 1);
  double prev_t = -1.0, prev_u = -1.0;
  for (double delta = 0.0; delta <= 2.0 + 1e-12; delta += 0.25) {
    const auto lt = epli_perturbed_density(tri, delta);
    const auto lu = epli_perturbed_density(uni, delta);
    const double kt = kl_divergence(lt.pdf, [&](double x) { return pdf(tri, x); }, -1, 1);
    const double ku = kl_divergence(lu.pdf, [&](double x) { return pdf(uni, x); }, -1, 1);
    EXPECT_GE(kt, prev_t);
    EXPECT_GE(ku, prev_u);
    EXPECT_NEAR(kt, delta * delta / 2, 5e-3);
    EXPECT_LE(ku, delta * delta / 2 + 1e-9);
    if (delta > 0.0) EXPECT_GT(kt, ku);
    prev_t = kt;
    prev_u = ku;
  }
}

TEST(Robustness, ReparametrizationInvariance) {
  const auto toy = gaussian_toy(20000, 31);
  ParamVector q0(2);
  q0 << 0.0, 1.0;
  const auto natural = fisher_sphere(kStd, 0.5, {.K = 60});
  const auto variance = fisher_sphere(normal_variance_chart(), q0, 0.5, {.K = 60});
  const auto a = ofpli_at_delta(toy, 0, natural, options(60));
  const auto b = ofpli_at_delta(toy, 0, variance, options(60));
  EXPECT_NEAR(a.s_plus, b.s_plus, 2e-3);
  EXPECT_NEAR(a.s_minus, b.s_minus, 2e-3);
}
