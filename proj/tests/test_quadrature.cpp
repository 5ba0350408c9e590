#include <gtest/gtest.h>

#include <cmath>

#include "bergman/quadrature.hpp"

using namespace bergman;

TEST(SampleBall, RadialMomentMatchesHandIntegral) {
  // int_0^1 r^n n r^(n-1) dr = 1/2
  SamplerConfig cfg;
  for (int n : {2, 3}) {
    const Estimate e = integrate([n](const BallPoint& x) { return complex(std::pow(x.norm(), n)); }, n, cfg, 1000000);
    EXPECT_NEAR(e.value.real(), 0.5, 3.0 * e.std_error) << "n=" << n;
  }
}

TEST(SampleBall, BallAtOriginMeasure) {
  SamplerConfig cfg;
  for (int n : {2, 3, 5}) {
    const Estimate e =
        integrate([](const BallPoint& x) { return complex(x.norm() < 0.5 ? 1.0 : 0.0); }, n, cfg, 200000, 3);
    EXPECT_NEAR(e.value.real(), std::pow(0.5, n), 3.0 * e.std_error) << "n=" << n;
  }
}

TEST(SampleBall, Deterministic) {
  SamplerConfig cfg;
  cfg.scheme = Scheme::low_discrepancy;
  const auto a = sample_ball(cfg, 3, 1000, 9);
  const auto b = sample_ball(cfg, 3, 1000, 9);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (int k = 0; k < 3; ++k) ASSERT_EQ(a[i][k], b[i][k]);
  for (const auto& p : a) ASSERT_LT(p.norm_sq(), 1.0);
}

TEST(Integrate, Examples) {
  SamplerConfig cfg;
  const Estimate c = integrate([](const BallPoint&) { return complex(3.25); }, 2, cfg, 10000);
  EXPECT_EQ(c.value, complex(3.25));
  EXPECT_EQ(c.std_error, 0.0);

  const Estimate odd = integrate([](const BallPoint& x) { return complex(x[0]); }, 3, cfg, 100000);
  EXPECT_NEAR(odd.value.real(), 0.0, 3.0 * odd.std_error);

  const Estimate sq = integrate([](const BallPoint& x) { return complex(x.norm_sq()); }, 2, cfg, 100000);
  EXPECT_NEAR(sq.value.real(), 0.5, 3.0 * sq.std_error);
}

TEST(Integrate, IndependentOfWorkerCount) {
  SamplerConfig one;
  SamplerConfig four = one;
  four.workers = 4;
  auto f = [](const BallPoint& x) { return complex(std::exp(x[0]) * x[1], x.norm_sq()); };
  const Estimate a = integrate(f, 2, one, 50000);
  const Estimate b = integrate(f, 2, four, 50000);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Integrate, NonFiniteDensityIsAnError) {
  SamplerConfig cfg;
  EXPECT_THROW(integrate([](const BallPoint& x) { return complex(x[0] > 0 ? NAN : 1.0); }, 2, cfg, 1000), Error);
}

TEST(IntegrateRegion, Examples) {
  SamplerConfig cfg;
  auto f = [](const BallPoint& x) { return complex(x.norm_sq()); };
  const RegionEstimate all = integrate_region(f, [](const BallPoint&) { return true; }, 2, cfg, 20000);
  const Estimate plain = integrate(f, 2, cfg, 20000);
  EXPECT_EQ(all.integral.value, plain.value);
  EXPECT_EQ(all.measure.value, 1.0);

  const RegionEstimate none = integrate_region(f, [](const BallPoint&) { return false; }, 2, cfg, 20000);
  EXPECT_EQ(none.integral.value, complex(0.0));

  const double r = 0.7;
  const RegionEstimate ball =
      integrate_region([](const BallPoint&) { return complex(1.0); }, [r](const BallPoint& x) { return x.norm() < r; },
                       3, cfg, 100000);
  EXPECT_NEAR(ball.integral.value.real(), r * r * r, 3.0 * ball.integral.std_error);
}

TEST(ProductRuleDisk, Examples) {
  const Estimate one = product_rule_disk([](const BallPoint&) { return complex(1.0); }, 16, 32);
  EXPECT_NEAR(one.value.real(), 1.0, 1e-14);
  for (int k = 1; k <= 6; ++k) {
    const Estimate wk = product_rule_disk([k](const BallPoint& x) { return std::pow(complex(x[0], x[1]), k); }, 16, 32);
    EXPECT_LT(std::abs(wk.value), 1e-14) << k;
  }
  const Estimate sq = product_rule_disk([](const BallPoint& x) { return complex(x.norm_sq()); }, 16, 32);
  EXPECT_NEAR(sq.value.real(), 0.5, 1e-14);
}

TEST(ProductRuleDisk, MachinePrecisionOnceAngularNodesExceedTwiceDegree) {
  // |w|^2 Re(w^d) + Re(w^d)^2, degree 2d trig content
  for (int d : {3, 5, 8}) {
    auto f = [d](const BallPoint& x) {
      const complex w(x[0], x[1]);
      const double re = std::real(std::pow(w, d));
      return complex(re * re);
    };
    // exact: mean over angle of cos^2(d th) r^(2d) = r^(2d)/2; int over s=r^2 of s^d/2 = 1/(2(d+1))
    const double exact = 1.0 / (2.0 * (d + 1));
    const Estimate e = product_rule_disk(f, 32, 2 * (2 * d) + 2);
    EXPECT_NEAR(e.value.real(), exact, 1e-14) << d;
  }
}

TEST(ProductRuleBall3, PolynomialMoments) {
  const Estimate sq = product_rule_ball3([](const BallPoint& x) { return complex(x.norm_sq()); }, 8, 8, 16);
  EXPECT_NEAR(sq.value.real(), 3.0 / 5.0, 1e-14);
  const Estimate z2 = product_rule_ball3([](const BallPoint& x) { return complex(x[2] * x[2]); }, 8, 8, 16);
  EXPECT_NEAR(z2.value.real(), 1.0 / 5.0, 1e-14);
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  const GaussRule g = gauss_legendre01(10);
  for (int p = 0; p < 20; ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], p);
    EXPECT_NEAR(s, 1.0 / (p + 1), 1e-14) << p;
  }
}

TEST(Integrate, UnbiasedAcrossSeeds) {
  // mean of 200 independent estimates against the product-rule value
  auto f = [](const BallPoint& x) { return complex(std::exp(x[0] - 0.5 * x[1]) * (1.0 + x.norm_sq())); };
  const double reference = product_rule_disk(f, 64, 128).value.real();
  double sum = 0.0;
  double var = 0.0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    SamplerConfig cfg;
    cfg.seed = 1000 + static_cast<std::uint64_t>(s);
    const Estimate e = integrate(f, 2, cfg, 2000);
    sum += e.value.real();
    var += e.std_error * e.std_error;
  }
  const double mean = sum / seeds;
  const double combined = std::sqrt(var) / seeds;
  EXPECT_NEAR(mean, reference, 3.0 * combined);
}
