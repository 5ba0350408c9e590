#include <gtest/gtest.h>

#include <cmath>

#include "bergman/geometry.hpp"
#include "bergman/quadrature.hpp"
#include "test_functions.hpp"

using namespace bergman;

namespace {

double dist(const BallPoint& a, const BallPoint& b) { return distance(a, b); }

}  // namespace

TEST(BallPoint, RejectsBoundaryAndNonFinite) {
  EXPECT_THROW(BallPoint({1.0, 0.0}), Error);
  EXPECT_THROW(BallPoint({0.6, 0.8}), Error);
  EXPECT_THROW(BallPoint({NAN, 0.0}), Error);
  const BallPoint p{0.3, -0.4};
  EXPECT_DOUBLE_EQ(p.norm_sq(), 0.25);
}

TEST(Mobius, ExchangeExamples) {
  const BallPoint a{0.5, 0.0};
  const BallPoint m1 = mobius(a, a);
  EXPECT_NEAR(m1[0], 0.0, 1e-15);
  EXPECT_NEAR(m1[1], 0.0, 1e-15);
  const BallPoint m2 = mobius(a, BallPoint::origin(2));
  EXPECT_NEAR(m2[0], 0.5, 1e-15);
  EXPECT_NEAR(m2[1], 0.0, 1e-15);
  const BallPoint m3 = mobius(BallPoint::origin(2), BallPoint{0.3, -0.2});
  EXPECT_NEAR(m3[0], -0.3, 1e-15);
  EXPECT_NEAR(m3[1], 0.2, 1e-15);
}

TEST(Mobius, InvolutionProperty) {
  SamplerConfig cfg;
  for (int n : {2, 3, 4}) {
    for (std::uint64_t i = 0; i < 2000; ++i) {
      BallPoint a = sample_ball_point(cfg, n, 1, i);
      BallPoint x = sample_ball_point(cfg, n, 2, i);
      // keep |a|, |x| <= 0.99
      if (a.norm() > 0.99) a = BallPoint(0.99 / a.norm() * a.vec());
      if (x.norm() > 0.99) x = BallPoint(0.99 / x.norm() * x.vec());
      const BallPoint back = mobius(a, mobius(a, x));
      ASSERT_LT(dist(back, x), 1e-12) << "n=" << n << " i=" << i;
    }
  }
}

TEST(QuasiMetric, Examples) {
  EXPECT_NEAR(quasi_metric(BallPoint::origin(2), BallPoint{0.7, 0.1}), 1.0, 1e-15);
  EXPECT_NEAR(quasi_metric(BallPoint{0.6, 0.0}, BallPoint{0.6, 0.0}), 0.64, 1e-15);
  // independent scalar evaluation: |x-y|^2 = 0.36 + 0.64 = 1, (1-0.36)(1-0.64) = 0.2304
  EXPECT_NEAR(quasi_metric(BallPoint{0.6, 0.0}, BallPoint{0.0, 0.8}), std::sqrt(1.2304), 1e-12);
  EXPECT_NEAR(std::sqrt(1.2304), 1.109234, 1e-6);
}

TEST(QuasiMetric, SandwichAndSymmetry) {
  SamplerConfig cfg;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    const BallPoint x = sample_ball_point(cfg, 3, 5, i);
    const BallPoint y = sample_ball_point(cfg, 3, 6, i);
    const double q = quasi_metric(x, y);
    const double d = dist(x, y);
    EXPECT_LE(d, q + 1e-15);
    EXPECT_LE(q * q, d * d + 1.0 + 1e-15);
    EXPECT_EQ(q, quasi_metric(y, x));
  }
}

TEST(MeasureBall, Values) {
  EXPECT_EQ(measure_ball_at_origin(3, 1.0), 1.0);
  EXPECT_EQ(measure_ball_at_origin(3, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(measure_ball_at_origin(2, 0.5), 0.25);
  EXPECT_THROW(measure_ball_at_origin(2, 1.5), Error);
  EXPECT_THROW(measure_ball_at_origin(2, -0.1), Error);
}

TEST(HyperbolicLaplacian, ClosedFormExamples) {
  SmoothFunction c{3, [](const BallPoint&) { return complex(2.5); },
                   [](const BallPoint&) { return std::vector<complex>(3, 0.0); },
                   [](const BallPoint&) { return complex(0.0); }};
  EXPECT_EQ(hyperbolic_laplacian(c, BallPoint{0.1, 0.2, 0.3}), complex(0.0));

  const auto fam2 = fixtures::polynomial_family(2);
  // x1^3 - 3 x1 x2^2 is harmonic in the plane
  EXPECT_NEAR(std::abs(hyperbolic_laplacian(fam2[1].f, BallPoint{0.4, -0.3})), 0.0, 1e-14);

  const auto fam3 = fixtures::polynomial_family(3);
  EXPECT_NEAR(hyperbolic_laplacian(fam3[0].f, BallPoint{0.5, 0.0, 0.0}).real(), 4.125, 1e-14);
}

TEST(HyperbolicLaplacian, MissingDerivativesIsUnsupported) {
  SmoothFunction f;
  f.dim = 2;
  f.value = [](const BallPoint&) { return complex(1.0); };
  try {
    hyperbolic_laplacian(f, BallPoint{0.1, 0.1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unsupported);
  }
}

TEST(HyperbolicLaplacianFd, TrivialExamples) {
  SmoothFunction one;
  one.dim = 3;
  one.value = [](const BallPoint&) { return complex(1.0); };
  EXPECT_LT(std::abs(hyperbolic_laplacian_fd(one, BallPoint{0.3, 0.2, -0.5}, 1e-3)), 1e-10);

  SmoothFunction lin;
  lin.dim = 3;
  lin.value = [](const BallPoint& x) { return complex(x[0]); };
  EXPECT_LT(std::abs(hyperbolic_laplacian_fd(lin, BallPoint::origin(3), 1e-3)), 1e-6);
}

TEST(HyperbolicLaplacianFd, ConsistentWithClosedFormAtSecondOrder) {
  SamplerConfig cfg;
  for (int n : {2, 3}) {
    for (const auto& nf : fixtures::polynomial_family(n)) {
      for (std::uint64_t i = 0; i < 10; ++i) {
        BallPoint a = sample_ball_point(cfg, n, 11, i);
        a = BallPoint(0.8 * a.vec());
        const complex exact = hyperbolic_laplacian(nf.f, a);
        const double r1 = std::abs(hyperbolic_laplacian_fd(nf.f, a, 1e-2) - exact);
        const double r2 = std::abs(hyperbolic_laplacian_fd(nf.f, a, 5e-3) - exact);
        const double r3 = std::abs(hyperbolic_laplacian_fd(nf.f, a, 2.5e-3) - exact);
        EXPECT_GE(r1 / r2, 3.5) << nf.name << " n=" << n << " i=" << i;
        EXPECT_LE(r1 / r2, 4.5) << nf.name << " n=" << n << " i=" << i;
        EXPECT_GE(r2 / r3, 3.5) << nf.name;
        EXPECT_LE(r2 / r3, 4.5) << nf.name;
        EXPECT_LT(std::abs(hyperbolic_laplacian_richardson(nf.f, a) - exact), 1e-6 * (1.0 + std::abs(exact)));
      }
    }
  }
}

TEST(HyperbolicLaplacianFd, PoissonTypeFunctionIsAnnihilated) {
  const SmoothFunction f = fixtures::hyperbolic_poisson(Vec{1.0, 0.0, 0.0});
  const BallPoint a{0.2, 0.1, 0.0};
  const double r1 = std::abs(hyperbolic_laplacian_fd(f, a, 1e-3));
  EXPECT_LT(r1, 1e-4);
  const double r0 = std::abs(hyperbolic_laplacian_fd(f, a, 4e-3));
  const double rh = std::abs(hyperbolic_laplacian_fd(f, a, 2e-3));
  EXPECT_NEAR(r0 / rh, 4.0, 0.5);
}
