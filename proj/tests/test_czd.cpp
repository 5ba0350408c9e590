#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <functional>
#include <map>

#include "bergman/czd.hpp"

using namespace bergman;

namespace {

IntegrableFunction unit_spike(int n = 2) {
  Vec c(n);
  return spike({c, 1.0 / std::sqrt(8.0), 8.0});
}

// Spike of mass 1 with radius eps: height 1/eps^2 in two dimensions.
IntegrableFunction spike_family_member(double eps) {
  Vec c(2);
  c[0] = 0.2;
  return spike({c, eps, 1.0 / (eps * eps)});
}

SamplerConfig mc() {
  SamplerConfig cfg;
  cfg.seed = 11;
  return cfg;
}

}  // namespace

TEST(Functions, ClosedFormNorms) {
  const IntegrableFunction f = unit_spike();
  EXPECT_NEAR(f.l1_norm, 1.0, 1e-14);
  EXPECT_TRUE(f.l1_exact);
  EXPECT_NEAR(*f.l2_sq, 8.0, 1e-13);
  EXPECT_EQ(*f.sup_abs, 8.0);
  const IntegrableFunction r = radial_table(2, {0.5, 1.0}, {2.0, 1.0});
  EXPECT_NEAR(r.l1_norm, 2.0 * 0.25 + 0.75, 1e-15);
  EXPECT_TRUE(r.whole_ball());
}

TEST(Functions, BumpNormMatchesMonteCarlo) {
  Vec c(2);
  c[1] = -0.3;
  IntegrableFunction f = smooth_bump(c, 0.4, 3.0);
  const double exact = f.l1_norm;
  estimate_l1(f, mc(), 200000);
  EXPECT_NEAR(f.l1_norm, exact, 3.0 * f.l1_std_error);
  EXPECT_FALSE(f.l1_exact);
}

TEST(Functions, OverlappingSpikesUseMultiplicity) {
  Vec a(2), b(2);
  a[0] = 0.1;
  b[0] = -0.1;
  const IntegrableFunction f = sum_of_spikes({{a, 0.3, 1.0}, {b, 0.3, 1.0}}, mc());
  EXPECT_FALSE(f.l1_exact);
  // |f| = 2 on the lens, 1 elsewhere on the union
  const double d = 0.2, r = 0.3;
  const double lens = 2.0 * r * r * std::acos(d / (2 * r)) - 0.5 * d * std::sqrt(4 * r * r - d * d);
  const double exact = (2.0 * r * r * M_PI - 2.0 * lens + 2.0 * lens) / M_PI;
  EXPECT_NEAR(f.l1_norm, exact, 3.0 * f.l1_std_error);
}

TEST(Czd, ConstantBelowThresholdHasNoCubes) {
  DyadicSystem sys(DyadicConfig::practical(2, 4));
  const IntegrableFunction f = constant_function(2, 1.0);
  const CZDecomposition dec = decompose(f, 2.0, sys);
  EXPECT_TRUE(dec.cubes.empty());
  EXPECT_EQ(dec.omega_measure, 0.0);
  const GoodBadSplit s(dec, f, sys);
  EXPECT_EQ(s.parts(), 0u);
  for (const BallPoint& x : sample_ball(mc(), 2, 200, 3)) {
    EXPECT_EQ(s.good(x), complex(1.0));
    EXPECT_EQ(s.bad(x), complex(0.0));
  }
  const BoundCheck b = good_l2_bound_check(s, 2.0, dec.c1_used, mc(), 1000);
  EXPECT_EQ(b.lhs, 1.0);
  EXPECT_GE(b.rhs, 4.0);
  EXPECT_TRUE(b.pass);
  EXPECT_EQ(omega_prime(dec, sys, mc(), 1000).measure, 0.0);
}

TEST(Czd, ThresholdBelowNormIsRejected) {
  DyadicSystem sys(DyadicConfig::practical(2, 3));
  try {
    decompose(unit_spike(), 0.5, sys);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::precondition);
  }
}

TEST(Czd, ThresholdAboveSupHasNoCubes) {
  DyadicSystem sys(DyadicConfig::practical(2, 4));
  const CZDecomposition dec = decompose(unit_spike(), 8.5, sys);
  EXPECT_TRUE(dec.cubes.empty());
}

TEST(Czd, ZeroFunction) {
  DyadicSystem sys(DyadicConfig::practical(2, 3));
  const IntegrableFunction f = zero_function(2);
  const CZDecomposition dec = decompose(f, 1.0, sys);
  EXPECT_TRUE(dec.cubes.empty());
  const BoundCheck b = good_l2_bound_check(GoodBadSplit(dec, f, sys), 1.0, dec.c1_used, mc(), 1000);
  EXPECT_EQ(b.lhs, 0.0);
  EXPECT_EQ(b.rhs, 0.0);
  EXPECT_TRUE(b.pass);
}

TEST(Czd, MismatchedPairingIsRejected) {
  DyadicSystem sys(DyadicConfig::practical(2, 3));
  const IntegrableFunction f = unit_spike();
  const CZDecomposition dec = decompose(f, 2.0, sys);
  const IntegrableFunction other = constant_function(2, 1.0);
  EXPECT_THROW(GoodBadSplit(dec, other, sys), Error);
}

TEST(Czd, SpikeClauses) {
  DyadicSystem sys(DyadicConfig::practical(2, 6));
  const IntegrableFunction f = unit_spike();
  const CZDecomposition dec = decompose(f, 2.0, sys);
  ASSERT_FALSE(dec.cubes.empty());
  EXPECT_FALSE(dec.c1_warning);
  const GoodBadSplit s(dec, f, sys);
  const CzdClauseReport r = check_clauses(s, mc(), 20000, 16000);
  EXPECT_TRUE(r.ok()) << r.f_points_above_t_shallow << " " << r.average_violations << " "
                      << r.maximality_violations << " " << r.nesting_violations << " " << r.mean_zero_violations
                      << " " << r.reconstruction_failures << " " << r.mass_lhs << "/" << r.mass_rhs;
  EXPECT_GT(r.min_avg_ratio, 1.0 - 1e-9);
  EXPECT_LE(r.max_avg_ratio, dec.c1_used);
  EXPECT_LE(dec.omega_measure, 0.5 + 3.0 * dec.omega_se);
  EXPECT_GT(r.f_points, 0u);
}

// Independent oracle: averages from one large uniform sample histogrammed by
// cube, then the same stopping rule run on the histogram.
TEST(Czd, SpikeMatchesHistogramDescent) {
  const int depth = 4;
  DyadicSystem sys(DyadicConfig::practical(2, depth));
  sys.realize_to(depth);
  const IntegrableFunction f = unit_spike();
  const double t = 2.0;
  CzdOptions opt;
  opt.samples = 8000;
  opt.max_samples = 128000;
  const CZDecomposition dec = decompose(f, t, sys, opt);

  const std::size_t n_pts = 400000;
  std::map<CubeId, std::pair<double, double>> sums;  // sum |f|, hits
  for (const BallPoint& x : sample_ball(mc(), 2, n_pts, 99)) {
    const double v = std::abs(f(x));
    for (int k = 1; k <= depth; ++k) {
      auto& s = sums[sys.find(x, k)];
      s.first += v;
      s.second += 1.0;
    }
  }
  std::vector<CubeId> oracle;
  std::vector<CubeId> ambiguous;
  std::function<void(CubeId)> walk = [&](CubeId p) {
    for (const CubeId c : sys.children(p)) {
      const auto it = sums.find(c);
      if (it == sums.end()) continue;
      const double avg = it->second.first / it->second.second;
      // binomial-style error of the histogram average
      const double se = 8.0 * std::sqrt(avg / 8.0 * (1.0 - avg / 8.0) / it->second.second);
      if (std::abs(avg - t) < 4.0 * se + 0.02) ambiguous.push_back(c);
      if (avg > t)
        oracle.push_back(c);
      else if (c.level < depth)
        walk(c);
    }
  };
  walk(kRoot);
  ASSERT_FALSE(oracle.empty());
  auto in = [](const std::vector<CubeId>& v, CubeId c) { return std::find(v.begin(), v.end(), c) != v.end(); };
  for (const CubeId c : oracle)
    if (!in(ambiguous, c)) EXPECT_TRUE(dec.lookup.count((std::uint64_t(c.level) << 32) | std::uint32_t(c.index)))
        << c.level << "," << c.index;
  for (const StoppingCube& q : dec.cubes)
    if (!in(ambiguous, q.id)) EXPECT_TRUE(in(oracle, q.id)) << q.id.level << "," << q.id.index;
}

TEST(Czd, SyntheticConstantCubeHasZeroBadPart) {
  // no threshold makes a constant stop, so the decomposition is built by hand
  DyadicSystem sys(DyadicConfig::practical(2, 2));
  const IntegrableFunction f = constant_function(2, 3.0);
  CZDecomposition dec;
  dec.t = 3.0;
  dec.l1_norm = f.l1_norm;
  dec.function_label = f.family + ":" + f.label;
  dec.max_level = 2;
  const CubeId q{1, 1};
  dec.cubes.push_back({q, sys.cube(q).center, cube_average(sys, q, f, 2000, 1), 3.0, 0.0});
  dec.lookup[(1ULL << 32) | 1U] = 0;
  const GoodBadSplit s(dec, f, sys);
  for (const BallPoint& x : sample_ball(mc(), 2, 500, 4)) EXPECT_NEAR(std::abs(s.bad_part(0, x)), 0.0, 1e-14);
}

TEST(Czd, GoodL2AcrossSpikeFamily) {
  for (const double eps : {0.3, 0.1, 0.03}) {
    DyadicSystem sys(DyadicConfig::practical(2, 6));
    const IntegrableFunction f = spike_family_member(eps);
    const CZDecomposition dec = decompose(f, 2.0, sys);
    const BoundCheck b = good_l2_bound_check(GoodBadSplit(dec, f, sys), 2.0, dec.c1_used, mc(), 20000);
    EXPECT_TRUE(b.pass) << eps << ": " << b.lhs << " vs " << b.rhs;
    EXPECT_GT(b.lhs, 0.0);
  }
}

TEST(Czd, OmegaPrimeBoundsAndStability) {
  DyadicSystem sys(DyadicConfig::practical(2, 5));
  const IntegrableFunction f = unit_spike();
  const CZDecomposition dec = decompose(f, 2.0, sys);
  ASSERT_FALSE(dec.cubes.empty());
  const OmegaPrime a = omega_prime(dec, sys, mc(), 20000);
  const OmegaPrime b = omega_prime(dec, sys, mc(), 40000);
  EXPECT_TRUE(std::isfinite(a.c3_hat));
  EXPECT_NEAR(a.c3_hat, b.c3_hat, 3.0 * std::hypot(a.c3_se, b.c3_se) + 1e-12);
  double sum_bound = 0.0;
  for (const SupportBall& ball : a.balls) sum_bound += std::pow(ball.radius, 2);
  EXPECT_LE(a.measure, std::min(1.0, sum_bound) + 3.0 * a.measure_se);
  for (const StoppingCube& q : dec.cubes) EXPECT_TRUE(a.contains(q.center));

  CZDecomposition one = dec;
  one.cubes.resize(1);
  const OmegaPrime single = omega_prime(one, sys, mc(), 20000);
  const double r = single.balls.front().radius;
  EXPECT_LE(single.measure, std::pow(r, 2) + 3.0 * single.measure_se);
}
