#include <gtest/gtest.h>

#include <cmath>

#include "bergman/projector.hpp"

namespace bergman {
namespace {

IntegrableFunction whole_ball_function(const std::string& label, BallFunction h, double l1) {
  IntegrableFunction f;
  f.family = "test";
  f.label = label;
  f.dim = 2;
  f.value = std::move(h);
  f.l1_norm = l1;
  f.l1_exact = true;
  return f;
}

IntegrableFunction identity_w() {
  return whole_ball_function("w", [](const BallPoint& x) { return complex(x[0], x[1]); }, 2.0 / 3.0);
}

IntegrableFunction conj_w() {
  return whole_ball_function("conj(w)", [](const BallPoint& x) { return complex(x[0], -x[1]); }, 2.0 / 3.0);
}

BallPoint point(double a, double b) { return BallPoint{a, b}; }

Kernel singular_kernel() {
  Kernel k;
  k.name = "singular";
  k.dim = 2;
  k.eval = [](const BallPoint& x, const BallPoint& y) {
    const double d = distance_sq(x.vec(), y.vec());
    return complex(1.0 / (d * d));
  };
  return k;
}

ScanOptions small_scan() {
  ScanOptions s;
  s.outer = 1000;
  s.inner.samples = 500;
  return s;
}

TEST(Project, ConstantAtOriginIsExact) {
  const Kernel K = make_disk_kernel();
  const Projection p = project(K, constant_function(2, 1.0), point(0, 0), SamplerConfig{});
  EXPECT_NEAR(p.value.real(), 1.0, 1e-8);
  EXPECT_NEAR(p.value.imag(), 0.0, 1e-8);
  EXPECT_FALSE(p.divergent);
}

TEST(Project, ProductRuleReproducesAndAnnihilates) {
  const Kernel K = make_disk_kernel();
  ProjectOptions opt;
  opt.integrator = Integrator::product_rule;
  const BallPoint x = point(0.4, 0.0);
  EXPECT_NEAR(std::abs(project(K, identity_w(), x, {}, opt).value - complex(0.4, 0.0)), 0.0, 1e-6);
  EXPECT_NEAR(std::abs(project(K, conj_w(), x, {}, opt).value), 0.0, 1e-6);
}

TEST(Project, ProjectionFixesItsRange) {
  const Kernel K = make_disk_kernel();
  ProjectOptions opt;
  opt.integrator = Integrator::product_rule;
  const IntegrableFunction f = whole_ball_function(
      "w^2+conj(w)", [](const BallPoint& x) { return complex(x[0], x[1]) * complex(x[0], x[1]) + complex(x[0], -x[1]); },
      1.0);
  const IntegrableFunction w2 =
      whole_ball_function("w^2", [](const BallPoint& x) { return complex(x[0], x[1]) * complex(x[0], x[1]); }, 0.5);
  for (const BallPoint& x : {point(0.3, -0.2), point(-0.5, 0.1), point(0.0, 0.6)}) {
    const complex w = complex(x[0], x[1]);
    EXPECT_NEAR(std::abs(project(K, f, x, {}, opt).value - w * w), 0.0, 1e-6);
    EXPECT_NEAR(std::abs(project(K, w2, x, {}, opt).value - w * w), 0.0, 1e-6);
  }
}

TEST(Project, ConstantIsExactAwayFromOrigin) {
  const Kernel K = make_disk_kernel();
  for (const BallPoint& x : {point(0.5, 0.5), point(-0.99, 0.0)}) {
    const Projection p = project(K, constant_function(2, 1.0), x, SamplerConfig{});
    EXPECT_EQ(p.value, complex(1.0));
    EXPECT_EQ(p.std_error, 0.0);
  }
}

TEST(Project, MonteCarloAgreesWithMeanValueProperty) {
  // conj K(x, .) is antiholomorphic, so its average over a disc is its centre value
  const Kernel K = make_disk_kernel();
  const Vec c{0.5, 0.2};
  const IntegrableFunction f = spike({c, 0.1, 100.0});
  const BallPoint cp = BallPoint(c);
  for (const BallPoint& x : {point(0.0, 0.0), point(0.6, 0.1), point(-0.7, 0.3)}) {
    ProjectOptions opt;
    opt.samples = 20000;
    const Projection p = project(K, f, x, SamplerConfig{}, opt);
    EXPECT_LT(std::abs(p.value - std::conj(K(x, cp))), 4.0 * p.std_error + 1e-12);
    EXPECT_FALSE(p.divergent);
  }
}

TEST(Project, NonIntegrableKernelIsFlaggedDivergent) {
  // 1/|x-y|^4 is not integrable near the diagonal in two dimensions
  const Kernel k = singular_kernel();
  const IntegrableFunction one = constant_function(2, 1.0);
  SamplerConfig outer;
  outer.scheme = Scheme::low_discrepancy;
  const std::vector<BallPoint> pts = sample_ball(outer, 2, 50, 7);
  int flagged = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) flagged += project(k, one, pts[i], {}, {}, i).divergent ? 1 : 0;
  EXPECT_GE(flagged, 25);
}

TEST(Project, BoundedKernelIsNotFlagged) {
  const Kernel K = make_disk_kernel();
  const IntegrableFunction f = spike({Vec{0.3, 0.1}, 0.4, 1.0});
  SamplerConfig outer;
  outer.scheme = Scheme::low_discrepancy;
  const std::vector<BallPoint> pts = sample_ball(outer, 2, 500, 5);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_FALSE(project(K, f, pts[i], {}, {}, i).divergent) << i;
}

TEST(Project, RejectsBadInput) {
  const Kernel K = make_disk_kernel();
  ProjectOptions opt;
  opt.local_fraction = 1.0;
  EXPECT_THROW(project(K, constant_function(2, 1.0), point(0, 0), {}, opt), Error);
  opt = {};
  opt.integrator = Integrator::product_rule;
  EXPECT_THROW(project(make_harmonic_kernel(3, 4), constant_function(3, 1.0), BallPoint(Vec{0, 0, 0}), {}, opt),
               Error);
}

TEST(Distribution, IndicatorProfile) {
  const BallFunction h = [](const BallPoint& x) { return complex(x.norm_sq() < 0.25 ? 5.0 : 0.0); };
  const DistributionProfile p = distribution_function(h, 2, {1.0, 4.9, 5.0, 6.0}, SamplerConfig{}, 40000);
  EXPECT_NEAR(p.lambda[0], 0.25, 4.0 * p.lambda_se[0]);
  EXPECT_NEAR(p.lambda[1], 0.25, 4.0 * p.lambda_se[1]);
  EXPECT_EQ(p.lambda[2], 0.0);
  EXPECT_EQ(p.lambda[3], 0.0);
  EXPECT_NEAR(p.l1_norm, 1.25, 4.0 * p.l1_se);
}

TEST(Distribution, ZeroFunction) {
  const DistributionProfile p =
      distribution_function([](const BallPoint&) { return complex(0.0); }, 2, {0.1, 1.0}, SamplerConfig{}, 1000);
  EXPECT_EQ(p.lambda[0], 0.0);
  EXPECT_EQ(p.lambda[1], 0.0);
  EXPECT_EQ(weak_sup(std::vector<double>(10, 0.0)).value, 0.0);
}

TEST(Distribution, RadialModulus) {
  const std::vector<double> ts = {0.1, 0.3, 0.5, 0.7, 0.9};
  const DistributionProfile p =
      distribution_function([](const BallPoint& x) { return complex(x.norm()); }, 2, ts, SamplerConfig{}, 40000);
  for (std::size_t i = 0; i < ts.size(); ++i) EXPECT_NEAR(p.lambda[i], 1.0 - ts[i] * ts[i], 4.0 * p.lambda_se[i]);
}

TEST(Distribution, RejectsUnsortedThresholds) {
  EXPECT_THROW(distribution_from_values({1.0}, {2.0, 1.0}), Error);
  EXPECT_THROW(distribution_from_values({}, {1.0}), Error);
}

TEST(WeakSup, EmpiricalSupremum) {
  // t nu{|h| > t} for values {1, 2, 3, 4}: sup approached below 3 gives 3 * 2/4
  const WeakSup w = weak_sup({4.0, 1.0, 3.0, 2.0});
  EXPECT_DOUBLE_EQ(w.value, 1.5);
  EXPECT_DOUBLE_EQ(w.argmax_t, 3.0);
  const WeakSup tie = weak_sup({2.0, 2.0, 1.0, 0.0});
  EXPECT_DOUBLE_EQ(tie.value, 1.0);
}

TEST(WeakSup, LogGrid) {
  const std::vector<double> g = log_grid(0.5, 8.0, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.front(), 0.5);
  EXPECT_NEAR(g[2], 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(g.back(), 8.0);
}

TEST(WeakTypeScan, ConstantAndZero) {
  const Kernel K = make_disk_kernel();
  const WeakTypeReport r = weak_type_scan(K, "mixed", {constant_function(2, 1.0), zero_function(2)}, {1.0, 0.0},
                                          log_grid(0.1, 10.0, 7), SamplerConfig{}, small_scan());
  ASSERT_EQ(r.members.size(), 2u);
  EXPECT_NEAR(r.members[0].sup_ratio, 1.0, 1e-6);
  EXPECT_EQ(r.members[1].sup_ratio, 0.0);
  EXPECT_EQ(r.members[0].markov_violations, 0u);
  EXPECT_EQ(r.members[0].small_t_violations, 0u);
}

TEST(WeakTypeScan, ConcentratingSpikesMatchCentreValue) {
  const Kernel K = make_disk_kernel();
  const Vec c{0.9, 0.0};
  std::vector<IntegrableFunction> fs;
  std::vector<double> eps = {0.1, 0.01};
  for (double e : eps) fs.push_back(spike({c, e, 1.0 / (e * e)}));
  const WeakTypeReport r = weak_type_scan(K, "concentrating", fs, eps, log_grid(0.1, 100.0, 13), SamplerConfig{},
                                          small_scan());
  EXPECT_TRUE(r.finite());
  // oracle: P f_eps = conj K(., c) exactly, independent of eps
  const BallPoint cp = BallPoint(c);
  SamplerConfig outer;
  outer.scheme = Scheme::low_discrepancy;
  std::vector<double> exact;
  for (const BallPoint& x : sample_ball(outer, 2, small_scan().outer, 0x6f75746572ULL)) exact.push_back(std::abs(K(x, cp)));
  const double oracle = weak_sup(exact).value;
  for (const WeakTypeMember& m : r.members) {
    EXPECT_DOUBLE_EQ(m.l1_norm, 1.0);
    EXPECT_NEAR(m.sup_ratio, oracle, 0.05 * oracle);
    EXPECT_EQ(m.markov_violations, 0u);
  }
  EXPECT_LT(r.trend, 2.0);
}

TEST(Weak22, HolomorphicOrthogonalAndZero) {
  const Kernel K = make_disk_kernel();
  IntegrableFunction w = identity_w();
  w.l2_sq = 0.5;
  const Weak22Result in_space = weak22_check(K, w, SamplerConfig{}, small_scan());
  EXPECT_TRUE(in_space.pass);
  EXPECT_NEAR(in_space.l2_out, std::sqrt(0.5), 0.05);

  IntegrableFunction cw = conj_w();
  cw.l2_sq = 0.5;
  const Weak22Result orth = weak22_check(K, cw, SamplerConfig{}, small_scan());
  EXPECT_TRUE(orth.pass);
  EXPECT_LT(orth.l2_out, 0.1);

  const Weak22Result zero = weak22_check(K, zero_function(2), SamplerConfig{}, small_scan());
  EXPECT_TRUE(zero.pass);
  EXPECT_EQ(zero.l2_out, 0.0);
}

TEST(Pipeline, ConstantBelowThresholdHasNoBadPart) {
  const Kernel K = make_disk_kernel();
  DyadicSystem sys(DyadicConfig::practical(2, 6));
  PipelineOptions opt;
  opt.scan = small_scan();
  const PipelineReport r = cz_pipeline_check(K, constant_function(2, 1.0), 2.0, sys, SamplerConfig{}, opt);
  EXPECT_EQ(r.stopping_cubes, 0u);
  EXPECT_EQ(r.b_l1, 0.0);
  EXPECT_EQ(r.lambda_pb_half, 0.0);
  EXPECT_EQ(r.lambda_pf, 0.0);
  EXPECT_TRUE(r.pass());
}

TEST(Pipeline, SpikeChainHolds) {
  const Kernel K = make_disk_kernel();
  DyadicSystem sys(DyadicConfig::practical(2, 6));
  PipelineOptions opt;
  opt.scan = small_scan();
  const IntegrableFunction f = spike({Vec{0.0, 0.0}, 1.0 / std::sqrt(8.0), 8.0});
  const PipelineReport r = cz_pipeline_check(K, f, 2.0, sys, SamplerConfig{}, opt);
  EXPECT_GT(r.stopping_cubes, 0u);
  for (const StageRow& s : r.stages) EXPECT_TRUE(s.pass) << s.stage << " lhs=" << s.lhs << " rhs=" << s.rhs;
  EXPECT_EQ(r.divergent_points, 0u);
  EXPECT_TRUE(r.pass());
  EXPECT_LE(r.final_ratio, r.c_total);
  EXPECT_NEAR(r.c3_hat, 2.0 * r.omega_prime / r.l1_norm, 1e-12);
}

}  // namespace
}  // namespace bergman
