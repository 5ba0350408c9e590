#include <gtest/gtest.h>

#include <cmath>
#include <thread>

#include "bergman/dyadic.hpp"
#include "bergman/quadrature.hpp"

using namespace bergman;

namespace {

std::vector<BallPoint> probe_points(int n, std::size_t count, std::uint64_t stream) {
  SamplerConfig cfg;
  cfg.scheme = Scheme::low_discrepancy;
  return sample_ball(cfg, n, count, stream);
}

}  // namespace

TEST(DyadicConfig, Validation) {
  DyadicConfig bad = DyadicConfig::practical(2, 3);
  bad.kappa0 = 10.0;
  bad.kappa1 = 1.0;
  try {
    bad.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
  EXPECT_NO_THROW(DyadicConfig::reference_triple(2, 2).validate());
  DyadicConfig eta1 = DyadicConfig::practical(2, 3);
  eta1.eta = 1.0;
  EXPECT_THROW(eta1.validate(), Error);
}

TEST(DyadicBuild, LevelOneIsSeparatedAndCovering) {
  const DyadicSystem sys(DyadicConfig::practical(2, 6));
  const std::size_t m = sys.count(1);
  ASSERT_GE(m, 2u);
  std::vector<BallPoint> cs;
  for (std::size_t i = 0; i < m; ++i) cs.push_back(sys.cube({1, static_cast<int>(i + 1)}).center);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < i; ++j) EXPECT_GE(distance(cs[i], cs[j]), 0.5);
  double worst = 0.0;
  for (const BallPoint& x : probe_points(2, 20000, 77)) {
    double best = 1e9;
    for (const BallPoint& c : cs) best = std::min(best, distance(x, c));
    worst = std::max(worst, best);
  }
  EXPECT_LE(worst, 4.0 * 0.5);
}

TEST(DyadicBuild, ReferenceTripleRespectsPackingBound) {
  const DyadicSystem sys(DyadicConfig::reference_triple(2, 2));
  const double bound = std::pow(1.0 + 2.0 * 96.0, 2);
  EXPECT_GT(sys.count(1), 1000u);
  EXPECT_LE(static_cast<double>(sys.count(1)), bound);
}

TEST(DyadicRefine, RootChildrenAreLevelOne) {
  DyadicSystem sys(DyadicConfig::practical(2, 2));
  const auto kids = sys.refine(kRoot);
  ASSERT_EQ(kids.size(), sys.count(1));
  for (std::size_t i = 0; i < kids.size(); ++i) EXPECT_EQ(kids[i], (CubeId{1, static_cast<int>(i + 1)}));
}

TEST(DyadicRefine, DepthLimit) {
  DyadicSystem sys(DyadicConfig::practical(2, 1));
  try {
    sys.refine({1, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::depth);
  }
}

TEST(DyadicRefine, ChildrenPartitionParentAndStayClose) {
  DyadicSystem sys(DyadicConfig::practical(2, 4));
  const double eta = 0.5;
  for (std::size_t i = 0; i < sys.count(1); ++i) {
    const CubeId p{1, static_cast<int>(i + 1)};
    const auto kids = sys.refine(p);
    const BallPoint pc = sys.cube(p).center;
    for (const CubeId c : kids) {
      EXPECT_EQ(sys.parent(c), p);
      EXPECT_LE(distance(sys.cube(c).center, pc), 4.0 * eta + 4.0 * eta * eta);
    }
    for (const BallPoint& x : probe_points(2, 3000, 5 + i)) {
      std::size_t claims = 0;
      for (const CubeId c : kids) claims += sys.contains(c, x) ? 1 : 0;
      EXPECT_EQ(claims, sys.contains(p, x) ? 1u : 0u);
    }
  }
}

TEST(DyadicLocate, CentresAndNesting) {
  DyadicSystem sys(DyadicConfig::practical(2, 5));
  sys.realize_to(3);
  for (int k = 1; k <= 3; ++k)
    for (std::size_t i = 0; i < sys.count(k); ++i) {
      const CubeId id{k, static_cast<int>(i + 1)};
      EXPECT_EQ(sys.locate(sys.cube(id).center, k), id);
    }
  for (const BallPoint& x : probe_points(2, 2000, 3)) {
    for (int k = 0; k < 5; ++k) EXPECT_EQ(sys.parent(sys.locate(x, k + 1)), sys.locate(x, k));
  }
}

TEST(DyadicLocate, ConcurrentLocatesAgreeWithSerial) {
  const auto pts = probe_points(2, 4000, 21);
  DyadicSystem shared(DyadicConfig::practical(2, 5));
  std::vector<CubeId> got(pts.size());
  {
    std::vector<std::jthread> ts;
    for (int t = 0; t < 4; ++t)
      ts.emplace_back([&, t] {
        for (std::size_t i = static_cast<std::size_t>(t); i < pts.size(); i += 4) got[i] = shared.locate(pts[i], 5);
      });
  }
  DyadicSystem serial(DyadicConfig::practical(2, 5));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const CubeId a = got[i];
    const CubeId b = serial.locate(pts[i], 5);
    // indices follow realization order; compare centres instead
    EXPECT_EQ(distance(shared.cube(a).center, serial.cube(b).center), 0.0);
  }
}

TEST(DyadicMeasure, RootAndLevelSum) {
  DyadicSystem sys(DyadicConfig::practical(2, 4));
  sys.realize_to(2);
  const MeasureEstimate root = cube_measure(sys, kRoot, 1000, 1);
  EXPECT_EQ(root.value, 1.0);
  EXPECT_EQ(root.std_error, 0.0);
  for (int k = 1; k <= 2; ++k) {
    double sum = 0.0, var = 0.0;
    for (std::size_t i = 0; i < sys.count(k); ++i) {
      const CubeId id{k, static_cast<int>(i + 1)};
      const MeasureEstimate e = cube_measure(sys, id, 20000, 9);
      EXPECT_FALSE(e.warning);
      sum += e.value;
      var += e.std_error * e.std_error;
      // largest Euclidean ball inside B(c, r) and the unit ball
      const BallPoint c = sys.cube(id).center;
      const double r = sys.inner_radius(k);
      const double lower = std::pow(std::min(r, 0.5 * (r + 1.0 - c.norm())), 2);
      EXPECT_GE(e.value + 3.0 * e.std_error, lower) << k << "," << i + 1;
    }
    EXPECT_NEAR(sum, 1.0, 3.0 * std::sqrt(var)) << "level " << k;
  }
}

TEST(DyadicMeasure, HistogramMatchesMeasures) {
  DyadicSystem sys(DyadicConfig::practical(2, 4));
  sys.realize_to(2);
  const std::size_t n_pts = 10000;
  SamplerConfig cfg;
  const auto pts = sample_ball(cfg, 2, n_pts, 123);
  std::vector<double> hist(sys.count(2), 0.0);
  for (const BallPoint& x : pts) hist[static_cast<std::size_t>(sys.find(x, 2).index - 1)] += 1.0;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    const MeasureEstimate e = cube_measure(sys, {2, static_cast<int>(i + 1)}, 40000, 4);
    const double p = hist[i] / n_pts;
    const double se = std::sqrt(e.value * (1.0 - e.value) / n_pts + e.std_error * e.std_error);
    EXPECT_NEAR(p, e.value, 3.0 * se) << "cube " << i + 1;
  }
}

TEST(DyadicMeasure, ChildRatioStableUnderDoubling) {
  DyadicSystem sys(DyadicConfig::practical(2, 4));
  sys.realize_to(4);
  const ChildRatioReport a = child_ratio_constant(sys, 4, 20000, 1);
  const ChildRatioReport b = child_ratio_constant(sys, 4, 40000, 1);
  ASSERT_FALSE(a.warning);
  ASSERT_FALSE(b.warning);
  EXPECT_GT(a.value, 1.0);
  EXPECT_TRUE(std::isfinite(a.value));
  EXPECT_LT(std::abs(a.value - b.value) / b.value, 0.10);
  EXPECT_GT(a.pairs, sys.count(1));
}

TEST(DyadicMeasure, SingleParentListGivesAtLeastOne) {
  DyadicSystem sys(DyadicConfig::practical(2, 2));
  const ChildRatioReport none = child_ratio_constant(sys, std::vector<CubeId>{}, 100, 1);
  EXPECT_EQ(none.value, 1.0);
  const ChildRatioReport root = child_ratio_constant(sys, std::vector<CubeId>{kRoot}, 20000, 1);
  EXPECT_GE(root.value, 1.0);
}

TEST(DyadicSnapshot, RoundTripAndDeterminism) {
  DyadicSystem a(DyadicConfig::practical(2, 4));
  a.realize_to(4);
  DyadicSystem b(DyadicConfig::practical(2, 4));
  b.realize_to(4);
  const std::string text = a.snapshot();
  EXPECT_EQ(text, b.snapshot());
  const DyadicSystem c = DyadicSystem::from_snapshot(text);
  EXPECT_EQ(c.snapshot(), text);
  for (const BallPoint& x : probe_points(2, 500, 8)) EXPECT_EQ(a.find(x, 4), c.find(x, 4));
}

TEST(DyadicSnapshot, CorruptionIsDetected) {
  DyadicSystem a(DyadicConfig::practical(2, 3));
  a.realize_to(2);
  std::string text = a.snapshot();
  EXPECT_THROW(DyadicSystem::from_snapshot(text.substr(0, text.size() / 2)), Error);
  std::string junk = text;
  junk.replace(junk.find("level 2"), 7, "level 9");
  EXPECT_THROW(DyadicSystem::from_snapshot(junk), Error);
  // move one level-2 centre into a different cube
  std::string moved = text;
  const auto at = moved.find("\n1 ", moved.find("level 2"));
  const auto eol = moved.find('\n', at + 1);
  moved.replace(at + 1, eol - at - 1, "1 1 0.1 -0.9 0");
  EXPECT_THROW(DyadicSystem::from_snapshot(moved), Error);
}

TEST(DyadicVerify, PracticalTripleDepthFour) {
  DyadicSystem sys(DyadicConfig::practical(2, 4));
  sys.realize_to(4);
  const DyadicVerification v = verify(sys, probe_points(2, 20000, 41), 64, 3);
  EXPECT_TRUE(v.partition_ok());
  EXPECT_TRUE(v.nesting_ok());
  EXPECT_TRUE(v.separation_ok());
  EXPECT_TRUE(v.sandwich_ok()) << v.inner_violations << " " << v.outer_violations;
  EXPECT_EQ(v.located_per_level[4], 20000u);
  EXPECT_GE(v.min_separation_ratio, 1.0);
  EXPECT_LE(v.max_outer_ratio, 1.0);
}

TEST(DyadicVerify, ThreeDimensions) {
  DyadicSystem sys(DyadicConfig::practical(3, 3));
  sys.realize_to(3);
  const DyadicVerification v = verify(sys, probe_points(3, 5000, 43), 16, 3);
  EXPECT_TRUE(v.ok()) << v.partition_rejects << " " << v.nesting_violations << " " << v.separation_violations << " "
                      << v.inner_violations << " " << v.outer_violations;
}
