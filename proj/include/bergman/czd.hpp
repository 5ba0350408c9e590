#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "bergman/dyadic.hpp"
#include "bergman/functions.hpp"

namespace bergman {

struct CzdOptions {
  std::size_t samples = 4000;        // draws per sampling region for a cube average
  std::size_t max_samples = 64000;   // cap for sample doubling on undecided cubes
  double z = 3.0;                    // decision half-width in standard errors
  std::size_t ratio_samples = 20000; // per parent, for the child-ratio constant
  std::uint64_t seed = 7;
  int max_level = -1;                // -1: the system's max_level
};

// Integrals of f and |f| over a cube, its measure, and the derived averages.
struct CubeAverage {
  double measure = 0.0;
  double measure_se = 0.0;
  complex integral = 0.0;  // int_Q f
  double integral_se = 0.0;
  double abs_integral = 0.0;  // int_Q |f|
  double abs_integral_se = 0.0;
  double abs_avg = 0.0;  // (1/nu(Q)) int_Q |f|
  double abs_avg_se = 0.0;
  complex mean = 0.0;  // (1/nu(Q)) int_Q f
  double mean_se = 0.0;
  long samples = 0;
};

CubeAverage cube_average(const DyadicSystem& sys, CubeId id, const IntegrableFunction& f, std::size_t samples,
                         std::uint64_t seed);

struct StoppingCube {
  CubeId id;
  BallPoint center;
  CubeAverage avg;
  double parent_avg = 0.0;  // average of |f| on the parent (the root's is ||f||_1)
  double parent_avg_se = 0.0;
};

struct CZDecomposition {
  double t = 0.0;
  double l1_norm = 0.0;
  std::string function_label;
  int max_level = 0;
  std::vector<StoppingCube> cubes;  // the set G, in descent order
  double omega_measure = 0.0;       // sum of nu(Q_j)
  double omega_se = 0.0;
  double c1_used = 1.0;  // child-ratio constant over the visited (parent, child) pairs
  double c1_se = 0.0;
  bool c1_warning = false;
  std::size_t c1_pairs = 0;
  double truncation_mass = 0.0;  // int |f| over deepest-level leaves left in F
  double truncation_se = 0.0;
  std::size_t visited = 0;    // cubes whose average was estimated
  std::size_t undecided = 0;  // cubes whose interval still straddled t at the sample cap
  bool sup_shortcut = false;  // sup|f| <= t made every cube non-stopping

  // Index into `cubes` of the stopping cube holding x, or -1 when x is in F.
  int stopping_index(const DyadicSystem& sys, const BallPoint& x) const;
  // Depth at which x's walk ended; max_level for deepest leaves.
  int f_depth(const DyadicSystem& sys, const BallPoint& x) const;

  std::unordered_map<std::uint64_t, int> lookup;  // (level, index) -> position in cubes
};

// Stopping-time descent from the virtual root.  Requires t >= ||f||_1.
CZDecomposition decompose(const IntegrableFunction& f, double t, DyadicSystem& sys, const CzdOptions& opt = {});

// g = f on F and the cube mean of f on each Q_j; b_j = (f - mean_j) on Q_j.
class GoodBadSplit {
 public:
  GoodBadSplit(const CZDecomposition& dec, const IntegrableFunction& f, const DyadicSystem& sys);

  complex good(const BallPoint& x) const;
  complex bad(const BallPoint& x) const;
  complex bad_part(std::size_t j, const BallPoint& x) const;
  std::size_t parts() const { return dec_->cubes.size(); }
  const CZDecomposition& decomposition() const { return *dec_; }
  const IntegrableFunction& function() const { return *f_; }
  const DyadicSystem& system() const { return *sys_; }

 private:
  const CZDecomposition* dec_;
  const IntegrableFunction* f_;
  const DyadicSystem* sys_;
};

GoodBadSplit good_bad_split(const CZDecomposition& dec, const IntegrableFunction& f, const DyadicSystem& sys);

struct BoundCheck {
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool pass = false;
};

// ||g||_2^2 against (c1 + 1) t ||f||_1.
BoundCheck good_l2_bound_check(const GoodBadSplit& split, double t, double c1, const SamplerConfig& cfg,
                               std::size_t count_per_ball);
// ||g||_2^2 with its standard error.
RealEstimate good_l2_norm_sq(const GoodBadSplit& split, const SamplerConfig& cfg, std::size_t count_per_ball);

struct OmegaPrime {
  std::vector<SupportBall> balls;  // B(x_j, 2 kappa1 eta^k_j)
  double measure = 0.0;
  double measure_se = 0.0;
  double c3_hat = 0.0;  // t nu(Omega') / ||f||_1
  double c3_se = 0.0;

  bool contains(const BallPoint& x) const;
};

OmegaPrime omega_prime(const CZDecomposition& dec, const DyadicSystem& sys, const SamplerConfig& cfg,
                       std::size_t count_per_ball);

// Clause-by-clause verification of a decomposition.
struct CzdClauseReport {
  std::size_t f_points = 0;             // sample points landing in F
  std::size_t f_points_above_t = 0;     // |f| > t there (allowed only in deepest leaves)
  std::size_t f_points_above_t_shallow = 0;
  std::size_t average_violations = 0;   // average outside (t, c1 t] beyond 3 stderr
  std::size_t maximality_violations = 0;
  std::size_t nesting_violations = 0;
  std::size_t mean_zero_violations = 0;
  double max_mean_zero_z = 0.0;  // largest |int b_j| / stderr
  std::size_t reconstruction_points = 0;
  std::size_t reconstruction_failures = 0;
  double mass_lhs = 0.0;  // nu(Omega)
  double mass_rhs = 0.0;  // ||f||_1 / t
  double mass_se = 0.0;
  bool mass_ok = false;
  double min_avg_ratio = 0.0;  // min over cubes of avg / t
  double max_avg_ratio = 0.0;  // max over cubes of avg / t

  bool ok() const {
    return f_points_above_t_shallow == 0 && average_violations == 0 && maximality_violations == 0 &&
           nesting_violations == 0 && mean_zero_violations == 0 && reconstruction_failures == 0 && mass_ok;
  }
};

CzdClauseReport check_clauses(const GoodBadSplit& split, const SamplerConfig& cfg, std::size_t points,
                              std::size_t mean_zero_samples);

}  // namespace bergman
