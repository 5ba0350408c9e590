#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bergman/czd.hpp"
#include "bergman/kernels.hpp"

namespace bergman {

enum class Integrator { monte_carlo, product_rule };

struct ProjectOptions {
  Integrator integrator = Integrator::monte_carlo;
  std::size_t samples = 2000;   // inner draws per evaluation point
  double local_fraction = 0.5;  // share of draws from a ball around x
  // per-doubling stderr shrink factor above which an integral is suspected
  // divergent (finite variance gives 2^-1/2)
  double divergence_ratio = 0.8408964152537145;
  int radial_nodes = 64;  // product rule (n = 2, whole-ball functions)
  int angular_nodes = 128;
};

struct Projection {
  complex value = 0.0;
  double std_error = 0.0;
  long samples = 0;
  // stderr shrank by less than divergence_ratio per doubling over N/8 -> N
  // and again over N -> 8N (or the mean jumped by more than 4 stderr), or a
  // draw was non-finite; value is then not an estimate
  bool divergent = false;
};

// (Pf)(x) = int f(y) conj(K(x, y)) dnu(y).  Monte Carlo draws mix the
// support of f with balls around x of radii r 2^k up to 2, where
// r = max(1e-6, min(1, 2(1-|x|))).
// Whole-ball functions under a kernel reproducing constants integrate
// f(y) - f(x) and add f(x) back.
Projection project(const Kernel& K, const IntegrableFunction& f, const BallPoint& x, const SamplerConfig& cfg,
                   const ProjectOptions& opt = {}, std::uint64_t stream = 0);

struct DistributionProfile {
  std::vector<double> thresholds;
  std::vector<double> lambda;  // nu{|h| > t}
  std::vector<double> lambda_se;
  double l1_norm = 0.0;  // int |h| on the same sample
  double l1_se = 0.0;
  long samples = 0;
};

// Profile of sampled moduli |h(x_i)| at ascending thresholds.
DistributionProfile distribution_from_values(const std::vector<double>& moduli, const std::vector<double>& thresholds);
DistributionProfile distribution_function(const BallFunction& h, int n, const std::vector<double>& thresholds,
                                          const SamplerConfig& cfg, std::size_t count, std::uint64_t stream = 0);

// sup over all t > 0 of t nu{|h| > t} for the empirical distribution, with
// the threshold approaching the sup from below.
struct WeakSup {
  double value = 0.0;
  double argmax_t = 0.0;
};
WeakSup weak_sup(const std::vector<double>& moduli);

// Log-spaced grid of `count` thresholds over [lo, hi].
std::vector<double> log_grid(double lo, double hi, int count);

struct ScanOptions {
  std::size_t outer = 4000;  // evaluation points (low-discrepancy)
  ProjectOptions inner;
};

// |Pf| at the scan's outer points; the points are returned alongside.
struct ProjectedSample {
  std::vector<BallPoint> points;
  std::vector<complex> values;
  std::vector<double> std_errors;
  std::size_t divergent = 0;
};
ProjectedSample project_on_points(const Kernel& K, const IntegrableFunction& f, const SamplerConfig& cfg,
                                  const ScanOptions& opt, std::uint64_t stream);

struct WeakTypeMember {
  double parameter = 0.0;
  std::string label;
  double l1_norm = 0.0;
  double sup_ratio = 0.0;  // sup_t t lambda(t) / ||f||_1
  double argmax_t = 0.0;
  double pf_l1 = 0.0;  // int |Pf| on the outer sample
  double pf_l1_se = 0.0;
  DistributionProfile profile;
  std::size_t markov_violations = 0;     // t lambda(t) > int |Pf| + 3 se
  std::size_t small_t_violations = 0;    // t <= ||f||_1 with lambda(t) > 1 or lambda(t) > ||f||_1 / t
  std::size_t divergent_points = 0;
};

struct WeakTypeReport {
  std::string family;
  std::vector<WeakTypeMember> members;
  double trend = 0.0;  // last sup / first sup
  bool finite() const;
};

WeakTypeReport weak_type_scan(const Kernel& K, const std::string& family, const std::vector<IntegrableFunction>& members,
                              const std::vector<double>& parameters, const std::vector<double>& t_grid,
                              const SamplerConfig& cfg, const ScanOptions& opt);

struct Weak22Result {
  double l2_in = 0.0;
  double l2_out = 0.0;
  double l2_out_se = 0.0;
  bool pass = false;
};

// ||Pf||_2 against ||f||_2.  |Pf(x)|^2 is estimated without bias by
// Re(A conj(B)) from two independent inner estimates A, B.
Weak22Result weak22_check(const Kernel& K, const IntegrableFunction& f, const SamplerConfig& cfg,
                          const ScanOptions& opt);

// Hormander integral for a cube's ball B(c_Q, kappa1 eta^k) at a point y
// of the cube, against c2 times the tail bound at d = |y - c_Q|.  y is found
// by rejection; nullopt when no draw lands in the cube.
struct HormanderProbe {
  CubeId cube;
  BallPoint y;
  double radius = 0.0;
  double integral = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  long samples = 0;
  bool pass = false;  // integral <= bound + 3 stderr
};
std::optional<HormanderProbe> hormander_cube_probe(const Kernel& K, const DyadicSystem& sys, CubeId id, double c2,
                                                   const SamplerConfig& cfg, std::size_t samples, std::size_t probe);

struct StageRow {
  std::string stage;
  double lhs = 0.0;
  double lhs_se = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  bool pass = false;
};

inline ScanOptions pipeline_scan() {
  ScanOptions s;
  s.outer = 2000;
  s.inner.samples = 1000;
  return s;
}

struct PipelineOptions {
  CzdOptions czd;
  ScanOptions scan = pipeline_scan();
  std::size_t gradient_pairs = 200000;
  std::size_t hormander_samples = 20000;
  std::size_t hormander_cubes = 24;  // stopping cubes probed (evenly spread)
  std::size_t hormander_probes = 2;  // points per probed cube
  std::size_t measure_samples = 20000;
  int grid_points = 9;
};

struct PipelineReport {
  double t = 0.0;
  double l1_norm = 0.0;
  std::size_t stopping_cubes = 0;
  double c1 = 1.0;
  double c1_se = 0.0;
  double c2_gradient = 0.0;
  double c3_hat = 0.0;       // t nu(Omega') / ||f||_1
  double c3_dilation = 0.0;  // max_j nu(B_j) / nu(Q_j)
  double c4_hat = 0.0;       // largest probed Hormander integral
  double c_total = 0.0;      // 4(C1+1) + 2 C4 (1+C1) + C3
  double omega = 0.0;
  double omega_prime = 0.0;
  double g_l2_sq = 0.0;
  double b_l1 = 0.0;
  double pb_outside_l1 = 0.0;
  double lambda_pf = 0.0;       // at t
  double lambda_pg_half = 0.0;  // at t/2
  double lambda_pb_half = 0.0;  // at t/2
  double final_ratio = 0.0;     // t lambda_pf / ||f||_1
  std::vector<double> grid;
  std::vector<StageRow> stages;
  std::size_t divergent_points = 0;

  bool pass() const;
};

// Every inequality in the chain from the decomposition at level t to the
// weak-type bound for Pf, each as a stage row.
PipelineReport cz_pipeline_check(const Kernel& K, const IntegrableFunction& f, double t, DyadicSystem& sys,
                                 const SamplerConfig& cfg, const PipelineOptions& opt = {});

// The good and bad parts as integrable functions (sampling supports included).
IntegrableFunction good_part_function(const GoodBadSplit& split);
IntegrableFunction bad_part_function(const GoodBadSplit& split);

}  // namespace bergman
