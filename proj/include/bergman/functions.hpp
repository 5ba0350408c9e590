#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bergman/geometry.hpp"
#include "bergman/quadrature.hpp"

namespace bergman {

// Euclidean ball in R^n (may protrude past the unit sphere).
struct SupportBall {
  Vec center;
  double radius = 0.0;
};

// An L^1 function on the ball with enough structure for efficient sampling:
// when `support` is non-empty the function vanishes outside its union.
struct IntegrableFunction {
  std::string family;  // constant, spike, sum-of-spikes, smooth-bump, radial-table, zero
  std::string label;   // parameter summary for reports
  int dim = 2;
  BallFunction value;
  std::vector<SupportBall> support;

  double l1_norm = 0.0;
  double l1_std_error = 0.0;
  bool l1_exact = false;
  std::string l1_estimator;  // how l1_norm was obtained
  std::uint64_t l1_seed = 0;

  std::optional<double> sup_abs;  // sup |f| when known
  std::optional<double> l2_sq;     // ||f||_2^2 when known exactly

  bool whole_ball() const { return support.empty(); }
  complex operator()(const BallPoint& x) const { return value(x); }
};

struct SpikeSpec {
  Vec center;
  double radius = 0.0;
  complex height = 1.0;
};

IntegrableFunction zero_function(int n);
IntegrableFunction constant_function(int n, complex c);
// height * indicator of B(center, radius) intersected with the unit ball.
IntegrableFunction spike(const SpikeSpec& s, const SamplerConfig& cfg = {});
IntegrableFunction sum_of_spikes(const std::vector<SpikeSpec>& parts, const SamplerConfig& cfg = {});
// height * exp(1 - 1/(1 - |x-c|^2/r^2)) inside B(c, r).
IntegrableFunction smooth_bump(const Vec& center, double radius, complex height, const SamplerConfig& cfg = {});
// Piecewise-constant radial profile: values[i] on radii[i-1] <= |x| < radii[i]
// (radii[-1] = 0); zero beyond the last radius.
IntegrableFunction radial_table(int n, const std::vector<double>& radii, const std::vector<complex>& values);

// Multiplicity of x in the support union (1 for whole-ball functions).
int support_multiplicity(const std::vector<SupportBall>& support, const Vec& x);

// Integral over the unit ball of h, assuming h vanishes off the union of
// `support` (whole ball when empty).  Each ball gets `count_per_ball` uniform
// draws; overlaps are handled by dividing by the multiplicity.
Estimate integrate_over_support(const std::vector<SupportBall>& support, int n, const BallFunction& h,
                                const SamplerConfig& cfg, std::size_t count_per_ball, std::uint64_t stream);

// Monte Carlo ||f||_1 (recorded on f) when no exact value is available.
void estimate_l1(IntegrableFunction& f, const SamplerConfig& cfg, std::size_t count_per_ball);

}  // namespace bergman
