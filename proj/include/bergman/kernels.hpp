#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bergman/geometry.hpp"
#include "bergman/quadrature.hpp"

namespace bergman {

using KernelFn = std::function<complex(const BallPoint&, const BallPoint&)>;
// Partials of K(x, y) in the coordinates of x.
using KernelGrad = std::function<std::vector<complex>(const BallPoint&, const BallPoint&)>;

// A reproducing-type kernel K(x, y).  All model kernels are Hermitian,
// K(x, y) = conj(K(y, x)); projection integrates f(y) conj(K(x, y)).
struct Kernel {
  std::string name;
  int dim = 2;
  std::optional<int> truncation;  // series order for truncated kernels
  KernelFn eval;
  KernelGrad grad_x;   // empty: finite-difference fallback
  double radius_cap = 1.0;  // sup scans stay inside |x|, |y| < radius_cap
  bool reproduces_constants = false;  // int conj(K(x, y)) dnu(y) = 1 for every x

  complex operator()(const BallPoint& x, const BallPoint& y) const { return eval(x, y); }
};

// 1/(1 - conj(z) w)^2 with z, w read as complex numbers (n = 2).
complex disk_kernel(const BallPoint& z, const BallPoint& w);
std::vector<complex> disk_kernel_grad(const BallPoint& z, const BallPoint& w);

// Sum over m <= M of (n+2m)/n Z_m(x, y), Z_m the degree-m zonal harmonic for
// the normalized surface measure, scaled by (|x||y|)^m.
double harmonic_ball_kernel(const BallPoint& x, const BallPoint& y, int M);
std::vector<complex> harmonic_ball_kernel_grad(const BallPoint& x, const BallPoint& y, int M);
// Bound on sum over m > M of |(n+2m)/n Z_m(x, y)| at rho = |x||y|.
double harmonic_tail_bound(int n, int M, double rho);
// Dimension of the degree-m spherical harmonics on S^(n-1), i.e. Z_m(1).
double zonal_dimension(int n, int m);

Kernel make_disk_kernel();
Kernel make_harmonic_kernel(int n, int M);
Kernel make_constant_kernel(int n);
// Names: disk, harmonic, constant.  "h-harmonic-series" is a reserved slot
// and reports unsupported.
Kernel make_kernel(const std::string& name, int n, int M);

// Partials of K(., y) at x: analytic when available, else central
// differences with step min(1e-4, (1-|x|)/10).
std::vector<complex> kernel_gradient(const Kernel& K, const BallPoint& x, const BallPoint& y);
// Partials of K(x, .) at y, by Hermitian symmetry.
std::vector<complex> kernel_gradient_y(const Kernel& K, const BallPoint& x, const BallPoint& y);
// Operator norm of the real derivative R^n -> C = R^2 given its complex partials.
double gradient_norm(const std::vector<complex>& partials);

struct BoundReport {
  std::string kernel;
  std::string quantity;  // size, gradient
  double constant_estimate = 0.0;
  double half_estimate = 0.0;  // same scan over the first half of the pairs
  long sample_count = 0;
  double stability = 0.0;  // |full - half| / full
  BallPoint worst_x;
  BallPoint worst_y;
  std::uint64_t seed = 0;
};

struct KernelScanOptions {
  std::size_t pairs = 1000000;
  double near_diagonal_fraction = 0.5;  // pairs with y drawn close to x
};

// sup |K(x,y)| [x,y]^n over boundary-biased pairs.
BoundReport kernel_size_constant(const Kernel& K, const SamplerConfig& cfg, const KernelScanOptions& opt = {});
// sup |grad_x K(x,y)| [x,y]^(n+1) over the same pairs.
BoundReport kernel_gradient_constant(const Kernel& K, const SamplerConfig& cfg, const KernelScanOptions& opt = {});

// The i-th pair of the scan schedule; radii 1 - u^2 scaled by the kernel's cap.
std::pair<BallPoint, BallPoint> scan_pair(const Kernel& K, const SamplerConfig& cfg, double near_diagonal_fraction,
                                          std::uint64_t i);

// int over the ball minus B(yj, 2 radius) of |K(x,y) - K(x,yj)| dnu(x), by
// importance sampling |x - yj| with density proportional to |x - yj|^-2.
Estimate hormander_integral(const Kernel& K, const BallPoint& yj, double radius, const BallPoint& y,
                            const SamplerConfig& cfg, std::size_t count, std::uint64_t stream = 0);

// 2^(n+1) d n int_{2d}^{2} r^-2 dr = 2^n n (1 - d) for 0 < d < 1; 0 for d >= 1.
double tail_integral_bound(int n, double d);

}  // namespace bergman
