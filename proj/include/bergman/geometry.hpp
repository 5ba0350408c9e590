#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <vector>

#include "bergman/errors.hpp"

namespace bergman {

using complex = std::complex<double>;

inline constexpr int kMaxDimension = 5;

// Raw coordinate storage shared by BallPoint and unconstrained vectors
// (gradients, displacements, points that may leave the ball).
struct Vec {
  std::array<double, kMaxDimension> c{};
  int n = 0;

  Vec() = default;
  explicit Vec(int dim) : n(dim) {}
  Vec(std::initializer_list<double> xs);

  double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  std::span<const double> coords() const { return {c.data(), static_cast<std::size_t>(n)}; }

  double norm_sq() const;
  double norm() const;
};

Vec operator+(const Vec& a, const Vec& b);
Vec operator-(const Vec& a, const Vec& b);
Vec operator*(double s, const Vec& a);
double dot(const Vec& a, const Vec& b);
double distance(const Vec& a, const Vec& b);
double distance_sq(const Vec& a, const Vec& b);

// A point of the open unit ball with |x|^2 cached.  Construction rejects
// non-finite coordinates and points with |x| >= 1.
class BallPoint {
 public:
  BallPoint() = default;
  explicit BallPoint(const Vec& v);
  BallPoint(std::initializer_list<double> xs) : BallPoint(Vec(xs)) {}

  static BallPoint origin(int n);
  // No validation; for hot loops that already know |v| < 1.
  static BallPoint unchecked(const Vec& v, double norm_sq);
  static std::optional<BallPoint> try_make(const Vec& v);

  int dim() const { return v_.n; }
  double operator[](int i) const { return v_[i]; }
  const Vec& vec() const { return v_; }
  std::span<const double> coords() const { return v_.coords(); }
  double norm_sq() const { return norm_sq_; }
  double norm() const;

 private:
  Vec v_;
  double norm_sq_ = 0.0;
};

double distance(const BallPoint& a, const BallPoint& b);

// phi_a(x) = (a|x-a|^2 + (1-|a|^2)(a-x)) / (|x-a|^2 + (1-|a|^2)(1-|x|^2)),
// the involution of the ball exchanging a and 0.
BallPoint mobius(const BallPoint& a, const BallPoint& x);

// [x,y] = sqrt(|x-y|^2 + (1-|x|^2)(1-|y|^2)).
double quasi_metric(const BallPoint& x, const BallPoint& y);

// nu(B(0,r)) = r^n for the normalized Lebesgue measure.
double measure_ball_at_origin(int n, double r);

// Normalized measure of a full Euclidean ball of radius r (may protrude past
// the unit sphere); equal to r^n.
inline double ball_volume(int n, double r) { return std::pow(r, n); }

struct SmoothFunction {
  int dim = 2;
  std::function<complex(const BallPoint&)> value;
  // Euclidean gradient, one complex partial per coordinate.
  std::function<std::vector<complex>(const BallPoint&)> gradient;
  std::function<complex(const BallPoint&)> laplacian;
};

// (1-|a|^2)^2 Lap f(a) + 2(n-2)(1-|a|^2) <a, grad f(a)>.
complex hyperbolic_laplacian(const SmoothFunction& f, const BallPoint& a);

// Second-order central difference of Lap(f o phi_a)(0) with step h.
complex hyperbolic_laplacian_fd(const SmoothFunction& f, const BallPoint& a, double h);

// One Richardson level on top of hyperbolic_laplacian_fd: (4 D(h/2) - D(h)) / 3.
complex hyperbolic_laplacian_richardson(const SmoothFunction& f, const BallPoint& a, double h = 1e-3);

}  // namespace bergman
