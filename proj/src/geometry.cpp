#include "bergman/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bergman {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid input";
    case ErrorKind::unsupported: return "unsupported operation";
    case ErrorKind::config: return "invalid configuration";
    case ErrorKind::precondition: return "precondition violated";
    case ErrorKind::depth: return "depth exceeded";
    case ErrorKind::construction: return "construction failed";
    case ErrorKind::estimation: return "estimation failed";
    case ErrorKind::kernel_evaluation: return "kernel evaluation failed";
    case ErrorKind::truncation: return "series truncation insufficient";
    case ErrorKind::divergence: return "integral divergent";
  }
  return "error";
}

Vec::Vec(std::initializer_list<double> xs) : n(static_cast<int>(xs.size())) {
  require(n >= 1 && n <= kMaxDimension, ErrorKind::invalid_input, "dimension must be in [1, 5]");
  std::copy(xs.begin(), xs.end(), c.begin());
}

double Vec::norm_sq() const {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += c[i] * c[i];
  return s;
}

double Vec::norm() const { return std::sqrt(norm_sq()); }

Vec operator+(const Vec& a, const Vec& b) {
  Vec r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = a[i] + b[i];
  return r;
}

Vec operator-(const Vec& a, const Vec& b) {
  Vec r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = a[i] - b[i];
  return r;
}

Vec operator*(double s, const Vec& a) {
  Vec r(a.n);
  for (int i = 0; i < a.n; ++i) r[i] = s * a[i];
  return r;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.n; ++i) s += a[i] * b[i];
  return s;
}

double distance_sq(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

double distance(const Vec& a, const Vec& b) { return std::sqrt(distance_sq(a, b)); }

BallPoint::BallPoint(const Vec& v) : v_(v), norm_sq_(v.norm_sq()) {
  require(v.n >= 1 && v.n <= kMaxDimension, ErrorKind::invalid_input, "dimension must be in [1, 5]");
  for (int i = 0; i < v.n; ++i)
    require(std::isfinite(v[i]), ErrorKind::invalid_input, "non-finite coordinate");
  if (!(norm_sq_ < 1.0)) {
    std::ostringstream os;
    os << "point with |x| = " << std::sqrt(norm_sq_) << " is not interior to the unit ball";
    fail(ErrorKind::invalid_input, os.str());
  }
}

BallPoint BallPoint::origin(int n) { return BallPoint(Vec(n)); }

BallPoint BallPoint::unchecked(const Vec& v, double norm_sq) {
  BallPoint p;
  p.v_ = v;
  p.norm_sq_ = norm_sq;
  return p;
}

std::optional<BallPoint> BallPoint::try_make(const Vec& v) {
  const double s = v.norm_sq();
  if (!(s < 1.0)) return std::nullopt;
  return unchecked(v, s);
}

double BallPoint::norm() const { return std::sqrt(norm_sq_); }

double distance(const BallPoint& a, const BallPoint& b) { return distance(a.vec(), b.vec()); }

BallPoint mobius(const BallPoint& a, const BallPoint& x) {
  require(a.dim() == x.dim(), ErrorKind::invalid_input, "mobius: dimension mismatch");
  const Vec diff = x.vec() - a.vec();
  const double d2 = diff.norm_sq();
  const double sa = 1.0 - a.norm_sq();
  const double denom = d2 + sa * (1.0 - x.norm_sq());
  Vec r(a.dim());
  for (int i = 0; i < a.dim(); ++i) r[i] = (a[i] * d2 - sa * diff[i]) / denom;
  for (int i = 0; i < r.n; ++i)
    require(std::isfinite(r[i]), ErrorKind::invalid_input, "mobius: non-finite result");
  // |phi_a(x)| < 1 holds exactly for interior inputs; rounding can only push
  // points that are already within one ulp of the sphere.
  double s = r.norm_sq();
  if (s >= 1.0) {
    const double scale = std::nextafter(1.0, 0.0) / std::sqrt(s);
    r = scale * r;
    s = r.norm_sq();
  }
  return BallPoint::unchecked(r, s);
}

double quasi_metric(const BallPoint& x, const BallPoint& y) {
  require(x.dim() == y.dim(), ErrorKind::invalid_input, "quasi_metric: dimension mismatch");
  const double d2 = distance_sq(x.vec(), y.vec());
  return std::sqrt(d2 + (1.0 - x.norm_sq()) * (1.0 - y.norm_sq()));
}

double measure_ball_at_origin(int n, double r) {
  require(n >= 1, ErrorKind::invalid_input, "dimension must be positive");
  require(r >= 0.0 && r <= 1.0, ErrorKind::invalid_input, "radius must lie in [0, 1]");
  return std::pow(r, n);
}

complex hyperbolic_laplacian(const SmoothFunction& f, const BallPoint& a) {
  if (!f.gradient || !f.laplacian)
    fail(ErrorKind::unsupported, "hyperbolic_laplacian needs gradient and laplacian");
  const int n = a.dim();
  const double s = 1.0 - a.norm_sq();
  const std::vector<complex> g = f.gradient(a);
  require(static_cast<int>(g.size()) == n, ErrorKind::invalid_input, "gradient has wrong length");
  complex drift = 0.0;
  for (int i = 0; i < n; ++i) drift += a[i] * g[static_cast<std::size_t>(i)];
  return s * s * f.laplacian(a) + 2.0 * (n - 2) * s * drift;
}

complex hyperbolic_laplacian_fd(const SmoothFunction& f, const BallPoint& a, double h) {
  require(static_cast<bool>(f.value), ErrorKind::invalid_input, "function value missing");
  require(h > 0.0 && h < 0.5, ErrorKind::invalid_input, "finite-difference step must lie in (0, 0.5)");
  const int n = a.dim();
  const complex centre = f.value(mobius(a, BallPoint::origin(n)));
  complex acc = 0.0;
  for (int i = 0; i < n; ++i) {
    Vec e(n);
    e[i] = h;
    const complex plus = f.value(mobius(a, BallPoint(e)));
    e[i] = -h;
    const complex minus = f.value(mobius(a, BallPoint(e)));
    acc += plus + minus - 2.0 * centre;
  }
  return acc / (h * h);
}

complex hyperbolic_laplacian_richardson(const SmoothFunction& f, const BallPoint& a, double h) {
  return (4.0 * hyperbolic_laplacian_fd(f, a, 0.5 * h) - hyperbolic_laplacian_fd(f, a, h)) / 3.0;
}

}  // namespace bergman
