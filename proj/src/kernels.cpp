#include "bergman/kernels.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "bergman/rng.hpp"

namespace bergman {

namespace {

constexpr std::uint64_t kScanX = 0x73636e78ULL;
constexpr std::uint64_t kScanY = 0x73636e79ULL;
constexpr std::uint64_t kScanNear = 0x73636e6eULL;
constexpr std::uint64_t kScanPick = 0x73636e70ULL;

complex as_complex(const BallPoint& p) { return {p[0], p[1]}; }

void require_disk(const BallPoint& z, const BallPoint& w) {
  require(z.dim() == 2 && w.dim() == 2, ErrorKind::unsupported, "the disk kernel needs n = 2");
}

double coefficient(int n, int m) { return static_cast<double>(n + 2 * m) / n; }

// Next-term guard near the boundary.
void check_truncation(int n, int M, double rho) {
  if (rho <= 0.999) return;
  const double next = coefficient(n, M + 1) * zonal_dimension(n, M + 1) * std::pow(rho, M + 1);
  if (next >= 1e-8) {
    std::ostringstream os;
    os << "harmonic kernel at |x||y| = " << rho << " needs more than M = " << M << " terms (next term bound "
       << next << ")";
    fail(ErrorKind::truncation, os.str());
  }
}

// Homogeneous zonal polynomials Z_m(x, y) for m = 0..M and, when grad is set,
// their x-gradients; recursion in s = <x,y> and q = |x|^2 |y|^2.
void zonal_series(const BallPoint& x, const BallPoint& y, int M, std::vector<double>& z,
                  std::vector<Vec>* grad) {
  const int n = x.dim();
  const double s = dot(x.vec(), y.vec());
  const double q = x.norm_sq() * y.norm_sq();
  const Vec ds = y.vec();
  const Vec dq = (2.0 * y.norm_sq()) * x.vec();
  std::vector<double> p(static_cast<std::size_t>(M + 1));
  std::vector<Vec> dp(grad ? static_cast<std::size_t>(M + 1) : 0, Vec(n));
  p[0] = 1.0;
  if (n == 2) {
    // rho^m T_m(s/rho)
    if (M >= 1) {
      p[1] = s;
      if (grad) dp[1] = ds;
    }
    for (int m = 2; m <= M; ++m) {
      const auto k = static_cast<std::size_t>(m);
      p[k] = 2.0 * s * p[k - 1] - q * p[k - 2];
      if (grad) dp[k] = (2.0 * p[k - 1]) * ds + (2.0 * s) * dp[k - 1] - p[k - 2] * dq - q * dp[k - 2];
    }
  } else {
    // rho^m C_m^lambda(s/rho)
    const double lam = 0.5 * (n - 2);
    if (M >= 1) {
      p[1] = 2.0 * lam * s;
      if (grad) dp[1] = (2.0 * lam) * ds;
    }
    for (int m = 2; m <= M; ++m) {
      const auto k = static_cast<std::size_t>(m);
      const double a = 2.0 * (m + lam - 1.0) / m;
      const double b = (m + 2.0 * lam - 2.0) / m;
      p[k] = a * s * p[k - 1] - b * q * p[k - 2];
      if (grad) dp[k] = (a * p[k - 1]) * ds + (a * s) * dp[k - 1] - (b * p[k - 2]) * dq - (b * q) * dp[k - 2];
    }
  }
  z.assign(static_cast<std::size_t>(M + 1), 0.0);
  if (grad) grad->assign(static_cast<std::size_t>(M + 1), Vec(n));
  for (int m = 0; m <= M; ++m) {
    const auto k = static_cast<std::size_t>(m);
    double scale = 1.0;
    if (m > 0) scale = n == 2 ? 2.0 : (2.0 * m + n - 2.0) / (n - 2.0);
    z[k] = scale * p[k];
    if (grad) (*grad)[k] = scale * dp[k];
  }
}

}  // namespace

complex disk_kernel(const BallPoint& z, const BallPoint& w) {
  require_disk(z, w);
  const complex d = 1.0 - std::conj(as_complex(z)) * as_complex(w);
  return 1.0 / (d * d);
}

std::vector<complex> disk_kernel_grad(const BallPoint& z, const BallPoint& w) {
  require_disk(z, w);
  const complex wc = as_complex(w);
  const complex d = 1.0 - std::conj(as_complex(z)) * wc;
  const complex g = 2.0 * wc / (d * d * d);
  return {g, complex(0.0, -1.0) * g};
}

double zonal_dimension(int n, int m) {
  if (m == 0) return 1.0;
  if (n == 2) return 2.0;
  // (2m+n-2)/(n-2) * binom(m+n-3, n-3)
  double binom = 1.0;
  for (int i = 1; i <= n - 3; ++i) binom *= static_cast<double>(m + i) / i;
  return (2.0 * m + n - 2.0) / (n - 2.0) * binom;
}

double harmonic_tail_bound(int n, int M, double rho) {
  if (rho >= 1.0) return std::numeric_limits<double>::infinity();
  if (rho <= 0.0) return 0.0;
  double sum = 0.0;
  for (int m = M + 1;; ++m) {
    const double term = coefficient(n, m) * zonal_dimension(n, m) * std::pow(rho, m);
    sum += term;
    if (term <= 1e-17 * sum && m > M + 8) break;
    if (m > M + 1000000) return std::numeric_limits<double>::infinity();
  }
  return sum;
}

double harmonic_ball_kernel(const BallPoint& x, const BallPoint& y, int M) {
  require(M >= 0, ErrorKind::invalid_input, "truncation order must be >= 0");
  require(x.dim() == y.dim(), ErrorKind::invalid_input, "kernel arguments differ in dimension");
  const int n = x.dim();
  check_truncation(n, M, std::sqrt(x.norm_sq() * y.norm_sq()));
  std::vector<double> z;
  zonal_series(x, y, M, z, nullptr);
  double sum = 0.0;
  for (int m = 0; m <= M; ++m) sum += coefficient(n, m) * z[static_cast<std::size_t>(m)];
  return sum;
}

std::vector<complex> harmonic_ball_kernel_grad(const BallPoint& x, const BallPoint& y, int M) {
  require(M >= 0, ErrorKind::invalid_input, "truncation order must be >= 0");
  const int n = x.dim();
  check_truncation(n, M, std::sqrt(x.norm_sq() * y.norm_sq()));
  std::vector<double> z;
  std::vector<Vec> g;
  zonal_series(x, y, M, z, &g);
  std::vector<complex> out(static_cast<std::size_t>(n), 0.0);
  for (int m = 0; m <= M; ++m)
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] += coefficient(n, m) * g[static_cast<std::size_t>(m)][i];
  return out;
}

Kernel make_disk_kernel() {
  Kernel k;
  k.name = "disk";
  k.reproduces_constants = true;
  k.dim = 2;
  k.eval = disk_kernel;
  k.grad_x = disk_kernel_grad;
  return k;
}

Kernel make_harmonic_kernel(int n, int M) {
  require(n >= 2 && n <= kMaxDimension, ErrorKind::invalid_input, "unsupported dimension for the harmonic kernel");
  require(M >= 0, ErrorKind::invalid_input, "truncation order must be >= 0");
  Kernel k;
  k.name = "harmonic";
  k.reproduces_constants = true;
  k.dim = n;
  k.truncation = M;
  k.eval = [M](const BallPoint& x, const BallPoint& y) { return complex(harmonic_ball_kernel(x, y, M)); };
  k.grad_x = [M](const BallPoint& x, const BallPoint& y) { return harmonic_ball_kernel_grad(x, y, M); };
  // keeps |x||y| <= 0.999 so the truncation guard never fires during scans
  k.radius_cap = std::sqrt(0.999);
  return k;
}

Kernel make_constant_kernel(int n) {
  Kernel k;
  k.name = "constant";
  k.reproduces_constants = true;
  k.dim = n;
  k.eval = [](const BallPoint&, const BallPoint&) { return complex(1.0); };
  k.grad_x = [n](const BallPoint&, const BallPoint&) { return std::vector<complex>(static_cast<std::size_t>(n), 0.0); };
  return k;
}

Kernel make_kernel(const std::string& name, int n, int M) {
  if (name == "disk") {
    require(n == 2, ErrorKind::config, "the disk kernel needs dimension 2");
    return make_disk_kernel();
  }
  if (name == "harmonic") return make_harmonic_kernel(n, M);
  if (name == "constant") return make_constant_kernel(n);
  if (name == "h-harmonic-series") fail(ErrorKind::unsupported, "kernel 'h-harmonic-series' has no implementation");
  fail(ErrorKind::config, "unknown kernel '" + name + "'");
}

std::vector<complex> kernel_gradient(const Kernel& K, const BallPoint& x, const BallPoint& y) {
  if (K.grad_x) return K.grad_x(x, y);
  const int n = x.dim();
  const double h = std::min(1e-4, (1.0 - x.norm()) / 10.0);
  std::vector<complex> g(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Vec a = x.vec(), b = x.vec();
    a[i] += h;
    b[i] -= h;
    g[static_cast<std::size_t>(i)] = (K.eval(BallPoint(a), y) - K.eval(BallPoint(b), y)) / (2.0 * h);
  }
  return g;
}

std::vector<complex> kernel_gradient_y(const Kernel& K, const BallPoint& x, const BallPoint& y) {
  std::vector<complex> g = kernel_gradient(K, y, x);
  for (complex& c : g) c = std::conj(c);
  return g;
}

double gradient_norm(const std::vector<complex>& partials) {
  double a = 0.0, b = 0.0, c = 0.0;
  for (const complex& p : partials) {
    a += p.real() * p.real();
    b += p.imag() * p.imag();
    c += p.real() * p.imag();
  }
  const double half = 0.5 * (a - b);
  return std::sqrt(0.5 * (a + b) + std::sqrt(half * half + c * c));
}

std::pair<BallPoint, BallPoint> scan_pair(const Kernel& K, const SamplerConfig& cfg, double near_diagonal_fraction,
                                          std::uint64_t i) {
  const int n = K.dim;
  const double cap = K.radius_cap;
  const Vec origin(n);
  auto biased = [&](std::uint64_t stream) {
    const Vec v = sample_in_ball(origin, 1.0, Scheme::pseudo_random, cfg.seed, stream, i);
    const double r = v.norm();
    const double u = std::pow(r, n);  // uniform on [0, 1), independent of the direction
    const double radius = cap * (1.0 - u * u);
    return BallPoint((radius / r) * v);
  };
  const BallPoint x = biased(kScanX);
  if (counter_uniform(cfg.seed, kScanPick, i, 0) >= near_diagonal_fraction) return {x, biased(kScanY)};
  const Vec w = sample_in_ball(origin, 1.0, Scheme::pseudo_random, cfg.seed, kScanNear, i);
  const double wr = w.norm();
  double delta = 2.0 * (cap - x.norm()) * std::pow(wr, n);
  for (int tries = 0; tries < 64; ++tries, delta *= 0.5) {
    const Vec y = x.vec() + (delta / wr) * w;
    if (y.norm() < cap) return {x, BallPoint(y)};
  }
  return {x, x};
}

namespace {

BoundReport sup_scan(const Kernel& K, const SamplerConfig& cfg, const KernelScanOptions& opt, const char* quantity,
                     const std::function<double(const BallPoint&, const BallPoint&)>& weighted) {
  cfg.validate();
  require(opt.pairs >= 2, ErrorKind::invalid_input, "a bound scan needs at least two pairs");
  const std::size_t half = opt.pairs / 2;
  struct Best {
    double full = -1.0, half = -1.0;
    std::uint64_t full_i = 0;
  };
  const std::size_t chunk = static_cast<std::size_t>(cfg.batch);
  std::vector<Best> parts((opt.pairs + chunk - 1) / chunk);
  parallel_chunks(opt.pairs, chunk, cfg.workers, [&](std::size_t c, std::size_t b, std::size_t e) {
    Best best;
    for (std::size_t i = b; i < e; ++i) {
      const auto [x, y] = scan_pair(K, cfg, opt.near_diagonal_fraction, i);
      const double v = weighted(x, y);
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os.precision(17);
        os << K.name << " " << quantity << " is not finite at pair " << i << " x=(";
        for (int d = 0; d < x.dim(); ++d) os << (d ? "," : "") << x[d];
        os << ") y=(";
        for (int d = 0; d < y.dim(); ++d) os << (d ? "," : "") << y[d];
        os << ")";
        fail(ErrorKind::kernel_evaluation, os.str());
      }
      if (v > best.full) {
        best.full = v;
        best.full_i = i;
      }
      if (i < half) best.half = std::max(best.half, v);
    }
    parts[c] = best;
  });
  Best total;
  for (const Best& p : parts) {
    if (p.full > total.full) {
      total.full = p.full;
      total.full_i = p.full_i;
    }
    total.half = std::max(total.half, p.half);
  }
  BoundReport r;
  r.kernel = K.name;
  r.quantity = quantity;
  r.constant_estimate = total.full;
  r.half_estimate = total.half;
  r.sample_count = static_cast<long>(opt.pairs);
  r.stability = total.full > 0.0 ? (total.full - total.half) / total.full : 0.0;
  const auto worst = scan_pair(K, cfg, opt.near_diagonal_fraction, total.full_i);
  r.worst_x = worst.first;
  r.worst_y = worst.second;
  r.seed = cfg.seed;
  return r;
}

}  // namespace

BoundReport kernel_size_constant(const Kernel& K, const SamplerConfig& cfg, const KernelScanOptions& opt) {
  const int n = K.dim;
  return sup_scan(K, cfg, opt, "size", [&](const BallPoint& x, const BallPoint& y) {
    return std::abs(K.eval(x, y)) * std::pow(quasi_metric(x, y), n);
  });
}

BoundReport kernel_gradient_constant(const Kernel& K, const SamplerConfig& cfg, const KernelScanOptions& opt) {
  const int n = K.dim;
  return sup_scan(K, cfg, opt, "gradient", [&](const BallPoint& x, const BallPoint& y) {
    return gradient_norm(kernel_gradient(K, x, y)) * std::pow(quasi_metric(x, y), n + 1);
  });
}

Estimate hormander_integral(const Kernel& K, const BallPoint& yj, double radius, const BallPoint& y,
                            const SamplerConfig& cfg, std::size_t count, std::uint64_t stream) {
  const int n = K.dim;
  require(yj.dim() == n && y.dim() == n, ErrorKind::invalid_input, "cube data and kernel differ in dimension");
  require(radius > 0.0, ErrorKind::invalid_input, "cube radius must be positive");
  const double a = 2.0 * radius;
  const double b = 1.0 + yj.norm();  // farthest point of the ball from yj
  Estimate zero;
  zero.samples = static_cast<long>(count);
  if (a >= b || distance(y, yj) == 0.0) return zero;
  const double span = 1.0 / a - 1.0 / b;
  const Vec origin(n);
  return estimate_mean(
      count, cfg,
      [&](std::size_t i) {
        const Vec v = sample_in_ball(origin, 1.0, cfg.scheme, cfg.seed, hash_combine(stream, 0x686d64ULL), i);
        const double r = v.norm();
        if (r == 0.0) return complex(0.0);
        const double u = std::pow(r, n);
        const double rho = 1.0 / (1.0 / a - u * span);
        const Vec xv = yj.vec() + (rho / r) * v;
        const double q = xv.norm_sq();
        if (q >= 1.0) return complex(0.0);
        const BallPoint x = BallPoint::unchecked(xv, q);
        return complex(std::abs(K.eval(x, y) - K.eval(x, yj)) * n * std::pow(rho, n + 1) * span);
      },
      "hormander integrand");
}

double tail_integral_bound(int n, double d) {
  require(d > 0.0, ErrorKind::invalid_input, "tail bound needs d > 0");
  require(n >= 1, ErrorKind::invalid_input, "tail bound needs n >= 1");
  if (d >= 1.0) return 0.0;
  return std::ldexp(1.0, n) * n * (1.0 - d);
}

}  // namespace bergman
