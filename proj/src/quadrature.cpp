#include "bergman/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

#include "bergman/rng.hpp"

namespace bergman {

namespace {

double draw(Scheme scheme, std::uint64_t seed, std::uint64_t stream, std::uint64_t index, unsigned comp) {
  return scheme == Scheme::low_discrepancy ? halton_rotated(seed, stream, index, comp)
                                           : counter_uniform(seed, stream, index, comp);
}

// Uniform point of the closed unit ball's interior, as a raw vector.
Vec unit_ball_vec(int n, Scheme scheme, std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  Vec v(n);
  const double u0 = draw(scheme, seed, stream, index, 0);
  if (n == 1) {
    v[0] = 2.0 * u0 - 1.0;
    return v;
  }
  if (n == 2) {
    const double r = std::sqrt(u0);
    const double th = two_pi * draw(scheme, seed, stream, index, 1);
    v[0] = r * std::cos(th);
    v[1] = r * std::sin(th);
    return v;
  }
  if (n == 3) {
    const double r = std::cbrt(u0);
    const double z = 1.0 - 2.0 * draw(scheme, seed, stream, index, 1);
    const double ph = two_pi * draw(scheme, seed, stream, index, 2);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    v[0] = r * rho * std::cos(ph);
    v[1] = r * rho * std::sin(ph);
    v[2] = r * z;
    return v;
  }
  // Normalized Gaussian direction via Box-Muller pairs.
  double s = 0.0;
  for (int i = 0; i < n; i += 2) {
    const unsigned comp = 1 + static_cast<unsigned>(i);
    const double a = 1.0 - draw(scheme, seed, stream, index, comp);
    const double b = draw(scheme, seed, stream, index, comp + 1);
    const double rad = std::sqrt(-2.0 * std::log(a));
    v[i] = rad * std::cos(two_pi * b);
    if (i + 1 < n) v[i + 1] = rad * std::sin(two_pi * b);
  }
  s = std::sqrt(v.norm_sq());
  const double r = std::pow(u0, 1.0 / n) / s;
  return r * v;
}

BallPoint to_interior(Vec v) {
  double s = v.norm_sq();
  if (s >= 1.0) {
    v = (std::nextafter(1.0, 0.0) / std::sqrt(s)) * v;
    s = v.norm_sq();
  }
  return BallPoint::unchecked(v, s);
}

}  // namespace

const char* to_string(Scheme s) noexcept {
  return s == Scheme::low_discrepancy ? "low-discrepancy" : "pseudo-random";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "low-discrepancy") return Scheme::low_discrepancy;
  if (s == "pseudo-random") return Scheme::pseudo_random;
  fail(ErrorKind::config, "unknown sampling scheme '" + s + "'");
}

void SamplerConfig::validate() const {
  require(batch >= 1, ErrorKind::config, "sampler batch must be >= 1");
  require(workers >= 1, ErrorKind::config, "workers must be >= 1");
}

Accumulator Accumulator::merge(const Accumulator& a, const Accumulator& b) {
  if (a.count == 0) return b;
  if (b.count == 0) return a;
  Accumulator r;
  r.count = a.count + b.count;
  const complex delta = b.mean - a.mean;
  const double wa = static_cast<double>(a.count) / static_cast<double>(r.count);
  const double wb = static_cast<double>(b.count) / static_cast<double>(r.count);
  r.mean = wa * a.mean + wb * b.mean;
  r.m2 = a.m2 + b.m2 + std::norm(delta) * static_cast<double>(a.count) * wb;
  return r;
}

void parallel_chunks(std::size_t count, std::size_t chunk, int workers,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (count == 0) return;
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t chunks = (count + chunk - 1) / chunk;
  const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), chunks);
  if (nthreads <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) fn(c, c * chunk, std::min(count, (c + 1) * chunk));
    return;
  }
  // the failure of the lowest failing chunk is rethrown, as a serial run would
  std::vector<std::exception_ptr> errors(chunks);
  {
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    for (std::size_t t = 0; t < nthreads; ++t)
      pool.emplace_back([&, t] {
        for (std::size_t c = t; c < chunks; c += nthreads) {
          try {
            fn(c, c * chunk, std::min(count, (c + 1) * chunk));
          } catch (...) {
            errors[c] = std::current_exception();
          }
        }
      });
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

namespace {

Accumulator pairwise_merge(std::vector<Accumulator>& parts, std::size_t lo, std::size_t hi) {
  if (hi - lo == 1) return parts[lo];
  const std::size_t mid = lo + (hi - lo) / 2;
  return Accumulator::merge(pairwise_merge(parts, lo, mid), pairwise_merge(parts, mid, hi));
}

}  // namespace

Estimate estimate_mean(std::size_t count, const SamplerConfig& cfg, const std::function<complex(std::size_t)>& fn,
                       const char* what) {
  cfg.validate();
  require(count >= 1, ErrorKind::invalid_input, "sample count must be >= 1");
  const std::size_t chunk = static_cast<std::size_t>(cfg.batch);
  const std::size_t chunks = (count + chunk - 1) / chunk;
  std::vector<Accumulator> parts(chunks);
  std::vector<long> bad(chunks, 0);
  parallel_chunks(count, chunk, cfg.workers, [&](std::size_t c, std::size_t b, std::size_t e) {
    Accumulator acc;
    long nb = 0;
    for (std::size_t i = b; i < e; ++i) {
      const complex v = fn(i);
      if (std::isfinite(v.real()) && std::isfinite(v.imag()))
        acc.add(v);
      else
        ++nb;
    }
    parts[c] = acc;
    bad[c] = nb;
  });
  const Accumulator total = pairwise_merge(parts, 0, parts.size());
  long nonfinite = 0;
  for (long b : bad) nonfinite += b;
  if (static_cast<double>(nonfinite) > 1e-4 * static_cast<double>(count)) {
    std::ostringstream os;
    os << what << ": " << nonfinite << " of " << count << " samples are non-finite";
    fail(ErrorKind::estimation, os.str());
  }
  Estimate est;
  est.samples = static_cast<long>(count);
  est.nonfinite = nonfinite;
  if (total.count > 0) {
    // Non-finite draws are dropped; rescale so the mean stays an integral over nu.
    const double keep = static_cast<double>(total.count) / static_cast<double>(count);
    est.value = total.mean * keep;
    est.std_error = std::sqrt(total.variance() / static_cast<double>(total.count)) * keep;
  }
  return est;
}

BallPoint sample_ball_point(const SamplerConfig& cfg, int n, std::uint64_t stream, std::uint64_t index) {
  return to_interior(unit_ball_vec(n, cfg.scheme, cfg.seed, stream, index));
}

std::vector<BallPoint> sample_ball(const SamplerConfig& cfg, int n, std::size_t count, std::uint64_t stream) {
  require(count >= 1, ErrorKind::invalid_input, "sample count must be >= 1");
  std::vector<BallPoint> pts(count);
  for (std::size_t i = 0; i < count; ++i) pts[i] = sample_ball_point(cfg, n, stream, i);
  return pts;
}

Vec sample_in_ball(const Vec& center, double radius, Scheme scheme, std::uint64_t seed, std::uint64_t stream,
                   std::uint64_t index) {
  return center + radius * unit_ball_vec(center.n, scheme, seed, stream, index);
}

Estimate integrate(const BallFunction& f, int n, const SamplerConfig& cfg, std::size_t count, std::uint64_t stream) {
  return estimate_mean(count, cfg, [&](std::size_t i) { return f(sample_ball_point(cfg, n, stream, i)); });
}

Estimate integrate_region_only(const BallFunction& f, const Membership& inside, int n, const SamplerConfig& cfg,
                               std::size_t count, std::uint64_t stream) {
  return estimate_mean(count, cfg, [&](std::size_t i) {
    const BallPoint x = sample_ball_point(cfg, n, stream, i);
    return inside(x) ? f(x) : complex(0.0);
  });
}

RegionEstimate integrate_region(const BallFunction& f, const Membership& inside, int n, const SamplerConfig& cfg,
                                std::size_t count, std::uint64_t stream) {
  RegionEstimate out;
  out.integral = integrate_region_only(f, inside, n, cfg, count, stream);
  out.measure = real_part(estimate_mean(count, cfg, [&](std::size_t i) {
    return inside(sample_ball_point(cfg, n, stream, i)) ? complex(1.0) : complex(0.0);
  }));
  return out;
}

GaussRule gauss_legendre01(int m) {
  require(m >= 1, ErrorKind::invalid_input, "Gauss rule needs at least one node");
  GaussRule rule;
  rule.nodes.resize(static_cast<std::size_t>(m));
  rule.weights.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0;
    double p1 = x;
    for (int k = 2; k <= m; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = m * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(m - 1 - i);
    rule.nodes[lo] = 0.5 * (1.0 - x);
    rule.nodes[hi] = 0.5 * (1.0 + x);
    rule.weights[lo] = 0.5 * w;
    rule.weights[hi] = 0.5 * w;
  }
  return rule;
}

namespace {

complex disk_rule(const BallFunction& f, int radial, int angular) {
  const GaussRule g = gauss_legendre01(radial);
  complex total = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double r = std::sqrt(g.nodes[i]);
    complex ring = 0.0;
    for (int j = 0; j < angular; ++j) {
      const double th = 2.0 * std::numbers::pi * j / angular;
      Vec v(2);
      v[0] = r * std::cos(th);
      v[1] = r * std::sin(th);
      ring += f(to_interior(v));
    }
    total += g.weights[i] * ring / static_cast<double>(angular);
  }
  return total;
}

complex ball3_rule(const BallFunction& f, int radial, int polar, int azimuthal) {
  const GaussRule gr = gauss_legendre01(radial);
  const GaussRule gp = gauss_legendre01(polar);
  complex total = 0.0;
  for (std::size_t i = 0; i < gr.nodes.size(); ++i) {
    const double r = gr.nodes[i];
    const double wr = gr.weights[i] * 3.0 * r * r;
    complex shell = 0.0;
    for (std::size_t j = 0; j < gp.nodes.size(); ++j) {
      const double z = 2.0 * gp.nodes[j] - 1.0;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      complex ring = 0.0;
      for (int k = 0; k < azimuthal; ++k) {
        const double ph = 2.0 * std::numbers::pi * k / azimuthal;
        Vec v(3);
        v[0] = r * rho * std::cos(ph);
        v[1] = r * rho * std::sin(ph);
        v[2] = r * z;
        ring += f(to_interior(v));
      }
      shell += gp.weights[j] * ring / static_cast<double>(azimuthal);
    }
    total += wr * shell;
  }
  return total;
}

}  // namespace

Estimate product_rule_disk(const BallFunction& f, int radial_nodes, int angular_nodes) {
  require(radial_nodes >= 2 && angular_nodes >= 2, ErrorKind::invalid_input, "product rule needs >= 2 nodes per axis");
  Estimate e;
  e.value = disk_rule(f, radial_nodes, angular_nodes);
  e.std_error = std::abs(e.value - disk_rule(f, radial_nodes / 2, angular_nodes / 2));
  e.samples = static_cast<long>(radial_nodes) * angular_nodes;
  return e;
}

Estimate product_rule_ball3(const BallFunction& f, int radial_nodes, int polar_nodes, int azimuthal_nodes) {
  require(radial_nodes >= 2 && polar_nodes >= 2 && azimuthal_nodes >= 2, ErrorKind::invalid_input,
          "product rule needs >= 2 nodes per axis");
  Estimate e;
  e.value = ball3_rule(f, radial_nodes, polar_nodes, azimuthal_nodes);
  e.std_error = std::abs(e.value - ball3_rule(f, radial_nodes / 2, polar_nodes / 2, azimuthal_nodes / 2));
  e.samples = static_cast<long>(radial_nodes) * polar_nodes * azimuthal_nodes;
  return e;
}

}  // namespace bergman
