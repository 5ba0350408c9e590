#include "bergman/functions.hpp"

#include <cmath>
#include <sstream>

#include "bergman/rng.hpp"

namespace bergman {

namespace {

constexpr std::size_t kL1Samples = 200000;

bool inside_unit_ball(const SupportBall& b) { return b.center.norm() + b.radius <= 1.0; }

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

std::string fmt(const Vec& v) {
  std::string out = "(";
  for (int i = 0; i < v.n; ++i) out += (i ? "," : "") + fmt(v[i]);
  return out + ")";
}

std::string fmt(complex c) { return c.imag() == 0.0 ? fmt(c.real()) : fmt(c.real()) + "+" + fmt(c.imag()) + "i"; }

// int_0^1 phi(s) n s^(n-1) ds by Gauss-Legendre (phi smooth on [0,1]).
double radial_moment(int n, const std::function<double(double)>& phi) {
  const GaussRule g = gauss_legendre01(200);
  double s = 0.0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    const double r = g.nodes[i];
    s += g.weights[i] * phi(r) * n * std::pow(r, n - 1);
  }
  return s;
}

}  // namespace

int support_multiplicity(const std::vector<SupportBall>& support, const Vec& x) {
  if (support.empty()) return 1;
  int m = 0;
  for (const SupportBall& b : support)
    if (distance_sq(b.center, x) < b.radius * b.radius) ++m;
  return m;
}

Estimate integrate_over_support(const std::vector<SupportBall>& support, int n, const BallFunction& h,
                                const SamplerConfig& cfg, std::size_t count_per_ball, std::uint64_t stream) {
  if (support.empty()) return integrate(h, n, cfg, count_per_ball, stream);
  // a ball of radius |c| + 1 already contains the unit ball
  std::vector<SupportBall> clipped = support;
  for (SupportBall& b : clipped) {
    const double reach = b.center.norm() + 1.0;
    if (b.radius >= reach) return integrate(h, n, cfg, count_per_ball, stream);
    b.radius = std::min(b.radius, reach);
  }
  Estimate total;
  double var = 0.0;
  for (std::size_t j = 0; j < clipped.size(); ++j) {
    const SupportBall& b = clipped[j];
    const double vol = ball_volume(n, b.radius);
    const std::uint64_t s = hash_combine(stream, j + 1);
    const Estimate e = estimate_mean(count_per_ball, cfg, [&](std::size_t i) {
      const Vec v = sample_in_ball(b.center, b.radius, cfg.scheme, cfg.seed, s, i);
      const double q = v.norm_sq();
      if (q >= 1.0) return complex(0.0);
      return vol * h(BallPoint::unchecked(v, q)) / static_cast<double>(support_multiplicity(clipped, v));
    });
    total.value += e.value;
    var += e.std_error * e.std_error;
    total.samples += e.samples;
    total.nonfinite += e.nonfinite;
  }
  total.std_error = std::sqrt(var);
  return total;
}

void estimate_l1(IntegrableFunction& f, const SamplerConfig& cfg, std::size_t count_per_ball) {
  const Estimate e = integrate_over_support(
      f.support, f.dim, [&](const BallPoint& x) { return complex(std::abs(f.value(x))); }, cfg, count_per_ball,
      0x6c31ULL);
  f.l1_norm = e.value.real();
  f.l1_std_error = e.std_error;
  f.l1_exact = false;
  f.l1_estimator = std::string("monte-carlo/") + to_string(cfg.scheme) + "/" + std::to_string(e.samples);
  f.l1_seed = cfg.seed;
}

IntegrableFunction zero_function(int n) {
  IntegrableFunction f;
  f.family = "zero";
  f.label = "0";
  f.dim = n;
  f.value = [](const BallPoint&) { return complex(0.0); };
  f.l1_exact = true;
  f.l1_estimator = "closed-form";
  f.sup_abs = 0.0;
  f.l2_sq = 0.0;
  return f;
}

IntegrableFunction constant_function(int n, complex c) {
  IntegrableFunction f;
  f.family = "constant";
  f.label = fmt(c);
  f.dim = n;
  f.value = [c](const BallPoint&) { return c; };
  f.l1_norm = std::abs(c);
  f.l1_exact = true;
  f.l1_estimator = "closed-form";
  f.sup_abs = std::abs(c);
  f.l2_sq = std::norm(c);
  return f;
}

IntegrableFunction sum_of_spikes(const std::vector<SpikeSpec>& parts, const SamplerConfig& cfg) {
  require(!parts.empty(), ErrorKind::invalid_input, "sum_of_spikes needs at least one spike");
  const int n = parts.front().center.n;
  IntegrableFunction f;
  f.family = parts.size() == 1 ? "spike" : "sum-of-spikes";
  f.dim = n;
  double sup = 0.0;
  for (const SpikeSpec& s : parts) {
    require(s.center.n == n, ErrorKind::invalid_input, "spike dimensions differ");
    require(s.radius > 0.0 && std::isfinite(s.radius), ErrorKind::invalid_input, "spike radius must be positive");
    require(s.center.norm() < 1.0, ErrorKind::invalid_input, "spike centre must lie in the ball");
    f.support.push_back({s.center, s.radius});
    sup += std::abs(s.height);
    if (!f.label.empty()) f.label += ";";
    f.label += fmt(s.center) + ":" + fmt(s.radius) + ":" + fmt(s.height);
  }
  f.value = [parts](const BallPoint& x) {
    complex v = 0.0;
    for (const SpikeSpec& s : parts)
      if (distance_sq(s.center, x.vec()) < s.radius * s.radius) v += s.height;
    return v;
  };
  f.sup_abs = sup;

  bool disjoint_inside = true;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    disjoint_inside = disjoint_inside && inside_unit_ball(f.support[i]);
    for (std::size_t j = 0; j < i; ++j)
      if (distance(parts[i].center, parts[j].center) < parts[i].radius + parts[j].radius) disjoint_inside = false;
  }
  if (disjoint_inside) {
    double l1 = 0.0, l2 = 0.0;
    for (const SpikeSpec& s : parts) {
      const double vol = ball_volume(n, s.radius);
      l1 += std::abs(s.height) * vol;
      l2 += std::norm(s.height) * vol;
    }
    f.l1_norm = l1;
    f.l1_exact = true;
    f.l1_estimator = "closed-form";
    f.l2_sq = l2;
  } else {
    estimate_l1(f, cfg, kL1Samples);
  }
  return f;
}

IntegrableFunction spike(const SpikeSpec& s, const SamplerConfig& cfg) { return sum_of_spikes({s}, cfg); }

IntegrableFunction smooth_bump(const Vec& center, double radius, complex height, const SamplerConfig& cfg) {
  require(radius > 0.0 && center.norm() < 1.0, ErrorKind::invalid_input, "bump needs a positive radius and interior centre");
  const int n = center.n;
  IntegrableFunction f;
  f.family = "smooth-bump";
  f.label = fmt(center) + ":" + fmt(radius) + ":" + fmt(height);
  f.dim = n;
  f.support.push_back({center, radius});
  f.value = [center, radius, height](const BallPoint& x) {
    const double s = distance_sq(center, x.vec()) / (radius * radius);
    if (s >= 1.0) return complex(0.0);
    return height * std::exp(1.0 - 1.0 / (1.0 - s));
  };
  f.sup_abs = std::abs(height);
  if (inside_unit_ball(f.support.front())) {
    const double vol = ball_volume(n, radius);
    auto profile = [](double s) { return s >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - s * s)); };
    f.l1_norm = std::abs(height) * vol * radial_moment(n, profile);
    f.l2_sq = std::norm(height) * vol * radial_moment(n, [&](double s) { return profile(s) * profile(s); });
    f.l1_exact = true;
    f.l1_estimator = "radial-gauss-legendre/200";
  } else {
    estimate_l1(f, cfg, kL1Samples);
  }
  return f;
}

IntegrableFunction radial_table(int n, const std::vector<double>& radii, const std::vector<complex>& values) {
  require(!radii.empty() && radii.size() == values.size(), ErrorKind::invalid_input,
          "radial table needs matching non-empty radii and values");
  for (std::size_t i = 0; i < radii.size(); ++i)
    require(radii[i] > (i ? radii[i - 1] : 0.0) && radii[i] <= 1.0, ErrorKind::invalid_input,
            "radial table radii must increase within (0, 1]");
  IntegrableFunction f;
  f.family = "radial-table";
  f.dim = n;
  double l1 = 0.0, l2 = 0.0, sup = 0.0, prev = 0.0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double shell = std::pow(radii[i], n) - std::pow(prev, n);
    l1 += std::abs(values[i]) * shell;
    l2 += std::norm(values[i]) * shell;
    sup = std::max(sup, std::abs(values[i]));
    prev = radii[i];
    if (i) f.label += ";";
    f.label += fmt(radii[i]) + ":" + fmt(values[i]);
  }
  if (radii.back() < 1.0) f.support.push_back({Vec(n), radii.back()});
  f.value = [radii, values](const BallPoint& x) {
    const double r = x.norm();
    for (std::size_t i = 0; i < radii.size(); ++i)
      if (r < radii[i]) return values[i];
    return complex(0.0);
  };
  f.l1_norm = l1;
  f.l1_exact = true;
  f.l1_estimator = "closed-form";
  f.sup_abs = sup;
  f.l2_sq = l2;
  return f;
}

}  // namespace bergman
