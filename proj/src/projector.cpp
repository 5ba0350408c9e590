#include "bergman/projector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bergman/rng.hpp"

namespace bergman {

namespace {

constexpr std::uint64_t kOuterStream = 0x6f75746572ULL;
constexpr std::size_t kOuterChunk = 32;

// Runs fn with stage-labelled errors.
template <class F>
auto staged(const char* stage, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    fail(e.kind(), std::string("stage ") + stage + ": " + e.what());
  }
}

double lambda_se(double lambda, std::size_t n) {
  return std::sqrt(std::max(0.0, lambda * (1.0 - lambda)) / static_cast<double>(n));
}

double fraction_above(const std::vector<double>& moduli, double t) {
  std::size_t c = 0;
  for (double v : moduli) c += v > t ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(moduli.size());
}

StageRow row(const std::string& stage, double lhs, double lhs_se, double rhs, double rhs_se = 0.0) {
  StageRow r;
  r.stage = stage;
  r.lhs = lhs;
  r.lhs_se = std::hypot(lhs_se, rhs_se);
  r.rhs = rhs;
  r.margin = rhs - lhs;
  r.pass = lhs <= rhs + 3.0 * r.lhs_se;
  return r;
}

std::vector<SupportBall> stopping_balls(const CZDecomposition& dec, const DyadicSystem& sys) {
  std::vector<SupportBall> balls;
  for (const StoppingCube& q : dec.cubes) balls.push_back({q.center.vec(), sys.sampling_radius(q.id)});
  return balls;
}

}  // namespace

namespace {

struct McRun {
  Projection p;
  std::vector<double> se_at;  // stderr after each checkpoint count
};

// Draws are counter-based, so a longer run extends a shorter one.
McRun project_mc(const Kernel& K, const IntegrableFunction& f, const BallPoint& x, const SamplerConfig& cfg,
                 const ProjectOptions& opt, std::size_t N, const std::vector<std::size_t>& checkpoints,
                 std::uint64_t stream) {
  const int n = K.dim;
  McRun run;
  Projection& out = run.p;
  const std::vector<SupportBall> whole = {{Vec(n), 1.0}};
  const std::vector<SupportBall>& balls = f.whole_ball() ? whole : f.support;
  const bool centred = f.whole_ball() && K.reproduces_constants;
  const complex fx = centred ? f(x) : complex(0.0);
  // ball j is picked with weight half by volume, half uniform over balls, so
  // small balls (concentrated mass) are not starved
  double volume = 0.0;
  for (const SupportBall& b : balls) volume += ball_volume(n, b.radius);
  const double m = static_cast<double>(balls.size());
  std::vector<double> cumulative, density_per_ball;
  double total = 0.0;
  for (const SupportBall& b : balls) {
    const double vol = ball_volume(n, b.radius);
    const double w = 0.5 * vol / volume + 0.5 / m;
    cumulative.push_back(total += w);
    density_per_ball.push_back(w / vol);
  }
  // local draws: equal-weight balls of radius r_loc 2^k around x up to 2, a
  // density falling off like |x - y|^-n
  const double r_loc = std::clamp(2.0 * (1.0 - x.norm()), 1e-6, 1.0);
  const double alpha = opt.local_fraction;
  std::vector<double> loc_radii;
  for (double r = r_loc; loc_radii.empty() || loc_radii.back() < 2.0; r *= 2.0) loc_radii.push_back(r);
  const double per_scale = alpha / static_cast<double>(loc_radii.size());

  const std::uint64_t s_pick = hash_combine(stream, 1);
  const std::uint64_t s_loc = hash_combine(stream, 2);
  const std::uint64_t s_sup = hash_combine(stream, 3);
  Accumulator acc;
  std::size_t next = 0;
  for (std::size_t i = 0; i < N; ++i) {
    Vec y;
    const double pick = counter_uniform(cfg.seed, s_pick, i, 0);
    if (pick < alpha) {
      const std::size_t k = std::min(static_cast<std::size_t>(pick / per_scale), loc_radii.size() - 1);
      y = sample_in_ball(x.vec(), loc_radii[k], cfg.scheme, cfg.seed, s_loc, i);
    } else {
      const double u = (pick - alpha) / (1.0 - alpha) * total;
      const std::size_t j = static_cast<std::size_t>(
          std::min<std::ptrdiff_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin(),
                                   static_cast<std::ptrdiff_t>(balls.size()) - 1));
      y = sample_in_ball(balls[j].center, balls[j].radius, cfg.scheme, cfg.seed, s_sup, i);
    }
    complex v = 0.0;
    const double q = y.norm_sq();
    if (q < 1.0) {
      double mix = 0.0;
      for (std::size_t j = 0; j < balls.size(); ++j)
        if (distance_sq(balls[j].center, y) < balls[j].radius * balls[j].radius) mix += density_per_ball[j];
      double local = 0.0;
      const double rho_sq = distance_sq(y, x.vec());
      for (double r : loc_radii)
        if (rho_sq < r * r) local += per_scale / ball_volume(n, r);
      const double dens = (1.0 - alpha) * mix / total + local;
      if (mix > 0.0) {
        const BallPoint yp = BallPoint::unchecked(y, q);
        v = (f(yp) - fx) * std::conj(K(x, yp)) / dens;
      }
    }
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      out.divergent = true;
      out.samples = static_cast<long>(i + 1);
      return run;
    }
    acc.add(v);
    while (next < checkpoints.size() && i + 1 == checkpoints[next]) {
      run.se_at.push_back(std::sqrt(acc.variance() / static_cast<double>(acc.count)));
      ++next;
    }
  }
  out.value = fx + acc.mean;
  out.std_error = std::sqrt(acc.variance() / static_cast<double>(N));
  out.samples = static_cast<long>(N);
  return run;
}

bool stalled(double se_from, double se_to, double ratio, int doublings) {
  return se_from > 0.0 && se_to > std::pow(ratio, doublings) * se_from;
}

}  // namespace

Projection project(const Kernel& K, const IntegrableFunction& f, const BallPoint& x, const SamplerConfig& cfg,
                   const ProjectOptions& opt, std::uint64_t stream) {
  const int n = K.dim;
  require(f.dim == n && x.dim() == n, ErrorKind::invalid_input, "kernel, function and point differ in dimension");
  if (opt.integrator == Integrator::product_rule) {
    require(n == 2, ErrorKind::unsupported, "the product-rule integrator is available for n = 2 only");
    const Estimate e = product_rule_disk([&](const BallPoint& y) { return f(y) * std::conj(K(x, y)); },
                                         opt.radial_nodes, opt.angular_nodes);
    Projection out;
    out.value = e.value;
    out.std_error = e.std_error;
    out.samples = e.samples;
    return out;
  }
  require(opt.samples >= 64, ErrorKind::invalid_input, "projection needs at least 64 inner samples");
  require(opt.local_fraction >= 0.0 && opt.local_fraction < 1.0, ErrorKind::config,
          "local_fraction must lie in [0, 1)");
  require(opt.divergence_ratio > 0.0 && opt.divergence_ratio < 1.0, ErrorKind::config,
          "divergence_ratio must lie in (0, 1)");
  const std::size_t N = opt.samples;
  const McRun first = project_mc(K, f, x, cfg, opt, N, {N / 8, N}, stream);
  if (first.p.divergent) return first.p;
  if (!stalled(first.se_at[0], first.se_at[1], opt.divergence_ratio, 3)) return first.p;
  // a rare large draw can stall a short run; confirm over three more doublings
  McRun more = project_mc(K, f, x, cfg, opt, 8 * N, {}, stream);
  if (!more.p.divergent)
    more.p.divergent = stalled(first.p.std_error, more.p.std_error, opt.divergence_ratio, 3) ||
                       std::abs(more.p.value - first.p.value) > 4.0 * std::hypot(first.p.std_error, more.p.std_error);
  return more.p;
}

DistributionProfile distribution_from_values(const std::vector<double>& moduli, const std::vector<double>& thresholds) {
  require(!moduli.empty(), ErrorKind::invalid_input, "distribution needs at least one sample");
  for (std::size_t i = 0; i < thresholds.size(); ++i)
    require(thresholds[i] > 0.0 && (i == 0 || thresholds[i] > thresholds[i - 1]), ErrorKind::invalid_input,
            "thresholds must be positive and ascending");
  std::vector<double> sorted = moduli;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t N = sorted.size();
  DistributionProfile p;
  p.thresholds = thresholds;
  p.samples = static_cast<long>(N);
  for (double t : thresholds) {
    const auto above = static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t));
    const double lam = static_cast<double>(above) / static_cast<double>(N);
    p.lambda.push_back(lam);
    p.lambda_se.push_back(lambda_se(lam, N));
  }
  Accumulator acc;
  for (double v : moduli) acc.add(v);
  p.l1_norm = acc.mean.real();
  p.l1_se = std::sqrt(acc.variance() / static_cast<double>(N));
  return p;
}

DistributionProfile distribution_function(const BallFunction& h, int n, const std::vector<double>& thresholds,
                                          const SamplerConfig& cfg, std::size_t count, std::uint64_t stream) {
  std::vector<double> moduli;
  moduli.reserve(count);
  for (const BallPoint& x : sample_ball(cfg, n, count, stream)) moduli.push_back(std::abs(h(x)));
  return distribution_from_values(moduli, thresholds);
}

WeakSup weak_sup(const std::vector<double>& moduli) {
  std::vector<double> v = moduli;
  std::sort(v.begin(), v.end(), std::greater<>());
  WeakSup best;
  const double N = static_cast<double>(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (v[k] <= 0.0) break;
    if (k + 1 < v.size() && v[k + 1] == v[k]) continue;  // end of a tie group
    const double cand = v[k] * static_cast<double>(k + 1) / N;
    if (cand > best.value) best = {cand, v[k]};
  }
  return best;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  require(lo > 0.0 && hi > lo && count >= 2, ErrorKind::config, "log grid needs 0 < lo < hi and >= 2 points");
  std::vector<double> g;
  for (int i = 0; i < count; ++i) g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  g.back() = hi;
  return g;
}

ProjectedSample project_on_points(const Kernel& K, const IntegrableFunction& f, const SamplerConfig& cfg,
                                  const ScanOptions& opt, std::uint64_t stream) {
  require(opt.outer >= 1, ErrorKind::invalid_input, "scan needs at least one outer point");
  SamplerConfig outer_cfg = cfg;
  outer_cfg.scheme = Scheme::low_discrepancy;
  ProjectedSample s;
  s.points = sample_ball(outer_cfg, K.dim, opt.outer, kOuterStream);
  s.values.assign(opt.outer, 0.0);
  s.std_errors.assign(opt.outer, 0.0);
  std::vector<char> bad(opt.outer, 0);
  parallel_chunks(opt.outer, kOuterChunk, cfg.workers, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const Projection p = project(K, f, s.points[i], cfg, opt.inner, hash_combine(stream, i));
      s.values[i] = p.value;
      s.std_errors[i] = p.std_error;
      bad[i] = p.divergent ? 1 : 0;
    }
  });
  for (char c : bad) s.divergent += static_cast<std::size_t>(c);
  return s;
}

bool WeakTypeReport::finite() const {
  for (const WeakTypeMember& m : members)
    if (!std::isfinite(m.sup_ratio) || m.divergent_points > 0) return false;
  return std::isfinite(trend);
}

WeakTypeReport weak_type_scan(const Kernel& K, const std::string& family, const std::vector<IntegrableFunction>& members,
                              const std::vector<double>& parameters, const std::vector<double>& t_grid,
                              const SamplerConfig& cfg, const ScanOptions& opt) {
  require(members.size() == parameters.size() && !members.empty(), ErrorKind::invalid_input,
          "weak-type scan needs one parameter per member");
  WeakTypeReport rep;
  rep.family = family;
  for (std::size_t m = 0; m < members.size(); ++m) {
    const IntegrableFunction& f = members[m];
    const ProjectedSample s = project_on_points(K, f, cfg, opt, hash_combine(0x77ULL, m));
    std::vector<double> moduli;
    for (const complex& v : s.values) moduli.push_back(std::abs(v));
    WeakTypeMember w;
    w.parameter = parameters[m];
    w.label = f.family + ":" + f.label;
    w.l1_norm = f.l1_norm;
    w.divergent_points = s.divergent;
    w.profile = distribution_from_values(moduli, t_grid);
    w.pf_l1 = w.profile.l1_norm;
    w.pf_l1_se = w.profile.l1_se;
    const WeakSup ws = weak_sup(moduli);
    w.argmax_t = ws.argmax_t;
    if (f.l1_norm > 0.0)
      w.sup_ratio = ws.value / f.l1_norm;
    else
      w.sup_ratio = ws.value == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
      const double t = t_grid[i];
      const double lam = w.profile.lambda[i];
      if (t * lam > w.pf_l1 + 3.0 * w.pf_l1_se) ++w.markov_violations;
      if (t <= f.l1_norm && (lam > 1.0 || lam > f.l1_norm / t)) ++w.small_t_violations;
    }
    rep.members.push_back(std::move(w));
  }
  const double first = rep.members.front().sup_ratio;
  const double last = rep.members.back().sup_ratio;
  if (first > 0.0)
    rep.trend = last / first;
  else
    rep.trend = last == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return rep;
}

Weak22Result weak22_check(const Kernel& K, const IntegrableFunction& f, const SamplerConfig& cfg,
                          const ScanOptions& opt) {
  const ProjectedSample a = project_on_points(K, f, cfg, opt, 0x3232aULL);
  const ProjectedSample b = project_on_points(K, f, cfg, opt, 0x3232bULL);
  require(a.divergent == 0 && b.divergent == 0, ErrorKind::divergence, "projection diverged during the L2 check");
  Accumulator acc;
  for (std::size_t i = 0; i < a.values.size(); ++i) acc.add(std::real(a.values[i] * std::conj(b.values[i])));
  const double sq = acc.mean.real();
  const double sq_se = std::sqrt(acc.variance() / static_cast<double>(acc.count));
  Weak22Result r;
  r.l2_out = std::sqrt(std::max(0.0, sq));
  r.l2_out_se = r.l2_out > 0.0 ? sq_se / (2.0 * r.l2_out) : std::sqrt(sq_se);
  double in_se = 0.0;
  if (f.l2_sq) {
    r.l2_in = std::sqrt(*f.l2_sq);
  } else {
    const Estimate e = integrate_over_support(
        f.support, f.dim, [&](const BallPoint& x) { return complex(std::norm(f(x))); }, cfg, 100000, 0x6c32ULL);
    r.l2_in = std::sqrt(std::max(0.0, e.value.real()));
    in_se = r.l2_in > 0.0 ? e.std_error / (2.0 * r.l2_in) : 0.0;
  }
  r.pass = r.l2_out <= r.l2_in + 3.0 * std::hypot(r.l2_out_se, in_se);
  return r;
}

IntegrableFunction good_part_function(const GoodBadSplit& split) {
  const IntegrableFunction& f = split.function();
  IntegrableFunction g;
  g.family = "good";
  g.label = f.family + ":" + f.label;
  g.dim = f.dim;
  g.value = [&split](const BallPoint& x) { return split.good(x); };
  if (!f.whole_ball()) {
    g.support = f.support;
    for (const SupportBall& b : stopping_balls(split.decomposition(), split.system())) g.support.push_back(b);
  }
  return g;
}

IntegrableFunction bad_part_function(const GoodBadSplit& split) {
  const IntegrableFunction& f = split.function();
  IntegrableFunction b;
  b.family = "bad";
  b.label = f.family + ":" + f.label;
  b.dim = f.dim;
  if (split.parts() == 0) {
    b.value = [](const BallPoint&) { return complex(0.0); };
    return b;
  }
  b.value = [&split](const BallPoint& x) { return split.bad(x); };
  b.support = stopping_balls(split.decomposition(), split.system());
  // f's own balls keep concentrated mass inside a cube well sampled
  if (!f.whole_ball()) b.support.insert(b.support.end(), f.support.begin(), f.support.end());
  return b;
}

std::optional<HormanderProbe> hormander_cube_probe(const Kernel& K, const DyadicSystem& sys, CubeId id, double c2,
                                                   const SamplerConfig& cfg, std::size_t samples, std::size_t probe) {
  const CubeInfo q = sys.cube(id);
  const double radius = sys.outer_radius(id.level);
  const std::uint64_t key = sys.key(id);
  std::optional<BallPoint> y;
  for (std::uint64_t a = 0; a < 4096 && !y; ++a) {
    const auto cand = BallPoint::try_make(
        sample_in_ball(q.center.vec(), radius, Scheme::pseudo_random, cfg.seed, hash_combine(key, probe), a));
    if (cand && sys.contains(id, *cand)) y = cand;
  }
  if (!y) return std::nullopt;
  const Estimate e = hormander_integral(K, q.center, radius, *y, cfg, samples, hash_combine(key, 0x68ULL + probe));
  HormanderProbe h;
  h.cube = id;
  h.y = *y;
  h.radius = radius;
  h.integral = e.value.real();
  h.std_error = e.std_error;
  h.samples = e.samples;
  h.bound = c2 * tail_integral_bound(K.dim, distance(*y, q.center));
  h.pass = h.integral <= h.bound + 3.0 * h.std_error;
  return h;
}

bool PipelineReport::pass() const {
  if (divergent_points > 0) return false;
  for (const StageRow& s : stages)
    if (!s.pass) return false;
  return true;
}

PipelineReport cz_pipeline_check(const Kernel& K, const IntegrableFunction& f, double t, DyadicSystem& sys,
                                 const SamplerConfig& cfg, const PipelineOptions& opt) {
  const int n = K.dim;
  PipelineReport R;
  R.t = t;
  R.l1_norm = f.l1_norm;
  const double l1 = f.l1_norm;

  const CZDecomposition dec = staged("decompose", [&] { return decompose(f, t, sys, opt.czd); });
  const GoodBadSplit split(dec, f, sys);
  R.stopping_cubes = dec.cubes.size();
  R.c1 = dec.c1_used;
  R.c1_se = dec.c1_se;
  R.omega = dec.omega_measure;
  R.stages.push_back(row("omega_mass", dec.omega_measure, dec.omega_se, l1 / t));

  const RealEstimate g2 = staged("good_l2", [&] { return good_l2_norm_sq(split, cfg, opt.measure_samples); });
  R.g_l2_sq = g2.value;
  R.stages.push_back(row("good_l2", g2.value, g2.std_error, (R.c1 + 1.0) * t * l1));

  // Pf and Pg share inner streams, so Pg equals Pf exactly when no cube stops.
  const IntegrableFunction g = good_part_function(split);
  const IntegrableFunction b = bad_part_function(split);
  const ProjectedSample pf = staged("project_f", [&] { return project_on_points(K, f, cfg, opt.scan, 0x5046ULL); });
  const ProjectedSample pg = staged("project_g", [&] { return project_on_points(K, g, cfg, opt.scan, 0x5046ULL); });
  const ProjectedSample pb = staged("project_b", [&] { return project_on_points(K, b, cfg, opt.scan, 0x5062ULL); });
  R.divergent_points = pf.divergent + pg.divergent + pb.divergent;
  const std::size_t N = pf.values.size();
  std::vector<double> mf, mg, mb;
  for (std::size_t i = 0; i < N; ++i) {
    mf.push_back(std::abs(pf.values[i]));
    mg.push_back(std::abs(pg.values[i]));
    mb.push_back(std::abs(pb.values[i]));
  }

  R.grid = log_grid(t / 4.0, 4.0 * t, opt.grid_points);
  for (double s : R.grid) {
    const double lam = fraction_above(mg, s);
    R.stages.push_back(row("weak22_good@" + std::to_string(s), lam, lambda_se(lam, N), g2.value / (s * s),
                           g2.std_error / (s * s)));
  }

  const OmegaPrime op = staged("omega_prime", [&] { return omega_prime(dec, sys, cfg, opt.measure_samples); });
  R.omega_prime = op.measure;
  R.c3_hat = op.c3_hat;
  double dil_se = 0.0;
  for (std::size_t j = 0; j < dec.cubes.size(); ++j) {
    const SupportBall& ball = op.balls[j];
    const Estimate e = integrate_over_support({ball}, n, [](const BallPoint&) { return complex(1.0); }, cfg,
                                              opt.measure_samples, hash_combine(0x64696cULL, j));
    const double nu_q = dec.cubes[j].avg.measure;
    const double d = e.value.real() / nu_q;
    if (d > R.c3_dilation) {
      R.c3_dilation = d;
      dil_se = d * std::hypot(e.std_error / e.value.real(), dec.cubes[j].avg.measure_se / nu_q);
    }
  }
  R.stages.push_back(row("omega_prime", op.measure, op.measure_se, R.c3_dilation * l1 / t, dil_se * l1 / t));

  if (!dec.cubes.empty()) {
    R.c2_gradient = staged("gradient_constant", [&] {
      return kernel_gradient_constant(K, cfg, {opt.gradient_pairs, 0.5}).constant_estimate;
    });
    const std::size_t m = dec.cubes.size();
    const std::size_t probed = std::min(m, opt.hormander_cubes);
    StageRow worst;
    bool have = false;
    for (std::size_t c = 0; c < probed; ++c) {
      const CubeId id = dec.cubes[c * m / probed].id;
      for (std::size_t p = 0; p < opt.hormander_probes; ++p) {
        const std::optional<HormanderProbe> h = staged("hormander_probe", [&] {
          return hormander_cube_probe(K, sys, id, R.c2_gradient, cfg, opt.hormander_samples, p);
        });
        if (!h) continue;
        R.c4_hat = std::max(R.c4_hat, h->integral);
        const StageRow r = row("hormander_probe", h->integral, h->std_error, h->bound);
        if (!have || r.rhs - r.lhs - 3.0 * r.lhs_se < worst.rhs - worst.lhs - 3.0 * worst.lhs_se) worst = r;
        have = true;
      }
    }
    if (have) R.stages.push_back(worst);
  }

  const Estimate bl1 = staged("bad_l1", [&] {
    return dec.cubes.empty()
               ? Estimate{}
               : integrate_over_support(b.support, n, [&](const BallPoint& x) { return complex(std::abs(b(x))); },
                                        cfg, opt.measure_samples, 0x626c31ULL);
  });
  R.b_l1 = bl1.value.real();
  R.stages.push_back(row("bad_l1", R.b_l1, bl1.std_error, (1.0 + R.c1) * l1));

  Accumulator outside;
  for (std::size_t i = 0; i < N; ++i) outside.add(op.contains(pf.points[i]) ? 0.0 : mb[i]);
  R.pb_outside_l1 = outside.mean.real();
  const double outside_se = std::sqrt(outside.variance() / static_cast<double>(N));
  R.stages.push_back(row("hormander_b", R.pb_outside_l1, outside_se, R.c4_hat * (1.0 + R.c1) * l1));

  R.lambda_pb_half = fraction_above(mb, t / 2.0);
  R.stages.push_back(row("pb_distribution", R.lambda_pb_half, lambda_se(R.lambda_pb_half, N),
                         (R.c3_hat + 2.0 * R.c4_hat * (1.0 + R.c1)) * l1 / t));
  R.lambda_pg_half = fraction_above(mg, t / 2.0);
  R.stages.push_back(row("pg_distribution", R.lambda_pg_half, lambda_se(R.lambda_pg_half, N), 4.0 * (R.c1 + 1.0) * l1 / t));

  R.lambda_pf = fraction_above(mf, t);
  R.stages.push_back(row("split", R.lambda_pf, lambda_se(R.lambda_pf, N), R.lambda_pg_half + R.lambda_pb_half,
                         std::hypot(lambda_se(R.lambda_pg_half, N), lambda_se(R.lambda_pb_half, N))));
  R.c_total = 4.0 * (R.c1 + 1.0) + 2.0 * R.c4_hat * (1.0 + R.c1) + R.c3_hat;
  R.final_ratio = l1 > 0.0 ? t * R.lambda_pf / l1 : 0.0;
  R.stages.push_back(row("final", R.lambda_pf, lambda_se(R.lambda_pf, N), R.c_total * l1 / t));
  return R;
}

}  // namespace bergman
