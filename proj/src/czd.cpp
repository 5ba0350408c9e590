#include "bergman/czd.hpp"

#include <cmath>
#include <limits>

#include "bergman/rng.hpp"
#include <functional>

namespace bergman {

namespace {

std::uint64_t cube_code(CubeId id) {
  return (static_cast<std::uint64_t>(id.level) << 32) | static_cast<std::uint32_t>(id.index);
}

std::string function_tag(const IntegrableFunction& f) { return f.family + ":" + f.label; }

bool may_meet_support(const DyadicSystem& sys, CubeId id, const IntegrableFunction& f) {
  if (f.whole_ball()) return true;
  const Vec c = sys.cube(id).center.vec();
  const double reach = sys.outer_radius(id.level);
  for (const SupportBall& b : f.support)
    if (distance(b.center, c) < b.radius + reach) return true;
  return false;
}

double ratio_se(double value, double num, double num_se, double den, double den_se) {
  if (den <= 0.0) return std::numeric_limits<double>::infinity();
  if (num == 0.0) return num_se / den;
  return std::abs(value) * std::hypot(num_se / num, den_se / den);
}

}  // namespace

CubeAverage cube_average(const DyadicSystem& sys, CubeId id, const IntegrableFunction& f, std::size_t samples,
                         std::uint64_t seed) {
  require(samples > 0, ErrorKind::invalid_input, "cube_average needs samples");
  require(f.dim == sys.dimension(), ErrorKind::invalid_input, "function and system dimensions differ");
  CubeAverage a;
  const MeasureEstimate me = cube_measure(sys, id, samples, seed);
  a.measure = me.value;
  a.measure_se = me.std_error;

  const int n = sys.dimension();
  const Vec qc = sys.cube(id).center.vec();
  const double qr = id.level == 0 ? 1.0 : sys.sampling_radius(id);
  struct Region {
    Vec c;
    double r;
    int j;  // support ball to stay inside, -1 for none
  };
  std::vector<Region> regions;
  if (f.whole_ball()) {
    regions.push_back({qc, qr, -1});
  } else {
    for (std::size_t j = 0; j < f.support.size(); ++j) {
      const SupportBall& b = f.support[j];
      if (distance(b.center, qc) >= b.radius + qr) continue;
      if (b.radius <= qr)
        regions.push_back({b.center, b.radius, static_cast<int>(j)});
      else
        regions.push_back({qc, qr, static_cast<int>(j)});
    }
  }

  const std::uint64_t key = sys.key(id);
  double var = 0.0, abs_var = 0.0;
  Accumulator on_cube, abs_on_cube;  // values at draws inside the cube (whole-ball case)
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const Region& g = regions[r];
    const double vol = ball_volume(n, g.r);
    const std::uint64_t stream = hash_combine(key, hash_combine(seed, r + 0x61766701ULL));
    Accumulator acc, abs_acc;
    for (std::size_t i = 0; i < samples; ++i) {
      complex v = 0.0;
      const Vec y = sample_in_ball(g.c, g.r, Scheme::pseudo_random, seed, stream, i);
      const double q = y.norm_sq();
      bool keep = q < 1.0;
      if (keep && g.j >= 0) {
        const SupportBall& b = f.support[static_cast<std::size_t>(g.j)];
        keep = distance_sq(b.center, y) < b.radius * b.radius;
      }
      if (keep) {
        const BallPoint x = BallPoint::unchecked(y, q);
        if (sys.contains(id, x)) {
          v = f(x) / static_cast<double>(support_multiplicity(f.support, y));
          if (g.j < 0) {
            on_cube.add(v);
            abs_on_cube.add(std::abs(v));
          }
        }
      }
      require(std::isfinite(v.real()) && std::isfinite(v.imag()), ErrorKind::estimation,
              "non-finite function value while averaging cube (" + std::to_string(id.level) + "," +
                  std::to_string(id.index) + ")");
      acc.add(vol * v);
      abs_acc.add(vol * std::abs(v));
    }
    a.integral += acc.mean;
    a.abs_integral += abs_acc.mean.real();
    var += acc.variance() / static_cast<double>(samples);
    abs_var += abs_acc.variance() / static_cast<double>(samples);
    a.samples += static_cast<long>(samples);
  }
  a.integral_se = std::sqrt(var);
  a.abs_integral_se = std::sqrt(abs_var);
  if (f.whole_ball() && on_cube.count > 0) {
    // ratio estimator on shared draws: exact for constants
    const double hits = static_cast<double>(on_cube.count);
    a.mean = on_cube.mean;
    a.mean_se = std::sqrt(on_cube.variance() / hits);
    a.abs_avg = abs_on_cube.mean.real();
    a.abs_avg_se = std::sqrt(abs_on_cube.variance() / hits);
  } else if (a.measure > 0.0) {
    a.abs_avg = a.abs_integral / a.measure;
    a.abs_avg_se = ratio_se(a.abs_avg, a.abs_integral, a.abs_integral_se, a.measure, a.measure_se);
    a.mean = a.integral / a.measure;
    a.mean_se = ratio_se(std::abs(a.mean), std::abs(a.integral), a.integral_se, a.measure, a.measure_se);
  } else {
    require(a.abs_integral == 0.0, ErrorKind::estimation,
            "cube (" + std::to_string(id.level) + "," + std::to_string(id.index) + ") has mass but no measure hits");
  }
  return a;
}

int CZDecomposition::stopping_index(const DyadicSystem& sys, const BallPoint& x) const {
  if (cubes.empty()) return -1;
  CubeId cur = kRoot;
  for (;;) {
    if (cur.level > 0) {
      const auto it = lookup.find(cube_code(cur));
      if (it != lookup.end()) return it->second;
    }
    if (cur.level >= max_level || !sys.is_refined(cur)) return -1;
    cur = sys.child_containing(cur, x);
  }
}

int CZDecomposition::f_depth(const DyadicSystem& sys, const BallPoint& x) const {
  if (sup_shortcut) return max_level;
  CubeId cur = kRoot;
  while (cur.level < max_level && sys.is_refined(cur)) cur = sys.child_containing(cur, x);
  return cur.level;
}

CZDecomposition decompose(const IntegrableFunction& f, double t, DyadicSystem& sys, const CzdOptions& opt) {
  require(t > 0.0 && std::isfinite(t), ErrorKind::invalid_input, "threshold t must be positive and finite");
  require(t >= f.l1_norm, ErrorKind::precondition,
          "threshold t = " + std::to_string(t) + " is below ||f||_1 = " + std::to_string(f.l1_norm));
  require(f.dim == sys.dimension(), ErrorKind::invalid_input, "function and system dimensions differ");
  require(opt.samples > 0 && opt.max_samples >= opt.samples && opt.z > 0.0, ErrorKind::config,
          "invalid decomposition sampling options");

  CZDecomposition dec;
  dec.t = t;
  dec.l1_norm = f.l1_norm;
  dec.function_label = function_tag(f);
  dec.max_level = opt.max_level < 0 ? sys.config().max_level : std::min(opt.max_level, sys.config().max_level);
  require(dec.max_level >= 1, ErrorKind::config, "decomposition depth must be at least 1");
  if (f.sup_abs && *f.sup_abs <= t) {
    dec.sup_shortcut = true;
    return dec;
  }

  std::vector<CubeId> parents;
  double trunc_var = 0.0;
  std::function<void(CubeId, double, double)> descend = [&](CubeId p, double p_avg, double p_se) {
    parents.push_back(p);
    const std::vector<CubeId> kids = sys.refine(p);
    for (const CubeId c : kids) {
      if (!may_meet_support(sys, c, f)) continue;
      std::size_t s = opt.samples;
      std::uint64_t round = 0;
      CubeAverage a;
      bool stop = false;
      for (;;) {
        a = cube_average(sys, c, f, s, hash_combine(opt.seed, round));
        ++dec.visited;
        const double lo = a.abs_avg - opt.z * a.abs_avg_se;
        const double hi = a.abs_avg + opt.z * a.abs_avg_se;
        if (lo > t) {
          stop = true;
          break;
        }
        if (hi <= t) break;
        if (2 * s > opt.max_samples) {
          ++dec.undecided;
          break;
        }
        s *= 2;
        ++round;
      }
      if (stop) {
        dec.lookup[cube_code(c)] = static_cast<int>(dec.cubes.size());
        dec.cubes.push_back({c, sys.cube(c).center, a, p_avg, p_se});
      } else if (c.level < dec.max_level) {
        descend(c, a.abs_avg, a.abs_avg_se);
      } else {
        dec.truncation_mass += a.abs_integral;
        trunc_var += a.abs_integral_se * a.abs_integral_se;
      }
    }
  };
  descend(kRoot, f.l1_norm, f.l1_std_error);
  dec.truncation_se = std::sqrt(trunc_var);

  double var = 0.0;
  for (const StoppingCube& q : dec.cubes) {
    dec.omega_measure += q.avg.measure;
    var += q.avg.measure_se * q.avg.measure_se;
  }
  dec.omega_se = std::sqrt(var);

  const ChildRatioReport c1 = child_ratio_constant(sys, parents, opt.ratio_samples, opt.seed);
  dec.c1_used = c1.value;
  dec.c1_se = c1.std_error;
  dec.c1_warning = c1.warning;
  dec.c1_pairs = c1.pairs;
  return dec;
}

GoodBadSplit::GoodBadSplit(const CZDecomposition& dec, const IntegrableFunction& f, const DyadicSystem& sys)
    : dec_(&dec), f_(&f), sys_(&sys) {
  require(dec.function_label == function_tag(f) && dec.l1_norm == f.l1_norm, ErrorKind::invalid_input,
          "decomposition was computed for a different function");
}

complex GoodBadSplit::good(const BallPoint& x) const {
  const int j = dec_->stopping_index(*sys_, x);
  return j < 0 ? f_->value(x) : dec_->cubes[static_cast<std::size_t>(j)].avg.mean;
}

complex GoodBadSplit::bad(const BallPoint& x) const {
  const int j = dec_->stopping_index(*sys_, x);
  return j < 0 ? complex(0.0) : f_->value(x) - dec_->cubes[static_cast<std::size_t>(j)].avg.mean;
}

complex GoodBadSplit::bad_part(std::size_t j, const BallPoint& x) const {
  const StoppingCube& q = dec_->cubes.at(j);
  return sys_->contains(q.id, x) ? f_->value(x) - q.avg.mean : complex(0.0);
}

GoodBadSplit good_bad_split(const CZDecomposition& dec, const IntegrableFunction& f, const DyadicSystem& sys) {
  return GoodBadSplit(dec, f, sys);
}

RealEstimate good_l2_norm_sq(const GoodBadSplit& split, const SamplerConfig& cfg, std::size_t count_per_ball) {
  const IntegrableFunction& f = split.function();
  const CZDecomposition& dec = split.decomposition();
  const DyadicSystem& sys = split.system();
  RealEstimate out;
  if (dec.cubes.empty() && f.l2_sq) {
    out.value = *f.l2_sq;
    return out;
  }
  const Estimate off = integrate_over_support(
      f.support, f.dim,
      [&](const BallPoint& x) { return dec.stopping_index(sys, x) < 0 ? complex(std::norm(f.value(x))) : complex(0.0); },
      cfg, count_per_ball, 0x6732ULL);
  out.value = off.value.real();
  double var = off.std_error * off.std_error;
  out.samples = off.samples;
  for (const StoppingCube& q : dec.cubes) {
    const double i = std::abs(q.avg.integral);
    const double nu = q.avg.measure;
    out.value += i * i / nu;
    const double d_i = 2.0 * i / nu * q.avg.integral_se;
    const double d_nu = i * i / (nu * nu) * q.avg.measure_se;
    var += d_i * d_i + d_nu * d_nu;
  }
  out.std_error = std::sqrt(var);
  return out;
}

BoundCheck good_l2_bound_check(const GoodBadSplit& split, double t, double c1, const SamplerConfig& cfg,
                               std::size_t count_per_ball) {
  const RealEstimate g2 = good_l2_norm_sq(split, cfg, count_per_ball);
  BoundCheck b;
  b.lhs = g2.value;
  b.lhs_se = g2.std_error;
  b.rhs = (c1 + 1.0) * t * split.function().l1_norm;
  b.margin = b.rhs - b.lhs;
  b.pass = b.lhs <= b.rhs + 3.0 * b.lhs_se;
  return b;
}

bool OmegaPrime::contains(const BallPoint& x) const {
  for (const SupportBall& b : balls)
    if (distance_sq(b.center, x.vec()) < b.radius * b.radius) return true;
  return false;
}

OmegaPrime omega_prime(const CZDecomposition& dec, const DyadicSystem& sys, const SamplerConfig& cfg,
                       std::size_t count_per_ball) {
  OmegaPrime o;
  if (dec.cubes.empty()) return o;
  for (const StoppingCube& q : dec.cubes) o.balls.push_back({q.center.vec(), 2.0 * sys.outer_radius(q.id.level)});
  const Estimate e = integrate_over_support(
      o.balls, sys.dimension(), [](const BallPoint&) { return complex(1.0); }, cfg, count_per_ball, 0x6f6dULL);
  o.measure = e.value.real();
  o.measure_se = e.std_error;
  o.c3_hat = dec.t * o.measure / dec.l1_norm;
  o.c3_se = dec.t * o.measure_se / dec.l1_norm;
  return o;
}

CzdClauseReport check_clauses(const GoodBadSplit& split, const SamplerConfig& cfg, std::size_t points,
                              std::size_t mean_zero_samples) {
  const IntegrableFunction& f = split.function();
  const CZDecomposition& dec = split.decomposition();
  const DyadicSystem& sys = split.system();
  const double t = dec.t;
  const double eps = std::numeric_limits<double>::epsilon();
  CzdClauseReport r;

  auto probe = [&](const BallPoint& x) {
    const complex fx = f.value(x);
    const complex g = split.good(x);
    const complex b = split.bad(x);
    ++r.reconstruction_points;
    if (std::abs(g + b - fx) > 4.0 * eps * (std::abs(fx) + std::abs(g))) ++r.reconstruction_failures;
    if (dec.stopping_index(sys, x) >= 0) return;
    ++r.f_points;
    if (std::abs(fx) > t) {
      ++r.f_points_above_t;
      if (dec.f_depth(sys, x) < dec.max_level) ++r.f_points_above_t_shallow;
    }
  };
  for (std::size_t i = 0; i < points; ++i) probe(sample_ball_point(cfg, f.dim, 0x463031ULL, i));
  for (std::size_t j = 0; j < f.support.size(); ++j) {
    const SupportBall& b = f.support[j];
    for (std::size_t i = 0; i < points / f.support.size(); ++i) {
      const Vec v = sample_in_ball(b.center, b.radius, cfg.scheme, cfg.seed, hash_combine(0x463032ULL, j), i);
      if (const auto x = BallPoint::try_make(v)) probe(*x);
    }
  }

  r.min_avg_ratio = dec.cubes.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  for (const StoppingCube& q : dec.cubes) {
    const double avg = q.avg.abs_avg;
    const double se = q.avg.abs_avg_se;
    r.min_avg_ratio = std::min(r.min_avg_ratio, avg / t);
    r.max_avg_ratio = std::max(r.max_avg_ratio, avg / t);
    const bool above = avg + 3.0 * se > t;
    const bool below = avg <= dec.c1_used * t + 3.0 * std::hypot(se, t * dec.c1_se);
    if (!above || !below) ++r.average_violations;
    if (q.parent_avg > t + 3.0 * q.parent_avg_se) ++r.maximality_violations;
    for (CubeId a = q.id; a.level > 1;) {
      a = sys.parent(a);
      if (dec.lookup.count(cube_code(a))) ++r.nesting_violations;
    }
    const CubeAverage fresh = cube_average(sys, q.id, f, mean_zero_samples, cfg.seed ^ 0x6d7aULL);
    const complex mz = fresh.integral - q.avg.mean * fresh.measure;
    const double mz_se = std::sqrt(fresh.integral_se * fresh.integral_se +
                                   std::norm(q.avg.mean) * fresh.measure_se * fresh.measure_se +
                                   std::pow(fresh.measure * q.avg.mean_se, 2));
    const double zscore = mz_se > 0.0 ? std::abs(mz) / mz_se : (std::abs(mz) > 1e-12 ? 1e300 : 0.0);
    r.max_mean_zero_z = std::max(r.max_mean_zero_z, zscore);
    if (zscore > 3.0) ++r.mean_zero_violations;
  }

  r.mass_lhs = dec.omega_measure;
  r.mass_rhs = dec.l1_norm / t;
  r.mass_se = std::hypot(dec.omega_se, f.l1_std_error / t);
  r.mass_ok = r.mass_lhs <= r.mass_rhs + 3.0 * r.mass_se;
  return r;
}

}  // namespace bergman
