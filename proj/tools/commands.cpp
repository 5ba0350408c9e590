#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "bergman/rng.hpp"

namespace bergman::cli {

namespace fs = std::filesystem;

namespace {

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(12);
  s << v;
  return s.str();
}

std::string num(std::uint64_t v) { return std::to_string(v); }
std::string num(long v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(bool v) { return v ? "1" : "0"; }

std::string coords(const Vec& v) {
  std::string s;
  for (int i = 0; i < v.n; ++i) s += (i ? " " : "") + num(v[i]);
  return s;
}

std::string quoted(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

class Csv {
 public:
  Csv(const fs::path& path, const std::vector<std::string>& columns) : out_(path) {
    require(static_cast<bool>(out_), ErrorKind::config, "cannot write " + path.string());
    out_ << "# " << kTimestampKey << " " << timestamp() << "\n";
    row(columns);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << quoted(cells[i]);
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::config, "cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorKind::config, "cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json summary_head(const RunConfig& cfg) {
  json j;
  j[kTimestampKey] = timestamp();
  j["schema_version"] = kSchemaVersion;
  j["command"] = to_string(cfg.command);
  j["seed"] = cfg.sampler.seed;
  return j;
}

std::string sampler_seed(const RunConfig& cfg) { return num(cfg.sampler.seed); }

// ---------------------------------------------------------------------------
// dyadic

// Refines every cube up to level 1, then at most `limit` cubes per level
// (evenly spread by index) when limit > 0.
std::vector<std::size_t> realize(DyadicSystem& sys, int depth, std::size_t limit) {
  std::vector<std::size_t> refined(static_cast<std::size_t>(depth), 0);
  sys.refine(kRoot);
  refined[0] = 1;
  for (int k = 1; k < depth; ++k) {
    const std::size_t m = sys.count(k);
    const std::size_t take = (limit == 0 || m <= limit) ? m : limit;
    for (std::size_t i = 0; i < take; ++i) {
      const std::size_t idx = take == m ? i : i * m / take;
      sys.refine({k, static_cast<int>(idx) + 1});
    }
    refined[static_cast<std::size_t>(k)] = take;
  }
  return refined;
}

RunResult cmd_dyadic(const RunConfig& cfg, const fs::path& out) {
  RunResult res;
  const int n = cfg.dimension;
  const DyadicSection& d = cfg.dyadic;
  json sum = summary_head(cfg);
  Csv suites(out / "dyadic_suites.csv", {"suite", "violations", "checked", "pass", "detail", "seed", "points"});
  auto suite = [&](const std::string& name, std::size_t bad, std::size_t checked, const std::string& detail) {
    suites.row({name, num(static_cast<std::uint64_t>(bad)), num(static_cast<std::uint64_t>(checked)), num(bad == 0),
                detail, sampler_seed(cfg), num(static_cast<std::uint64_t>(d.verify_points))});
    sum["suites"][name] = {{"violations", bad}, {"checked", checked}, {"pass", bad == 0}};
    if (bad) res.exit_code = kInvariantFailure;
  };

  std::optional<DyadicSystem> sys;
  std::vector<std::size_t> refined;
  if (!d.snapshot_in.empty()) {
    const std::string text = read_text(d.snapshot_in);
    try {
      sys.emplace(DyadicSystem::from_snapshot(text));
      suite("snapshot_load", 0, 1, "");
    } catch (const Error& e) {
      suite("snapshot_load", 1, 1, e.what());
      suite("nesting", 1, 0, "snapshot rejected");
      res.message = e.what();
      sum["status"] = "fail";
      res.summary = sum;
      return res;
    }
  } else {
    sys.emplace(d.config(n));
    refined = realize(*sys, d.depth, d.max_refined_per_level);
  }

  const DyadicVerification v =
      verify(*sys, sample_ball(cfg.sampler, n, d.verify_points, 0x647961ULL), d.inner_probes, cfg.sampler.seed);
  suite("partition", v.partition_rejects, v.points, "");
  suite("nesting", v.nesting_violations, v.points, "");
  suite("separation", v.separation_violations, v.cubes_checked, "min ratio " + num(v.min_separation_ratio));
  suite("sandwich_inner", v.inner_violations, v.cubes_checked, "");
  suite("sandwich_outer", v.outer_violations, v.points, "max ratio " + num(v.max_outer_ratio));

  const std::string snap = sys->snapshot();
  write_text(out / "dyadic_snapshot.txt", snap);
  if (d.snapshot_in.empty() && d.determinism_check) {
    DyadicSystem again(d.config(n));
    realize(again, d.depth, d.max_refined_per_level);
    suite("determinism", again.snapshot() == snap ? 0 : 1, 1, "snapshot bytes of a second build");
  }

  Csv levels(out / "dyadic_levels.csv", {"level", "cubes", "refined_parents", "complete", "scale", "outer_radius"});
  const int top = sys->realized_levels();
  for (int k = 1; k <= top; ++k) {
    std::size_t parents = 0;
    for (std::size_t i = 1; i <= sys->count(k - 1); ++i)
      if (sys->is_refined({k - 1, static_cast<int>(i)})) ++parents;
    const bool complete = parents == sys->count(k - 1);
    levels.row({num(k), num(static_cast<std::uint64_t>(sys->count(k))), num(static_cast<std::uint64_t>(parents)),
                num(complete), num(sys->scale(k)), num(sys->outer_radius(k))});
    sum["levels"].push_back({{"level", k}, {"cubes", sys->count(k)}, {"refined_parents", parents}, {"complete", complete}});
  }
  const DyadicConfig& dc = sys->config();
  sum["triple"] = {{"eta", dc.eta}, {"kappa0", dc.kappa0}, {"kappa1", dc.kappa1}};
  sum["max_outer_ratio"] = v.max_outer_ratio;
  sum["min_separation_ratio"] = v.min_separation_ratio;
  sum["status"] = res.exit_code == kPass ? "pass" : "fail";
  res.summary = sum;
  return res;
}

// ---------------------------------------------------------------------------
// czd

RunResult cmd_czd(const RunConfig& cfg, const fs::path& out) {
  RunResult res;
  const int n = cfg.dimension;
  std::vector<IntegrableFunction> funcs;
  for (const json& m : cfg.family.members) funcs.push_back(build_member(m, n, cfg.sampler));
  require(!funcs.empty(), ErrorKind::config, "czd needs at least one family member");
  for (std::size_t i = 0; i < funcs.size(); ++i)
    for (double t : cfg.thresholds)
      require(t >= funcs[i].l1_norm, ErrorKind::precondition,
              "t = " + num(t) + " is below ||f||_1 = " + num(funcs[i].l1_norm) + " for member " + std::to_string(i));

  DyadicSystem sys(cfg.dyadic.config(n));
  json sum = summary_head(cfg);
  sum["family"] = cfg.family.name;
  Csv cubes(out / "czd_cubes.csv", {"member", "parameter", "t", "level", "index", "center", "average", "average_se",
                                     "measure", "measure_se", "parent_average", "samples", "seed"});
  Csv table(out / "czd_summary.csv",
            {"member", "parameter", "label", "t", "l1_norm", "cubes", "omega", "omega_se", "c1", "c1_se", "c3",
             "c3_se", "truncation_mass", "f_points", "f_above_t_shallow", "average_violations",
             "maximality_violations", "nesting_violations", "mean_zero_violations", "max_mean_zero_z",
             "reconstruction_failures", "mass_lhs", "mass_rhs", "good_l2_lhs", "good_l2_rhs", "good_l2_margin", "pass",
             "seed", "clause_points", "l2_samples"});
  for (std::size_t i = 0; i < funcs.size(); ++i) {
    const IntegrableFunction& f = funcs[i];
    const double p = member_parameter(cfg.family.members[i]);
    for (double t : cfg.thresholds) {
      const CZDecomposition dec = decompose(f, t, sys, cfg.czd.options);
      const GoodBadSplit split(dec, f, sys);
      const CzdClauseReport c = check_clauses(split, cfg.sampler, cfg.czd.clause_points, cfg.czd.mean_zero_samples);
      const BoundCheck l2 = good_l2_bound_check(split, t, dec.c1_used, cfg.sampler, cfg.czd.l2_samples);
      const OmegaPrime op = omega_prime(dec, sys, cfg.sampler, cfg.czd.omega_samples);
      const bool pass = c.ok() && l2.pass && l2.margin > 0.0;
      if (!pass) res.exit_code = kInvariantFailure;
      for (const StoppingCube& q : dec.cubes)
        cubes.row({num(static_cast<std::uint64_t>(i)), num(p), num(t), num(q.id.level), num(q.id.index),
                   coords(q.center.vec()), num(q.avg.abs_avg), num(q.avg.abs_avg_se), num(q.avg.measure),
                   num(q.avg.measure_se), num(q.parent_avg), num(q.avg.samples), num(cfg.czd.options.seed)});
      table.row({num(static_cast<std::uint64_t>(i)), num(p), f.family + ":" + f.label, num(t), num(f.l1_norm),
                 num(static_cast<std::uint64_t>(dec.cubes.size())), num(dec.omega_measure), num(dec.omega_se),
                 num(dec.c1_used), num(dec.c1_se), num(op.c3_hat), num(op.c3_se), num(dec.truncation_mass),
                 num(static_cast<std::uint64_t>(c.f_points)), num(static_cast<std::uint64_t>(c.f_points_above_t_shallow)),
                 num(static_cast<std::uint64_t>(c.average_violations)),
                 num(static_cast<std::uint64_t>(c.maximality_violations)),
                 num(static_cast<std::uint64_t>(c.nesting_violations)),
                 num(static_cast<std::uint64_t>(c.mean_zero_violations)), num(c.max_mean_zero_z),
                 num(static_cast<std::uint64_t>(c.reconstruction_failures)), num(c.mass_lhs), num(c.mass_rhs),
                 num(l2.lhs), num(l2.rhs), num(l2.margin), num(pass), sampler_seed(cfg),
                 num(static_cast<std::uint64_t>(cfg.czd.clause_points)),
                 num(static_cast<std::uint64_t>(cfg.czd.l2_samples))});
      sum["runs"].push_back({{"member", i},
                             {"parameter", p},
                             {"t", t},
                             {"l1_norm", f.l1_norm},
                             {"cubes", dec.cubes.size()},
                             {"omega", dec.omega_measure},
                             {"c1", dec.c1_used},
                             {"c3", op.c3_hat},
                             {"good_l2_margin", l2.margin},
                             {"clauses_ok", c.ok()},
                             {"pass", pass}});
    }
  }
  sum["status"] = res.exit_code == kPass ? "pass" : "fail";
  res.summary = sum;
  return res;
}

// ---------------------------------------------------------------------------
// kernel-bounds

RunResult cmd_kernel_bounds(const RunConfig& cfg, const fs::path& out) {
  RunResult res;
  const KernelBoundsSection& kb = cfg.kernel_bounds;
  const std::vector<KernelSection> sweep = cfg.kernel_sweep.empty() ? std::vector<KernelSection>{cfg.kernel} : cfg.kernel_sweep;
  json sum = summary_head(cfg);
  Csv bounds(out / "kernel_bounds.csv", {"kernel", "truncation", "quantity", "constant", "half_estimate", "stability",
                                          "samples", "worst_x", "worst_y", "radius_cap", "pass", "seed"});
  Csv horm(out / "hormander.csv", {"kernel", "truncation", "level", "index", "y", "radius", "integral", "std_error",
                                   "bound", "samples", "pass", "seed"});
  Csv tail(out / "tail_bound.csv", {"n", "d", "bound"});
  for (double d : kb.tail_distances) tail.row({num(cfg.dimension), num(d), num(tail_integral_bound(cfg.dimension, d))});

  bool unstable = false;
  for (const KernelSection& ks : sweep) {
    const Kernel K = make_kernel(ks.name, cfg.dimension, ks.truncation);
    const KernelScanOptions opt{kb.pairs, kb.near_diagonal_fraction};
    const BoundReport size = kernel_size_constant(K, cfg.sampler, opt);
    const BoundReport grad = kernel_gradient_constant(K, cfg.sampler, opt);
    json entry = {{"kernel", ks.name}, {"truncation", K.truncation ? *K.truncation : 0}};
    for (const BoundReport* r : {&size, &grad}) {
      const bool ok = r->stability <= kb.max_drift;
      unstable = unstable || !ok;
      bounds.row({ks.name, num(K.truncation ? *K.truncation : 0), r->quantity, num(r->constant_estimate),
                  num(r->half_estimate), num(r->stability), num(r->sample_count), coords(r->worst_x.vec()),
                  coords(r->worst_y.vec()), num(K.radius_cap), num(ok), num(r->seed)});
      entry[r->quantity] = {{"constant", r->constant_estimate}, {"stability", r->stability}, {"pass", ok}};
    }

    // random cubes: a uniform point located at a level whose doubled ball
    // 2 kappa1 eta^k leaves part of the unit ball outside
    DyadicSystem sys(DyadicConfig::practical(cfg.dimension, kb.hormander_depth));
    int first = 1;
    while (first < kb.hormander_depth && 2.0 * sys.outer_radius(first) > 1.0) ++first;
    std::size_t probes = 0, failed = 0, truncated = 0;
    double worst = 0.0;
    for (std::uint64_t a = 0; probes < kb.hormander_cubes && a < 8 * kb.hormander_cubes + 16; ++a) {
      const std::uint64_t h = hash_combine(hash_combine(cfg.sampler.seed, 0x686f726dULL), a);
      const int level = first + static_cast<int>(h % static_cast<std::uint64_t>(kb.hormander_depth - first + 1));
      const CubeId id = sys.locate(sample_ball_point(cfg.sampler, cfg.dimension, 0x686f726dULL, a), level);
      const int index = id.index;
      std::optional<HormanderProbe> p;
      try {
        p = hormander_cube_probe(K, sys, id, grad.constant_estimate, cfg.sampler, kb.hormander_samples, probes);
      } catch (const Error& e) {
        // truncated series are not evaluable next to the sphere
        if (e.kind() != ErrorKind::truncation) throw;
        ++truncated;
        continue;
      }
      if (!p) continue;
      ++probes;
      if (!p->pass) ++failed;
      if (p->bound > 0.0) worst = std::max(worst, p->integral / p->bound);
      horm.row({ks.name, num(K.truncation ? *K.truncation : 0), num(level), num(index), coords(p->y.vec()),
                num(p->radius), num(p->integral), num(p->std_error), num(p->bound), num(p->samples), num(p->pass),
                sampler_seed(cfg)});
    }
    require(probes == kb.hormander_cubes, ErrorKind::estimation, "could not place Hormander probes in enough cubes");
    if (failed) res.exit_code = kInvariantFailure;
    entry["hormander"] = {{"probes", probes},
                          {"failures", failed},
                          {"skipped_truncated", truncated},
                          {"max_integral_over_bound", worst}};
    sum["kernels"].push_back(entry);
  }
  sum["tail_bound"] = json::array();
  for (double d : kb.tail_distances) sum["tail_bound"].push_back({{"d", d}, {"bound", tail_integral_bound(cfg.dimension, d)}});
  if (unstable) {
    res.exit_code = kEstimationFailure;
    res.message = "a constant estimate drifted by more than max_drift under sample doubling";
  }
  sum["status"] = res.exit_code == kPass ? "pass" : "fail";
  res.summary = sum;
  return res;
}

// ---------------------------------------------------------------------------
// weaktype

json stage_json(const StageRow& s) {
  return {{"stage", s.stage}, {"lhs", s.lhs}, {"lhs_se", s.lhs_se}, {"rhs", s.rhs}, {"margin", s.margin}, {"pass", s.pass}};
}

RunResult cmd_weaktype(const RunConfig& cfg, const fs::path& out) {
  RunResult res;
  const int n = cfg.dimension;
  const WeaktypeSection& w = cfg.weaktype;
  const Kernel K = make_kernel(cfg.kernel.name, n, cfg.kernel.truncation);
  std::vector<IntegrableFunction> funcs;
  std::vector<double> params;
  for (const json& m : cfg.family.members) {
    funcs.push_back(build_member(m, n, cfg.sampler));
    params.push_back(member_parameter(m));
  }
  require(!funcs.empty(), ErrorKind::config, "weaktype needs at least one family member");

  ScanOptions scan;
  scan.outer = w.outer;
  scan.inner.samples = w.inner;
  scan.inner.local_fraction = w.local_fraction;
  const std::vector<double> grid = log_grid(w.t_lo, w.t_hi, w.t_count);
  const WeakTypeReport rep = weak_type_scan(K, cfg.family.name, funcs, params, grid, cfg.sampler, scan);

  json sum = summary_head(cfg);
  sum["family"] = cfg.family.name;
  sum["kernel"] = {{"name", cfg.kernel.name}, {"truncation", K.truncation ? *K.truncation : 0}};
  sum["samples"] = {{"outer", w.outer}, {"inner", w.inner}, {"pipeline_outer", w.pipeline_outer},
                    {"pipeline_inner", w.pipeline_inner}};
  Csv profile(out / "weaktype_profile.csv",
              {"member", "parameter", "t", "lambda", "lambda_se", "t_lambda_over_l1", "seed", "outer", "inner"});
  Csv members(out / "weaktype_members.csv",
              {"member", "parameter", "label", "l1_norm", "sup_ratio", "argmax_t", "pf_l1", "pf_l1_se",
               "markov_violations", "small_t_violations", "divergent_points", "seed", "outer", "inner"});
  std::size_t divergent = 0;
  bool fail_scan = !rep.finite() || !(rep.trend < w.max_trend);
  for (std::size_t i = 0; i < rep.members.size(); ++i) {
    const WeakTypeMember& m = rep.members[i];
    divergent += m.divergent_points;
    if (m.small_t_violations || m.markov_violations) fail_scan = true;
    for (std::size_t k = 0; k < grid.size(); ++k)
      profile.row({num(static_cast<std::uint64_t>(i)), num(m.parameter), num(grid[k]), num(m.profile.lambda[k]),
                   num(m.profile.lambda_se[k]), num(m.l1_norm > 0.0 ? grid[k] * m.profile.lambda[k] / m.l1_norm : 0.0),
                   sampler_seed(cfg), num(static_cast<std::uint64_t>(w.outer)), num(static_cast<std::uint64_t>(w.inner))});
    members.row({num(static_cast<std::uint64_t>(i)), num(m.parameter), m.label, num(m.l1_norm), num(m.sup_ratio),
                 num(m.argmax_t), num(m.pf_l1), num(m.pf_l1_se), num(static_cast<std::uint64_t>(m.markov_violations)),
                 num(static_cast<std::uint64_t>(m.small_t_violations)), num(static_cast<std::uint64_t>(m.divergent_points)),
                 sampler_seed(cfg), num(static_cast<std::uint64_t>(w.outer)), num(static_cast<std::uint64_t>(w.inner))});
    sum["scan"]["members"].push_back({{"parameter", m.parameter},
                                      {"label", m.label},
                                      {"l1_norm", m.l1_norm},
                                      {"sup_ratio", m.sup_ratio},
                                      {"argmax_t", m.argmax_t},
                                      {"markov_violations", m.markov_violations},
                                      {"small_t_violations", m.small_t_violations},
                                      {"divergent_points", m.divergent_points}});
  }
  sum["scan"]["trend"] = rep.trend;
  sum["scan"]["max_trend"] = w.max_trend;
  sum["scan"]["pass"] = !fail_scan;

  PipelineOptions po;
  po.czd = cfg.czd.options;
  po.scan.outer = w.pipeline_outer;
  po.scan.inner.samples = w.pipeline_inner;
  po.scan.inner.local_fraction = w.local_fraction;
  po.gradient_pairs = w.gradient_pairs;
  po.hormander_samples = w.hormander_samples;
  po.hormander_cubes = w.hormander_cubes;
  po.grid_points = w.grid_points;
  DyadicSystem sys(cfg.dyadic.config(n));
  Csv stages(out / "pipeline_stages.csv",
             {"member", "parameter", "t", "stage", "lhs", "lhs_se", "rhs", "margin", "pass", "seed", "outer", "inner"});
  Csv pipe(out / "pipeline.csv", {"member", "parameter", "t", "l1_norm", "stopping_cubes", "c1", "c2_gradient", "c3",
                                  "c3_dilation", "c4", "c_total", "omega", "omega_prime", "g_l2_sq", "b_l1",
                                  "lambda_pf", "lambda_pg_half", "lambda_pb_half", "final_ratio", "divergent_points",
                                  "pass", "seed"});
  bool fail_pipe = false;
  for (std::size_t i = 0; i < funcs.size(); ++i) {
    for (double t : w.pipeline_t) {
      if (t < funcs[i].l1_norm) continue;
      const PipelineReport r = cz_pipeline_check(K, funcs[i], t, sys, cfg.sampler, po);
      divergent += r.divergent_points;
      if (!r.pass()) fail_pipe = true;
      json rows = json::array();
      for (const StageRow& s : r.stages) {
        stages.row({num(static_cast<std::uint64_t>(i)), num(params[i]), num(t), s.stage, num(s.lhs), num(s.lhs_se),
                    num(s.rhs), num(s.margin), num(s.pass), sampler_seed(cfg),
                    num(static_cast<std::uint64_t>(w.pipeline_outer)), num(static_cast<std::uint64_t>(w.pipeline_inner))});
        rows.push_back(stage_json(s));
      }
      pipe.row({num(static_cast<std::uint64_t>(i)), num(params[i]), num(t), num(r.l1_norm),
                num(static_cast<std::uint64_t>(r.stopping_cubes)), num(r.c1), num(r.c2_gradient), num(r.c3_hat),
                num(r.c3_dilation), num(r.c4_hat), num(r.c_total), num(r.omega), num(r.omega_prime), num(r.g_l2_sq),
                num(r.b_l1), num(r.lambda_pf), num(r.lambda_pg_half), num(r.lambda_pb_half), num(r.final_ratio),
                num(static_cast<std::uint64_t>(r.divergent_points)), num(r.pass()), sampler_seed(cfg)});
      sum["pipeline"].push_back({{"member", i},
                                 {"parameter", params[i]},
                                 {"t", t},
                                 {"constants",
                                  {{"c1", r.c1},
                                   {"c2", r.c2_gradient},
                                   {"c3", r.c3_hat},
                                   {"c3_dilation", r.c3_dilation},
                                   {"c4", r.c4_hat},
                                   {"c_total", r.c_total}}},
                                 {"stopping_cubes", r.stopping_cubes},
                                 {"final_ratio", r.final_ratio},
                                 {"divergent_points", r.divergent_points},
                                 {"stages", rows},
                                 {"pass", r.pass()}});
    }
  }
  if (fail_scan || fail_pipe) res.exit_code = kInvariantFailure;
  if (divergent > 0) {
    res.exit_code = kEstimationFailure;
    res.message = std::to_string(divergent) + " projection integrals were flagged divergent";
  }
  sum["divergent_points"] = divergent;
  sum["status"] = res.exit_code == kPass ? "pass" : "fail";
  res.summary = sum;
  return res;
}

}  // namespace

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::invalid_input:
    case ErrorKind::unsupported:
    case ErrorKind::precondition:
      return kConfigError;
    case ErrorKind::construction:
    case ErrorKind::depth:
      return kInvariantFailure;
    case ErrorKind::estimation:
    case ErrorKind::kernel_evaluation:
    case ErrorKind::truncation:
    case ErrorKind::divergence:
      return kEstimationFailure;
  }
  return kInvariantFailure;
}

RunResult run_command(const RunConfig& cfg) {
  const fs::path out(cfg.output_dir);
  RunResult res;
  try {
    std::error_code ec;
    fs::create_directories(out, ec);
    require(!ec, ErrorKind::config, "cannot create output directory " + out.string());
    write_text(out / "resolved_config.json", cfg.to_json().dump(2) + "\n");
    switch (cfg.command) {
      case Command::dyadic: res = cmd_dyadic(cfg, out); break;
      case Command::czd: res = cmd_czd(cfg, out); break;
      case Command::kernel_bounds: res = cmd_kernel_bounds(cfg, out); break;
      case Command::weaktype: res = cmd_weaktype(cfg, out); break;
    }
  } catch (const Error& e) {
    res.exit_code = exit_code_for(e.kind());
    res.message = e.what();
    res.summary = summary_head(cfg);
    res.summary["status"] = "error";
    res.summary["error"] = e.what();
  }
  res.summary["exit_code"] = res.exit_code;
  if (!res.message.empty() && !res.summary.contains("error")) res.summary["message"] = res.message;
  try {
    write_text(out / "summary.json", res.summary.dump(2) + "\n");
  } catch (const Error& e) {
    if (res.exit_code == kPass) res.exit_code = kConfigError;
    res.message = e.what();
  }
  return res;
}

}  // namespace bergman::cli
