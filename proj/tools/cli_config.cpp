#include "cli_config.hpp"

#include <cmath>
#include <set>

#include "bergman/errors.hpp"

namespace bergman::cli {

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) { fail(ErrorKind::config, path + ": " + what); }

// Strict reader: every key must be consumed, types must match.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_, "expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!j_.contains(key)) return;
    seen_.insert(key);
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw std::runtime_error("expected a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw std::runtime_error("expected an integer");
        if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)
          throw std::runtime_error("expected a non-negative integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw std::runtime_error("expected a number");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw std::runtime_error("expected a string");
      }
      out = v.get<T>();
    } catch (const std::exception& e) {
      bad(path_ + "." + key, e.what());
    }
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) bad(path_, "unknown key '" + it.key() + "'");
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> number_list(const json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array of numbers");
  std::vector<double> out;
  for (const json& v : j) {
    if (!v.is_number()) bad(path, "expected an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

json complex_json(complex c) { return c.imag() == 0.0 ? json(c.real()) : json::array({c.real(), c.imag()}); }

complex complex_from(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) return {j[0].get<double>(), j[1].get<double>()};
  bad(path, "expected a number or [re, im]");
}

Vec vec_from(const json& j, int n, const std::string& path) {
  const std::vector<double> v = number_list(j, path);
  if (static_cast<int>(v.size()) != n) bad(path, "expected " + std::to_string(n) + " coordinates");
  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = v[static_cast<std::size_t>(i)];
  return out;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.n; ++i) a.push_back(v[i]);
  return a;
}

json spike_json(const json& j, int n, const std::string& path) {
  Section s(j, path);
  json out;
  out["center"] = vec_json(vec_from(s.raw("center"), n, path + ".center"));
  double r = 0.0;
  s.get("radius", r);
  out["radius"] = r;
  out["height"] = s.has("height") ? complex_json(complex_from(s.raw("height"), path + ".height")) : json(1.0);
  s.finish();
  return out;
}

// Fills defaults and orders keys so that emitted members parse back identically.
json normalize_member(const json& j, int n, std::size_t index) {
  const std::string path = "family.members[" + std::to_string(index) + "]";
  Section s(j, path);
  std::string type;
  s.get("type", type);
  json out;
  out["type"] = type;
  double parameter = static_cast<double>(index + 1);
  if (type == "zero") {
  } else if (type == "constant") {
    out["value"] = s.has("value") ? complex_json(complex_from(s.raw("value"), path + ".value")) : json(1.0);
  } else if (type == "spike" || type == "smooth-bump") {
    out["center"] = vec_json(vec_from(s.raw("center"), n, path + ".center"));
    double r = 0.0;
    s.get("radius", r);
    out["radius"] = r;
    out["height"] = s.has("height") ? complex_json(complex_from(s.raw("height"), path + ".height")) : json(1.0);
    parameter = r;
  } else if (type == "sum-of-spikes") {
    if (!s.has("spikes") || !s.raw("spikes").is_array()) bad(path + ".spikes", "expected an array");
    json parts = json::array();
    std::size_t k = 0;
    for (const json& p : s.raw("spikes")) parts.push_back(spike_json(p, n, path + ".spikes[" + std::to_string(k++) + "]"));
    out["spikes"] = parts;
  } else if (type == "radial-table") {
    out["radii"] = number_list(s.raw("radii"), path + ".radii");
    json vals = json::array();
    if (!s.raw("values").is_array()) bad(path + ".values", "expected an array");
    for (const json& v : s.raw("values")) vals.push_back(complex_json(complex_from(v, path + ".values")));
    out["values"] = vals;
  } else if (type == "concentrating") {
    out["center"] = vec_json(vec_from(s.raw("center"), n, path + ".center"));
    double eps = 0.0;
    s.get("eps", eps);
    out["eps"] = eps;
    parameter = eps;
  } else {
    bad(path + ".type", "unknown member type '" + type + "'");
  }
  s.get("parameter", parameter);
  out["parameter"] = parameter;
  s.finish();
  return out;
}

json kernel_json(const KernelSection& k) { return {{"name", k.name}, {"truncation", k.truncation}}; }

KernelSection kernel_from(const json& j, const std::string& path) {
  KernelSection k;
  Section s(j, path);
  s.get("name", k.name);
  s.get("truncation", k.truncation);
  s.finish();
  return k;
}

json spike_member(const Vec& c, double eps, double height) {
  return {{"type", "spike"}, {"center", vec_json(c)}, {"radius", eps}, {"height", height}, {"parameter", eps}};
}

}  // namespace

const char* to_string(Command c) noexcept {
  switch (c) {
    case Command::dyadic: return "dyadic";
    case Command::czd: return "czd";
    case Command::kernel_bounds: return "kernel-bounds";
    case Command::weaktype: return "weaktype";
  }
  return "?";
}

Command command_from_string(const std::string& s) {
  for (Command c : {Command::dyadic, Command::czd, Command::kernel_bounds, Command::weaktype})
    if (s == to_string(c)) return c;
  fail(ErrorKind::config, "unknown command '" + s + "'");
}

DyadicConfig DyadicSection::config(int n) const {
  DyadicConfig c;
  c.dimension = n;
  c.eta = eta;
  c.kappa0 = kappa0;
  c.kappa1 = kappa1;
  c.max_level = depth;
  c.net_resolution = net_resolution;
  c.seed = seed;
  c.validate();
  return c;
}

json RunConfig::to_json() const {
  json j;
  j["schema_version"] = schema_version;
  j["command"] = to_string(command);
  j["dimension"] = dimension;
  j["sampler"] = {{"seed", sampler.seed},
                  {"scheme", bergman::to_string(sampler.scheme)},
                  {"batch", sampler.batch},
                  {"workers", sampler.workers}};
  j["dyadic"] = {{"triple", dyadic.triple},
                 {"eta", dyadic.eta},
                 {"kappa0", dyadic.kappa0},
                 {"kappa1", dyadic.kappa1},
                 {"depth", dyadic.depth},
                 {"net_resolution", dyadic.net_resolution},
                 {"seed", dyadic.seed},
                 {"max_refined_per_level", dyadic.max_refined_per_level},
                 {"snapshot_in", dyadic.snapshot_in},
                 {"verify_points", dyadic.verify_points},
                 {"inner_probes", dyadic.inner_probes},
                 {"determinism_check", dyadic.determinism_check}};
  j["kernel"] = kernel_json(kernel);
  j["kernel_sweep"] = json::array();
  for (const KernelSection& k : kernel_sweep) j["kernel_sweep"].push_back(kernel_json(k));
  j["family"] = {{"name", family.name}, {"members", family.members}};
  j["thresholds"] = thresholds;
  const CzdOptions& o = czd.options;
  j["czd"] = {{"samples", o.samples},
              {"max_samples", o.max_samples},
              {"z", o.z},
              {"ratio_samples", o.ratio_samples},
              {"seed", o.seed},
              {"max_level", o.max_level},
              {"clause_points", czd.clause_points},
              {"mean_zero_samples", czd.mean_zero_samples},
              {"l2_samples", czd.l2_samples},
              {"omega_samples", czd.omega_samples}};
  const KernelBoundsSection& b = kernel_bounds;
  j["kernel_bounds"] = {{"pairs", b.pairs},
                        {"near_diagonal_fraction", b.near_diagonal_fraction},
                        {"max_drift", b.max_drift},
                        {"hormander_cubes", b.hormander_cubes},
                        {"hormander_samples", b.hormander_samples},
                        {"hormander_depth", b.hormander_depth},
                        {"tail_distances", b.tail_distances}};
  const WeaktypeSection& w = weaktype;
  j["weaktype"] = {{"t_grid", {{"lo", w.t_lo}, {"hi", w.t_hi}, {"count", w.t_count}}},
                   {"outer", w.outer},
                   {"inner", w.inner},
                   {"local_fraction", w.local_fraction},
                   {"max_trend", w.max_trend},
                   {"pipeline_t", w.pipeline_t},
                   {"pipeline_outer", w.pipeline_outer},
                   {"pipeline_inner", w.pipeline_inner},
                   {"gradient_pairs", w.gradient_pairs},
                   {"hormander_samples", w.hormander_samples},
                   {"hormander_cubes", w.hormander_cubes},
                   {"grid_points", w.grid_points}};
  j["output"] = {{"dir", output_dir}};
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  Section top(j, "config");
  RunConfig c;
  top.get("schema_version", c.schema_version);
  if (c.schema_version != kSchemaVersion)
    bad("schema_version", "unsupported version " + std::to_string(c.schema_version));
  std::string cmd = to_string(c.command);
  top.get("command", cmd);
  c.command = command_from_string(cmd);
  c = default_config(c.command);
  top.get("dimension", c.dimension);
  if (c.dimension < 2 || c.dimension > 5) bad("dimension", "must lie in 2..5");

  if (top.has("sampler")) {
    Section s(top.raw("sampler"), "sampler");
    s.get("seed", c.sampler.seed);
    std::string scheme = bergman::to_string(c.sampler.scheme);
    s.get("scheme", scheme);
    c.sampler.scheme = scheme_from_string(scheme);
    s.get("batch", c.sampler.batch);
    s.get("workers", c.sampler.workers);
    s.finish();
  }

  if (top.has("dyadic")) {
    Section s(top.raw("dyadic"), "dyadic");
    DyadicSection& d = c.dyadic;
    s.get("triple", d.triple);
    if (d.triple == "reference") {
      const DyadicConfig p = DyadicConfig::reference_triple(c.dimension, d.depth);
      d.eta = p.eta;
      d.kappa0 = p.kappa0;
      d.kappa1 = p.kappa1;
      d.net_resolution = p.net_resolution;
    } else if (d.triple != "practical" && d.triple != "custom") {
      bad("dyadic.triple", "expected practical, reference or custom");
    }
    const double eta = d.eta, k0 = d.kappa0, k1 = d.kappa1;
    s.get("eta", d.eta);
    s.get("kappa0", d.kappa0);
    s.get("kappa1", d.kappa1);
    if (d.triple != "custom" && (d.eta != eta || d.kappa0 != k0 || d.kappa1 != k1))
      bad("dyadic", "eta/kappa0/kappa1 conflict with the named triple; use triple = custom");
    s.get("depth", d.depth);
    s.get("net_resolution", d.net_resolution);
    s.get("seed", d.seed);
    s.get("max_refined_per_level", d.max_refined_per_level);
    s.get("snapshot_in", d.snapshot_in);
    s.get("verify_points", d.verify_points);
    s.get("inner_probes", d.inner_probes);
    s.get("determinism_check", d.determinism_check);
    s.finish();
  }

  if (top.has("kernel")) c.kernel = kernel_from(top.raw("kernel"), "kernel");
  if (top.has("kernel_sweep")) {
    const json& a = top.raw("kernel_sweep");
    if (!a.is_array()) bad("kernel_sweep", "expected an array");
    c.kernel_sweep.clear();
    for (std::size_t i = 0; i < a.size(); ++i) c.kernel_sweep.push_back(kernel_from(a[i], "kernel_sweep[" + std::to_string(i) + "]"));
  }

  if (top.has("family")) {
    Section s(top.raw("family"), "family");
    s.get("name", c.family.name);
    if (s.has("members")) {
      const json& a = s.raw("members");
      if (!a.is_array()) bad("family.members", "expected an array");
      c.family.members.clear();
      for (std::size_t i = 0; i < a.size(); ++i) c.family.members.push_back(normalize_member(a[i], c.dimension, i));
    }
    s.finish();
  }
  for (std::size_t i = 0; i < c.family.members.size(); ++i)
    c.family.members[i] = normalize_member(c.family.members[i], c.dimension, i);

  if (top.has("thresholds")) c.thresholds = number_list(top.raw("thresholds"), "thresholds");

  if (top.has("czd")) {
    Section s(top.raw("czd"), "czd");
    CzdOptions& o = c.czd.options;
    s.get("samples", o.samples);
    s.get("max_samples", o.max_samples);
    s.get("z", o.z);
    s.get("ratio_samples", o.ratio_samples);
    s.get("seed", o.seed);
    s.get("max_level", o.max_level);
    s.get("clause_points", c.czd.clause_points);
    s.get("mean_zero_samples", c.czd.mean_zero_samples);
    s.get("l2_samples", c.czd.l2_samples);
    s.get("omega_samples", c.czd.omega_samples);
    s.finish();
  }

  if (top.has("kernel_bounds")) {
    Section s(top.raw("kernel_bounds"), "kernel_bounds");
    KernelBoundsSection& b = c.kernel_bounds;
    s.get("pairs", b.pairs);
    s.get("near_diagonal_fraction", b.near_diagonal_fraction);
    s.get("max_drift", b.max_drift);
    s.get("hormander_cubes", b.hormander_cubes);
    s.get("hormander_samples", b.hormander_samples);
    s.get("hormander_depth", b.hormander_depth);
    if (s.has("tail_distances")) b.tail_distances = number_list(s.raw("tail_distances"), "kernel_bounds.tail_distances");
    s.finish();
  }

  if (top.has("weaktype")) {
    Section s(top.raw("weaktype"), "weaktype");
    WeaktypeSection& w = c.weaktype;
    if (s.has("t_grid")) {
      Section g(s.raw("t_grid"), "weaktype.t_grid");
      g.get("lo", w.t_lo);
      g.get("hi", w.t_hi);
      g.get("count", w.t_count);
      g.finish();
    }
    s.get("outer", w.outer);
    s.get("inner", w.inner);
    s.get("local_fraction", w.local_fraction);
    s.get("max_trend", w.max_trend);
    if (s.has("pipeline_t")) w.pipeline_t = number_list(s.raw("pipeline_t"), "weaktype.pipeline_t");
    s.get("pipeline_outer", w.pipeline_outer);
    s.get("pipeline_inner", w.pipeline_inner);
    s.get("gradient_pairs", w.gradient_pairs);
    s.get("hormander_samples", w.hormander_samples);
    s.get("hormander_cubes", w.hormander_cubes);
    s.get("grid_points", w.grid_points);
    s.finish();
  }

  if (top.has("output")) {
    Section s(top.raw("output"), "output");
    s.get("dir", c.output_dir);
    s.finish();
  }
  top.finish();
  c.validate();
  return c;
}

void RunConfig::validate() const {
  try {
    sampler.validate();
    (void)dyadic.config(dimension);
  } catch (const Error& e) {
    fail(ErrorKind::config, e.what());
  }
  if (dyadic.verify_points == 0) bad("dyadic.verify_points", "must be positive");
  if (dyadic.inner_probes < 0) bad("dyadic.inner_probes", "must be non-negative");
  for (const KernelSection& k : kernel_sweep.empty() ? std::vector<KernelSection>{kernel} : kernel_sweep) {
    if (k.name != "disk" && k.name != "harmonic" && k.name != "constant" && k.name != "h-harmonic-series")
      bad("kernel.name", "unknown kernel '" + k.name + "'");
    if (k.name == "disk" && dimension != 2) bad("kernel", "the disk kernel needs dimension 2");
    if (k.truncation < 0) bad("kernel.truncation", "must be non-negative");
  }
  for (double t : thresholds)
    if (!(t > 0.0) || !std::isfinite(t)) bad("thresholds", "thresholds must be positive");
  if (czd.clause_points == 0 || czd.l2_samples == 0 || czd.omega_samples == 0 || czd.mean_zero_samples == 0)
    bad("czd", "sample counts must be positive");
  if (czd.options.samples == 0 || czd.options.max_samples < czd.options.samples) bad("czd", "need 0 < samples <= max_samples");
  const KernelBoundsSection& b = kernel_bounds;
  if (b.pairs < 2) bad("kernel_bounds.pairs", "need at least two pairs");
  if (b.near_diagonal_fraction < 0.0 || b.near_diagonal_fraction > 1.0)
    bad("kernel_bounds.near_diagonal_fraction", "must lie in [0, 1]");
  if (!(b.max_drift > 0.0)) bad("kernel_bounds.max_drift", "must be positive");
  if (b.hormander_depth < 3) bad("kernel_bounds.hormander_depth", "must be at least 3");
  for (double d : b.tail_distances)
    if (!(d > 0.0)) bad("kernel_bounds.tail_distances", "distances must be positive");
  const WeaktypeSection& w = weaktype;
  if (!(w.t_lo > 0.0) || !(w.t_hi > w.t_lo) || w.t_count < 2) bad("weaktype.t_grid", "need 0 < lo < hi and count >= 2");
  if (w.outer == 0 || w.inner < 64 || w.pipeline_outer == 0 || w.pipeline_inner < 64)
    bad("weaktype", "outer must be positive and inner at least 64");
  if (!(w.local_fraction >= 0.0 && w.local_fraction < 1.0)) bad("weaktype.local_fraction", "must lie in [0, 1)");
  if (!(w.max_trend > 0.0)) bad("weaktype.max_trend", "must be positive");
  for (double t : w.pipeline_t)
    if (!(t > 0.0)) bad("weaktype.pipeline_t", "thresholds must be positive");
}

RunConfig default_config(Command c) {
  RunConfig r;
  r.command = c;
  const Vec x0{0.2, 0.0};
  switch (c) {
    case Command::dyadic:
      r.family.name = "none";
      break;
    case Command::czd:
      r.family.name = "spike";
      for (double eps : {0.3, 0.1, 0.03, 0.01}) r.family.members.push_back(spike_member(x0, eps, 1.0 / (eps * eps)));
      r.thresholds = {1.5, 2.0, 4.0, 8.0};
      break;
    case Command::kernel_bounds:
      r.family.name = "none";
      break;
    case Command::weaktype:
      r.family.name = "concentrating";
      for (double eps : {0.1, 0.03, 0.01, 0.003})
        r.family.members.push_back({{"type", "concentrating"}, {"center", {0.9, 0.0}}, {"eps", eps}, {"parameter", eps}});
      r.thresholds = {2.0};
      break;
  }
  return r;
}

double member_parameter(const json& spec) { return spec.at("parameter").get<double>(); }

IntegrableFunction build_member(const json& spec, int n, const SamplerConfig& cfg) {
  const std::string type = spec.at("type").get<std::string>();
  const std::string path = "family member";
  auto spike_of = [&](const json& s) {
    return SpikeSpec{vec_from(s.at("center"), n, path), s.at("radius").get<double>(), complex_from(s.at("height"), path)};
  };
  try {
    if (type == "zero") return zero_function(n);
    if (type == "constant") return constant_function(n, complex_from(spec.at("value"), path));
    if (type == "spike") return spike(spike_of(spec), cfg);
    if (type == "smooth-bump")
      return smooth_bump(vec_from(spec.at("center"), n, path), spec.at("radius").get<double>(),
                         complex_from(spec.at("height"), path), cfg);
    if (type == "sum-of-spikes") {
      std::vector<SpikeSpec> parts;
      for (const json& s : spec.at("spikes")) parts.push_back(spike_of(s));
      return sum_of_spikes(parts, cfg);
    }
    if (type == "radial-table") {
      std::vector<complex> vals;
      for (const json& v : spec.at("values")) vals.push_back(complex_from(v, path));
      return radial_table(n, spec.at("radii").get<std::vector<double>>(), vals);
    }
    if (type == "concentrating") {
      // chi_B(x0, eps) / nu(B(x0, eps)), with nu(B(x0, eps)) = eps^n
      const double eps = spec.at("eps").get<double>();
      IntegrableFunction f = spike({vec_from(spec.at("center"), n, path), eps, 1.0 / std::pow(eps, n)}, cfg);
      f.family = "concentrating";
      return f;
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::invalid_input) fail(ErrorKind::config, std::string("family member: ") + e.what());
    throw;
  }
  fail(ErrorKind::config, "unknown member type '" + type + "'");
}

}  // namespace bergman::cli
