#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bergman/czd.hpp"
#include "bergman/dyadic.hpp"
#include "bergman/functions.hpp"
#include "bergman/kernels.hpp"
#include "bergman/projector.hpp"
#include "json.hpp"

namespace bergman::cli {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum class Command { dyadic, czd, kernel_bounds, weaktype };

const char* to_string(Command c) noexcept;
Command command_from_string(const std::string& s);

struct DyadicSection {
  std::string triple = "practical";  // practical, reference or custom
  double eta = 0.5;
  double kappa0 = 1.0 / 12.0;
  double kappa1 = 4.0;
  int depth = 6;
  int net_resolution = 64;
  std::uint64_t seed = 1;
  // Cubes refined per level beyond level 1, evenly spread by index; 0 refines all.
  std::size_t max_refined_per_level = 0;
  std::string snapshot_in;  // load instead of building
  std::size_t verify_points = 100000;
  int inner_probes = 64;
  bool determinism_check = true;

  DyadicConfig config(int n) const;
};

struct KernelSection {
  std::string name = "disk";
  int truncation = 12;
};

struct FamilySection {
  std::string name = "spike";
  std::vector<json> members;  // normalized member specs
};

struct CzdSection {
  CzdOptions options;
  std::size_t clause_points = 100000;
  std::size_t mean_zero_samples = 16000;
  std::size_t l2_samples = 20000;     // per support ball
  std::size_t omega_samples = 20000;  // per Omega' ball
};

struct KernelBoundsSection {
  std::size_t pairs = 1000000;
  double near_diagonal_fraction = 0.5;
  double max_drift = 0.05;
  std::size_t hormander_cubes = 50;
  std::size_t hormander_samples = 20000;
  int hormander_depth = 6;
  std::vector<double> tail_distances = {0.05, 0.1, 0.25, 0.5, 0.75, 0.9};
};

struct WeaktypeSection {
  double t_lo = 0.1;
  double t_hi = 100.0;
  int t_count = 13;
  std::size_t outer = 4000;
  std::size_t inner = 2000;
  double local_fraction = 0.5;
  double max_trend = 2.0;
  std::vector<double> pipeline_t = {2.0, 256.0};
  std::size_t pipeline_outer = 2000;
  std::size_t pipeline_inner = 1000;
  std::size_t gradient_pairs = 200000;
  std::size_t hormander_samples = 20000;
  std::size_t hormander_cubes = 24;
  int grid_points = 9;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  Command command = Command::weaktype;
  int dimension = 2;
  SamplerConfig sampler;
  DyadicSection dyadic;
  KernelSection kernel;
  std::vector<KernelSection> kernel_sweep;  // kernel-bounds; empty means {kernel}
  FamilySection family;
  std::vector<double> thresholds = {2.0};
  CzdSection czd;
  KernelBoundsSection kernel_bounds;
  WeaktypeSection weaktype;
  std::string output_dir = "out";

  json to_json() const;
  // Unknown keys, wrong types and unresolvable names raise ErrorKind::config.
  static RunConfig from_json(const json& j);
  void validate() const;
};

// Defaults for a command, including its standard family.
RunConfig default_config(Command c);

IntegrableFunction build_member(const json& spec, int n, const SamplerConfig& cfg);
double member_parameter(const json& spec);

}  // namespace bergman::cli
