#pragma once

#include <compare>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "bergman/geometry.hpp"
#include "bergman/quadrature.hpp"

namespace bergman {

struct DyadicConfig {
  int dimension = 2;
  double eta = 0.5;
  double kappa0 = 1.0 / 12.0;
  double kappa1 = 4.0;
  int max_level = 6;
  // Expected candidate samples per child cell (a ball of radius eta^(k+1)).
  int net_resolution = 64;
  std::uint64_t seed = 1;

  void validate() const;

  // (1/2, 1/12, 4): desk-scale default for experiments.
  static DyadicConfig practical(int n, int max_level);
  // (1/96, 1/12, 4): the reference triple for the Euclidean ball.
  static DyadicConfig reference_triple(int n, int max_level);
};

struct CubeId {
  int level = 0;
  int index = 1;  // 1-based within its level

  friend auto operator<=>(const CubeId&, const CubeId&) = default;
};

inline constexpr CubeId kRoot{0, 1};

// Read-only view of a realized cube.
struct CubeInfo {
  CubeId id;
  BallPoint center;
  int parent_index = 0;  // index of the parent at level - 1 (0 for the root)
  double extent = 0.0;   // largest observed distance from the centre to a member sample
  bool refined = false;
  std::size_t child_count = 0;
};

// Lazily realized nested nets on the unit ball with closest-centre cubes.
//
// A level-(k+1) centre is accepted only when it lies at least eta^(k+1)/2
// from every ancestor cell boundary.  With the
// eta^(k+1) sibling separation this gives, for every realized cube,
// B(x, kappa0 eta^k) inside the cube (kappa0 < 1/2) and global eta^k
// separation of centres across different parents.
//
// Thread safety: locate() may be called concurrently and serializes its own
// refinements.  find(), contains(), cube() and the other const queries are
// safe concurrently with each other but not with refine()/locate().
class DyadicSystem {
 public:
  explicit DyadicSystem(const DyadicConfig& cfg);
  ~DyadicSystem();
  DyadicSystem(DyadicSystem&&) noexcept;
  DyadicSystem& operator=(DyadicSystem&&) noexcept;

  const DyadicConfig& config() const { return cfg_; }
  int dimension() const { return cfg_.dimension; }
  double scale(int level) const;         // eta^k
  double inner_radius(int level) const;  // kappa0 eta^k
  double outer_radius(int level) const;  // kappa1 eta^k (1 for the root)

  int realized_levels() const;
  std::size_t count(int level) const;
  CubeInfo cube(CubeId id) const;
  CubeId parent(CubeId id) const;
  std::vector<CubeId> children(CubeId id) const;
  bool is_refined(CubeId id) const;

  std::vector<CubeId> refine(CubeId id);
  void realize_to(int level);

  CubeId locate(const BallPoint& x, int level);
  // Deepest realized cube on x's path, capped at `level`.
  CubeId find(const BallPoint& x, int level) const;
  bool contains(CubeId id, const BallPoint& x) const;
  // Child of `id` (which must be refined) whose cell holds x; x must lie in `id`.
  CubeId child_containing(CubeId id, const BallPoint& x) const;

  // Stable identity of a cube (derived from its path), used to key sampling streams.
  std::uint64_t key(CubeId id) const;
  // Radius of the centred ball used to sample a cube's members.
  double sampling_radius(CubeId id) const;

  std::string snapshot() const;
  static DyadicSystem from_snapshot(std::string_view text);

  struct Node;
  struct Impl;

 private:
  DyadicSystem(const DyadicConfig& cfg, std::nullptr_t);  // root only, no refinement

  DyadicConfig cfg_;
  std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Measure estimation

struct MeasureEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long hits = 0;
  long samples = 0;
  bool warning = false;  // zero hits: the cube may be spurious
};

// nu(Q) by uniform sampling of a ball that contains Q and membership tests.
MeasureEstimate cube_measure(const DyadicSystem& sys, CubeId id, std::size_t samples, std::uint64_t seed);

struct ChildRatioReport {
  double value = 1.0;  // max nu(parent)/nu(child); 1 when nothing was probed
  double std_error = 0.0;
  CubeId worst_parent = kRoot;
  CubeId worst_child = kRoot;
  std::size_t pairs = 0;
  bool warning = false;
};

// Empirical C1 over the (parent, child) pairs of the given refined parents,
// the virtual root included when listed.
ChildRatioReport child_ratio_constant(const DyadicSystem& sys, const std::vector<CubeId>& parents,
                                      std::size_t samples, std::uint64_t seed);
// Every refined cube at levels 0 .. depth-1.
ChildRatioReport child_ratio_constant(const DyadicSystem& sys, int depth, std::size_t samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Invariant suites

struct DyadicVerification {
  std::size_t points = 0;
  std::size_t partition_rejects = 0;
  std::size_t nesting_violations = 0;
  std::size_t separation_violations = 0;
  std::size_t inner_violations = 0;
  std::size_t outer_violations = 0;
  std::size_t cubes_checked = 0;
  std::vector<std::size_t> located_per_level;  // points whose path reached level k
  double min_separation_ratio = 0.0;            // min over levels of (closest pair)/eta^k, capped at 2
  double max_outer_ratio = 0.0;                 // max over points of |x - c|/(kappa1 eta^k)

  bool partition_ok() const { return partition_rejects == 0; }
  bool nesting_ok() const { return nesting_violations == 0; }
  bool separation_ok() const { return separation_violations == 0; }
  bool sandwich_ok() const { return inner_violations == 0 && outer_violations == 0; }
  bool ok() const { return partition_ok() && nesting_ok() && separation_ok() && sandwich_ok(); }
};

// Checks partition, nesting, separation and both sandwich inclusions on the
// realized part of the system, using `points` plus `inner_probes` samples per
// cube drawn from its inscribed ball.
DyadicVerification verify(const DyadicSystem& sys, const std::vector<BallPoint>& points, int inner_probes,
                          std::uint64_t seed);

}  // namespace bergman
