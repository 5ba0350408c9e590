#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bergman/geometry.hpp"

namespace bergman {

enum class Scheme { low_discrepancy, pseudo_random };

const char* to_string(Scheme s) noexcept;
Scheme scheme_from_string(const std::string& s);

struct SamplerConfig {
  std::uint64_t seed = 20240917;
  Scheme scheme = Scheme::pseudo_random;
  // Reduction granularity.  Results depend on batch but never on workers.
  int batch = 4096;
  int workers = 1;

  void validate() const;
};

template <class T>
struct BasicEstimate {
  T value{};
  double std_error = 0.0;
  long samples = 0;
  long nonfinite = 0;
};

using Estimate = BasicEstimate<complex>;
using RealEstimate = BasicEstimate<double>;

inline RealEstimate real_part(const Estimate& e) {
  return {e.value.real(), e.std_error, e.samples, e.nonfinite};
}

// Streaming mean/variance (Welford), mergeable in a fixed order.
struct Accumulator {
  long count = 0;
  complex mean = 0.0;
  double m2 = 0.0;

  void add(complex x) {
    ++count;
    const complex delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += std::real(std::conj(delta) * (x - mean));
  }
  static Accumulator merge(const Accumulator& a, const Accumulator& b);
  double variance() const { return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0; }
};

// Runs fn(begin, end) over [0, count) in fixed-size chunks.  Chunk boundaries
// depend only on (count, chunk), so per-chunk outputs are schedule-independent.
void parallel_chunks(std::size_t count, std::size_t chunk, int workers,
                     const std::function<void(std::size_t chunk_index, std::size_t begin, std::size_t end)>& fn);

// Mean of values[i] produced by fn(i); skipping non-finite values (counted).
// Throws when more than 0.01% of the draws are non-finite.
Estimate estimate_mean(std::size_t count, const SamplerConfig& cfg,
                       const std::function<complex(std::size_t)>& fn, const char* what = "integrand");

// Uniform direction times r = u^(1/n); deterministic per (seed, stream, index).
BallPoint sample_ball_point(const SamplerConfig& cfg, int n, std::uint64_t stream, std::uint64_t index);
std::vector<BallPoint> sample_ball(const SamplerConfig& cfg, int n, std::size_t count, std::uint64_t stream = 0);

// Uniform point of the full Euclidean ball B(center, radius); the result may
// leave the unit ball.
Vec sample_in_ball(const Vec& center, double radius, Scheme scheme, std::uint64_t seed,
                   std::uint64_t stream, std::uint64_t index);

using BallFunction = std::function<complex(const BallPoint&)>;
using Membership = std::function<bool(const BallPoint&)>;

// Monte Carlo integral against nu (nu is a probability measure).
Estimate integrate(const BallFunction& f, int n, const SamplerConfig& cfg, std::size_t count,
                   std::uint64_t stream = 0);

struct RegionEstimate {
  Estimate integral;
  RealEstimate measure;
};

Estimate integrate_region_only(const BallFunction& f, const Membership& inside, int n, const SamplerConfig& cfg,
                               std::size_t count, std::uint64_t stream = 0);
RegionEstimate integrate_region(const BallFunction& f, const Membership& inside, int n, const SamplerConfig& cfg,
                                std::size_t count, std::uint64_t stream = 0);

// Nodes and weights of Gauss-Legendre on [0, 1] (weights sum to 1).
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre01(int m);

// Gauss-Legendre in s = r^2 times the trapezoid rule in angle on the unit
// disk; the error estimate is the difference against the half-node rule.
Estimate product_rule_disk(const BallFunction& f, int radial_nodes, int angular_nodes);

// Tensor rule for n = 3: Gauss-Legendre in r (weight 3r^2), Gauss-Legendre
// in cos(theta), trapezoid in phi.  Exact for polynomials of degree below
// min(2*radial-2, 2*polar-1, azimuthal).
Estimate product_rule_ball3(const BallFunction& f, int radial_nodes, int polar_nodes, int azimuthal_nodes);

}  // namespace bergman
