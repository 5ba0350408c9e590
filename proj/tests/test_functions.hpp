#pragma once

// Closed-form test functions shared by the unit and acceptance suites.

#include <cmath>
#include <string>
#include <vector>

#include "bergman/geometry.hpp"

namespace bergman::fixtures {

struct NamedFunction {
  std::string name;
  SmoothFunction f;
};

inline std::vector<NamedFunction> polynomial_family(int n) {
  std::vector<NamedFunction> out;
  auto zeros = [n] { return std::vector<complex>(static_cast<std::size_t>(n), 0.0); };

  out.push_back({"|x|^2", {n, [](const BallPoint& x) { return complex(x.norm_sq()); },
                           [n](const BallPoint& x) {
                             std::vector<complex> g(static_cast<std::size_t>(n));
                             for (int i = 0; i < n; ++i) g[i] = 2.0 * x[i];
                             return g;
                           },
                           [n](const BallPoint&) { return complex(2.0 * n); }}});

  out.push_back({"x1^3-3x1x2^2", {n, [](const BallPoint& x) {
                                    return complex(x[0] * x[0] * x[0] - 3.0 * x[0] * x[1] * x[1]);
                                  },
                                  [zeros](const BallPoint& x) {
                                    auto g = zeros();
                                    g[0] = 3.0 * x[0] * x[0] - 3.0 * x[1] * x[1];
                                    g[1] = -6.0 * x[0] * x[1];
                                    return g;
                                  },
                                  [](const BallPoint&) { return complex(0.0); }}});

  out.push_back({"x1^2x2", {n, [](const BallPoint& x) { return complex(x[0] * x[0] * x[1]); },
                            [zeros](const BallPoint& x) {
                              auto g = zeros();
                              g[0] = 2.0 * x[0] * x[1];
                              g[1] = x[0] * x[0];
                              return g;
                            },
                            [](const BallPoint& x) { return complex(2.0 * x[1]); }}});

  out.push_back({"|x|^4", {n, [](const BallPoint& x) { return complex(x.norm_sq() * x.norm_sq()); },
                           [n](const BallPoint& x) {
                             std::vector<complex> g(static_cast<std::size_t>(n));
                             for (int i = 0; i < n; ++i) g[i] = 4.0 * x.norm_sq() * x[i];
                             return g;
                           },
                           [n](const BallPoint& x) { return complex(4.0 * x.norm_sq() * (2.0 + n)); }}});

  const complex I(0.0, 1.0);
  out.push_back({"i*x1x2+x1^4", {n, [I](const BallPoint& x) { return I * x[0] * x[1] + std::pow(x[0], 4); },
                                 [zeros, I](const BallPoint& x) {
                                   auto g = zeros();
                                   g[0] = I * x[1] + 4.0 * x[0] * x[0] * x[0];
                                   g[1] = I * x[0];
                                   return g;
                                 },
                                 [](const BallPoint& x) { return complex(12.0 * x[0] * x[0]); }}});
  return out;
}

// ((1-|x|^2)/|x-zeta|^2)^(n-1), annihilated by the invariant Laplacian.
inline SmoothFunction hyperbolic_poisson(const Vec& zeta) {
  const int n = zeta.n;
  SmoothFunction f;
  f.dim = n;
  f.value = [zeta, n](const BallPoint& x) {
    const double q = (1.0 - x.norm_sq()) / distance_sq(x.vec(), zeta);
    return complex(std::pow(q, n - 1));
  };
  return f;
}

}  // namespace bergman::fixtures
