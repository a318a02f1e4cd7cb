// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

// Shared helpers for the unit tests: seeded random fields and small oracles
// written independently of the library code paths.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "mslab/grid.hpp"

namespace mslab::test {

inline std::vector<cplx> random_values(std::size_t n, std::mt19937_64& rng, bool real = false) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<cplx> v(n);
  for (auto& z : v) z = real ? cplx(normal(rng), 0.0) : cplx(normal(rng), normal(rng));
  return v;
}

inline SampledField random_field(const Grid& g, std::mt19937_64& rng, bool real = false) {
  return SampledField(g, random_values(g.size(), rng, real));
}

inline SampledField random_positive(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(g.size());
  for (auto& x : v) x = u(rng);
  return SampledField::from_real(g, v, FieldKind::nonnegative_real);
}

// Real trigonometric polynomial of degree deg in dim 1 (band-limited on the
// grid when deg < N/2).
inline SampledField random_trig(const Grid& g, int deg, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> a(deg + 1), b(deg + 1);
  for (int k = 0; k <= deg; ++k) {
    a[k] = normal(rng);
    b[k] = normal(rng);
  }
  const double L = g.box_length();
  return SampledField::from_function(g, [&](const Point& x) {
    double s = 0.0;
    for (int k = 1; k <= deg; ++k) {
      const double w = 2.0 * std::numbers::pi * k * x[0] / L;
      s += a[k] * std::cos(w) + b[k] * std::sin(w);
    }
    return cplx(s, 0.0);
  });
}

// Naive O(N^2) DFT in dim 1 with the library's continuum normalization.
inline std::vector<cplx> naive_forward_1d(const Grid& g, const std::vector<cplx>& f) {
  const int n = g.points_per_axis();
  const double dx = g.spacing();
  std::vector<cplx> out(n);
  for (int k = 0; k < n; ++k) {
    const double xi = g.frequency(k);
    cplx s = 0.0;
    for (int j = 0; j < n; ++j) s += f[j] * std::polar(1.0, -2.0 * std::numbers::pi * j * dx * xi);
    out[k] = s * dx;
  }
  return out;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace mslab::test
