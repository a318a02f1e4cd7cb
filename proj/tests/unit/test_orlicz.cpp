// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mslab/error.hpp"
#include "mslab/orlicz.hpp"

using namespace mslab;

namespace {

// Composite Simpson rule, used as an independent check of the integrals.
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("phi closed forms") {
  const double e = std::numbers::e;
  for (double a : {0.5, 1.0, 2.0, 3.3}) CHECK(phi(1.0, a) == 1.0);
  CHECK(phi(e, 1.0) == doctest::Approx(2.0 * e).epsilon(1e-15));
  CHECK(phi(e * e, 2.0) == doctest::Approx(9.0 * std::pow(e, 4)).epsilon(1e-14));
  CHECK(phi(0.0, 2.0) == 0.0);
  CHECK_THROWS_AS(phi(-1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(phi(1.0, 0.0), ConfigError);
  for (double t = 1e-3; t < 1e3; t *= 1.7) CHECK(phi(t, 1.5) >= std::pow(t, 1.5));
}

TEST_CASE("phibar1 closed forms") {
  CHECK(phibar1(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(phibar1(2.0, 1.0) == doctest::Approx(0.5 + std::numbers::e - 1.0).epsilon(1e-10));
  CHECK(phibar1(0.0, 2.0) == 0.0);
  CHECK(phibar1(0.5, 2.0) == doctest::Approx(std::pow(0.5, 1.5) * 2.0 / 3.0).epsilon(1e-12));
  for (double t : {1.5, 3.0, 7.0}) {
    const double ref = 2.0 / 3.0 + simpson([](double s) { return std::exp(std::sqrt(s) - 1.0); }, 1.0, t);
    CHECK(phibar1(t, 2.0) == doctest::Approx(ref).epsilon(1e-10));
  }
  CHECK(std::isinf(phibar1(800.0, 1.0)));
}

TEST_CASE("phi1 against direct integration of its density") {
  for (double a : {1.0, 2.0}) {
    for (double t : {0.3, 1.0, 2.5, 10.0}) {
      const double ref = simpson([a](double s) { return phi1_density(s, a); }, 0.0, t);
      CHECK(phi1(t, a) == doctest::Approx(ref).epsilon(1e-9));
    }
  }
}

TEST_CASE("equivalence sandwich on a log grid") {
  for (double a : {1.0, 2.0}) {
    for (int i = 0; i <= 1000; ++i) {
      const double t = std::pow(10.0, -6.0 + 12.0 * i / 1000.0);
      const double p1 = phi1(t, a), p0 = phi0(t, a);
      CHECK(p1 <= p0 * (1 + 1e-12));
      CHECK(p0 <= (1.0 + a) * p1 * (1 + 1e-12));
    }
  }
}

TEST_CASE("Young functions are increasing and convex") {
  for (auto kind : {YoungKind::phi, YoungKind::phi0, YoungKind::phi1, YoungKind::phibar1}) {
    const YoungFn Y{kind, 1.5};
    CHECK(Y(0.0) == 0.0);
    double prev = 0.0;
    for (double t = 0.01; t < 20.0; t *= 1.3) {
      const double v = Y(t);
      CHECK(v > prev);
      prev = v;
      const double h = 0.1 * t;
      CHECK(Y(t) <= 0.5 * (Y(t - h) + Y(t + h)) * (1 + 1e-12));
    }
  }
  CHECK(young_kind_from_name("phibar1") == YoungKind::phibar1);
  CHECK(young_kind_name(YoungKind::phi0) == "phi0");
  CHECK_THROWS_AS(young_kind_from_name("psi"), ConfigError);
}

TEST_CASE("phi is submultiplicative") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (double a : {1.0, 2.0, 1.5}) {
    for (int i = 0; i < 20000; ++i) {
      const double s = std::exp(u(rng)), t = std::exp(u(rng));
      CHECK(phi(s * t, a) <= phi(s, a) * phi(t, a) * (1 + 1e-12));
    }
  }
}

TEST_CASE("Luxemburg norms") {
  for (auto kind : {YoungKind::phi, YoungKind::phi0}) {
    for (double c : {0.01, 1.0, 7.5}) {
      const std::vector<double> s(13, c);
      CHECK(luxemburg_norm(s, YoungFn{kind, 2.0}) == doctest::Approx(c).epsilon(1e-8));
    }
  }
  CHECK(luxemburg_norm(std::vector<double>(5, 0.0), YoungFn{}) == 0.0);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> f(20), twice(20), bigger(20);
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = u(rng);
      twice[i] = 2.0 * f[i];
      bigger[i] = f[i] + u(rng);
    }
    for (auto kind : {YoungKind::phi, YoungKind::phi1, YoungKind::phibar1}) {
      const YoungFn Y{kind, 1.0};
      const double n1 = luxemburg_norm(f, Y);
      CHECK(luxemburg_norm(twice, Y) == doctest::Approx(2.0 * n1).epsilon(1e-9));
      CHECK(luxemburg_norm(bigger, Y) >= n1 * (1 - 1e-9));
      // Defining property at the returned value.
      double m = 0.0;
      for (double x : f) m += Y(x / n1);
      CHECK(m / 20.0 == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("Young pair inequality") {
  const auto zero = young_pair_check(0.0, 3.0, 1.0);
  CHECK_FALSE(zero.violated);
  CHECK(zero.slack == doctest::Approx(phibar1(3.0, 1.0)).epsilon(1e-12));
  for (double a : {1.0, 2.0}) {
    for (double s : {0.2, 0.9, 1.0, 2.0, 6.0}) {
      const auto eq = young_pair_check(s, phi1_density(s, a), a);
      CHECK(std::abs(eq.slack) < 1e-9 * std::max(1.0, s * phi1_density(s, a)));
    }
  }
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (double a : {1.0, 2.0}) {
    for (int i = 0; i < 20000; ++i) CHECK_FALSE(young_pair_check(u(rng), u(rng), a).violated);
  }
}

TEST_CASE("Orlicz Hoelder inequality") {
  CHECK(orlicz_holder_check(std::vector<double>(4, 0.0), std::vector<double>(4, 1.0), 1.0).ratio == 0.0);
  const auto ones = orlicz_holder_check(std::vector<double>(4, 1.0), std::vector<double>(4, 1.0), 1.0);
  CHECK(ones.ratio <= 1.0);
  CHECK(ones.consistent);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> f(16), g(16);
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = u(rng);
      g[i] = u(rng);
    }
    CHECK(orlicz_holder_check(f, g, trial % 2 ? 1.0 : 2.0).ratio <= 1.0 + 1e-9);
  }
}
