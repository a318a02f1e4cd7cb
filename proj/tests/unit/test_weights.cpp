// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <random>

#include "mslab/error.hpp"
#include "mslab/weights.hpp"
#include "support.hpp"

using namespace mslab;

namespace {

// Direct scan over every window of side <= N (no wrap) in dim 1.
template <class F>
double brute_windows_1d(int n, bool dyadic, F stat) {
  double best = 0.0;
  for (int side = 1; side <= n; ++side) {
    if (dyadic && (side & (side - 1)) != 0) continue;
    for (int c = 0; c + side <= n; ++c) best = std::max(best, stat(c, side));
  }
  return best;
}

SampledField scaled(const SampledField& w, double c) {
  auto v = w.real_parts();
  for (auto& x : v) x *= c;
  return SampledField::from_real(w.grid(), v, FieldKind::nonnegative_real);
}

}  // namespace

TEST_CASE("power weights") {
  const Grid g(1, 64, 1.0);
  const auto one = power_weight(0.0, Point{0.3, 0.0}, g);
  for (double v : one.real_parts()) CHECK(v == 1.0);
  const auto lin = power_weight(1.0, Point{0.0, 0.0}, g);
  CHECK(lin[16].real() == doctest::Approx(0.25).epsilon(1e-15));  // x = 0.25
  CHECK(lin[48].real() == doctest::Approx(0.25).epsilon(1e-15));  // torus distance
  CHECK(lin[0].real() == doctest::Approx(0.5 * g.spacing()));
  CHECK_THROWS_AS(power_weight(10.0, Point{}, g), ConfigError);

  const auto spec = weight_from_spec("power:a=-0.5", g);
  CHECK(spec[32].real() == doctest::Approx(std::pow(0.5 * g.spacing(), -0.5)));
  CHECK(weight_from_spec("constant:c=4", g)[7].real() == 4.0);
  CHECK_THROWS_AS(weight_from_spec("power", g), ConfigError);
  CHECK_THROWS_AS(weight_from_spec("power:a=1,b=2", g), ConfigError);
  CHECK_THROWS_AS(weight_from_spec("gaussian", g), ConfigError);
  CHECK_THROWS_AS(weight_from_spec("constant:c=-1", g), ConfigError);
}

TEST_CASE("A_p characteristic against brute force") {
  const Grid g(1, 32, 1.0);
  const auto w = weight_from_spec("power:a=-0.4,x0=0.3", g);
  const auto v = w.real_parts();
  for (double p : {1.5, 2.0, 3.0}) {
    for (bool dyadic : {true, false}) {
      const double ref = brute_windows_1d(32, dyadic, [&](int c, int side) {
        double a = 0.0, b = 0.0;
        for (int i = c; i < c + side; ++i) {
          a += v[i];
          b += std::pow(v[i], -1.0 / (p - 1.0));
        }
        return (a / side) * std::pow(b / side, p - 1.0);
      });
      const auto rep = ap_characteristic(w, p, dyadic ? dyadic_windows() : all_windows());
      CHECK(rep.characteristic == doctest::Approx(ref).epsilon(1e-12));
      CHECK(rep.characteristic >= 1.0);
    }
  }
  const double a1_ref = brute_windows_1d(32, false, [&](int c, int side) {
    double a = 0.0, lo = v[c];
    for (int i = c; i < c + side; ++i) {
      a += v[i];
      lo = std::min(lo, v[i]);
    }
    return a / side / lo;
  });
  CHECK(a1_characteristic(w, all_windows()).characteristic == doctest::Approx(a1_ref).epsilon(1e-12));
  CHECK_THROWS_AS(ap_characteristic(w, 1.0, all_windows()), ConfigError);
}

TEST_CASE("A_p characteristic of constants and scaled weights") {
  const Grid g(2, 16, 1.0);
  for (double c : {1.0, 3.0, 1e-7}) {
    const auto w = SampledField::constant(g, c);
    CHECK(ap_characteristic(w, 2.0, all_windows()).characteristic == 1.0);
    CHECK(a1_characteristic(w, all_windows()).characteristic == 1.0);
  }
  const Grid g1(1, 64, 1.0);
  const auto w = weight_from_spec("power:a=-0.6", g1);
  const double base = ap_characteristic(w, 2.0, dyadic_windows()).characteristic;
  for (double c : {2.0, 0.25, 1024.0}) {
    CHECK(ap_characteristic(scaled(w, c), 2.0, dyadic_windows()).characteristic == base);
  }
  for (double c : {3.0, 1e6, 0.1}) {
    CHECK(ap_characteristic(scaled(w, c), 2.0, dyadic_windows()).characteristic ==
          doctest::Approx(base).epsilon(1e-13));
  }
}

TEST_CASE("A_p classes are nested and power weights degrade toward the boundary") {
  const Grid g(1, 256, 1.0);
  for (double a : {-0.5, 0.5, 1.5}) {
    const auto w = power_weight(a, Point{0.5, 0.0}, g);
    double prev = INFINITY;
    for (double p : {1.5, 2.0, 3.0, 5.0}) {
      const double c = ap_characteristic(w, p, all_windows()).characteristic;
      CHECK(c <= prev * (1 + 1e-12));
      prev = c;
    }
  }
  double prev = 0.0;
  for (double a : {-0.2, -0.5, -0.8, -0.9, -0.99}) {
    const double c = a1_characteristic(power_weight(a, Point{0.5, 0.0}, g), all_windows()).characteristic;
    CHECK(c > prev);
    prev = c;
  }
  // a = -0.5 is stable under refinement, a = -0.99 is not.
  const Grid g2(1, 512, 1.0);
  const double c_half = a1_characteristic(power_weight(-0.5, Point{0.5, 0.0}, g), all_windows()).characteristic;
  const double c_half2 = a1_characteristic(power_weight(-0.5, Point{0.5, 0.0}, g2), all_windows()).characteristic;
  CHECK(std::abs(c_half2 / c_half - 1.0) < 0.1);
  const double c_edge = a1_characteristic(power_weight(-0.99, Point{0.5, 0.0}, g), all_windows()).characteristic;
  CHECK(c_edge > 2.0 * c_half);
}

TEST_CASE("multiple-weight characteristic") {
  const Grid g(1, 64, 1.0);
  const auto one = SampledField::constant(g, 1.0);
  CHECK(multi_ap_characteristic({one, one}, {2.0, 2.0}, 1.0, all_windows()).characteristic == doctest::Approx(1.0));
  const auto four = SampledField::constant(g, 4.0), nine = SampledField::constant(g, 9.0);
  CHECK(multi_ap_characteristic({four, nine}, {2.0, 2.0}, 1.0, all_windows()).characteristic ==
        doctest::Approx(1.0).epsilon(1e-12));

  // m = 1 reduces to the A_r characteristic to the power 1/r, r = p / p0.
  const auto w = power_weight(-0.3, Point{0.4, 0.0}, g);
  for (double p0 : {1.0, 1.5}) {
    const double r = 3.0 / p0;
    const double single = multi_ap_characteristic({w}, {3.0}, p0, all_windows()).characteristic;
    CHECK(single == doctest::Approx(std::pow(ap_characteristic(w, r, all_windows()).characteristic, 1.0 / r))
                        .epsilon(1e-12));
  }
  // p_i = p0 uses the A_1 slot rule.
  const double a1slot = multi_ap_characteristic({w}, {1.5}, 1.5, all_windows()).characteristic;
  CHECK(a1slot == doctest::Approx(a1_characteristic(w, all_windows()).characteristic).epsilon(1e-12));

  // Identical A_p weights give a finite joint characteristic.
  const double joint = multi_ap_characteristic({w, w}, {2.0, 2.0}, 1.0, all_windows()).characteristic;
  CHECK(std::isfinite(joint));
  CHECK(joint >= 1.0);
  CHECK_THROWS_AS(multi_ap_characteristic({w, w}, {2.0, 0.5}, 1.0, all_windows()), ConfigError);
}

TEST_CASE("nu weight") {
  const Grid g(1, 16, 1.0);
  const auto one = SampledField::constant(g, 1.0);
  for (double v : nu_weight({one, one}, {2.0, 2.0}).real_parts()) CHECK(v == 1.0);
  const auto nu = nu_weight({SampledField::constant(g, 4.0), SampledField::constant(g, 9.0)}, {2.0, 2.0});
  for (double v : nu.real_parts()) CHECK(v == doctest::Approx(6.0).epsilon(1e-15));
  std::mt19937_64 rng(3);
  const auto w1 = test::random_positive(g, rng), w2 = test::random_positive(g, rng);
  const auto a = nu_weight({w1, w2}, {3.0, 1.5}).real_parts();
  const auto b = nu_weight({scaled(w1, 1.5), w2}, {3.0, 1.5}).real_parts();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] > a[i]);
}

TEST_CASE("BMO norms") {
  const Grid g(1, 64, 1.0);
  CHECK(bmo_norm(SampledField::constant(g, 2.0), all_windows()) == 0.0);
  const auto b = bmo_function_from_spec("log", g);
  auto v = b.real_parts();
  const double n0 = bmo_norm(b, all_windows());
  const double ref = brute_windows_1d(64, false, [&](int c, int side) {
    double m = 0.0, s = 0.0;
    for (int i = c; i < c + side; ++i) m += v[i];
    m /= side;
    for (int i = c; i < c + side; ++i) s += std::abs(v[i] - m);
    return s / side;
  });
  CHECK(n0 == doctest::Approx(ref).epsilon(1e-12));
  for (auto& x : v) x += 7.0;
  CHECK(bmo_norm(SampledField::from_real(g, v), all_windows()) == doctest::Approx(n0).epsilon(1e-12));
  for (auto& x : v) x = -3.0 * (x - 7.0);
  CHECK(bmo_norm(SampledField::from_real(g, v), all_windows()) == doctest::Approx(3.0 * n0).epsilon(1e-12));

  const auto c = bmo_function_from_spec("cos:k=2", g);
  std::vector<double> sum(g.size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = b[i].real() + c[i].real();
  CHECK(bmo_norm(SampledField::from_real(g, sum), all_windows()) <=
        n0 + bmo_norm(c, all_windows()) + 1e-12);

  const double n_fine = bmo_norm(bmo_function_from_spec("log", Grid(1, 128, 1.0)), all_windows());
  CHECK(std::abs(n_fine / n0 - 1.0) < 0.1);
  CHECK_THROWS_AS(bmo_function_from_spec("log:k=1", g), ConfigError);
}

TEST_CASE("John-Nirenberg profile") {
  const Grid g(1, 256, 1.0);
  std::vector<double> lambdas;
  for (int i = 1; i <= 24; ++i) lambdas.push_back(0.25 * i);
  const auto flat = john_nirenberg_profile(SampledField::constant(g, 1.0), all_windows(), lambdas);
  for (double f : flat.fractions) CHECK(f == 0.0);
  CHECK(flat.degenerate);

  const auto b = bmo_function_from_spec("log", g);
  const auto prof = john_nirenberg_profile(b, dyadic_windows(), lambdas);
  CHECK_FALSE(prof.degenerate);
  CHECK(prof.rate > 0.0);
  for (std::size_t i = 1; i < prof.fractions.size(); ++i) CHECK(prof.fractions[i] <= prof.fractions[i - 1]);

  std::vector<double> twice = b.real_parts(), doubled;
  for (auto& x : twice) x *= 2.0;
  for (double l : lambdas) doubled.push_back(2.0 * l);
  const auto prof2 = john_nirenberg_profile(SampledField::from_real(g, twice), dyadic_windows(), doubled);
  CHECK(prof2.fractions == prof.fractions);
}

TEST_CASE("openness scan") {
  const Grid g(1, 64, 1.0);
  const auto w = power_weight(-0.3, Point{0.5, 0.0}, g);
  const auto scan = openness_scan({w, w}, {2.0, 2.0}, 1.0, all_windows(), 8);
  CHECK(scan.q_values.size() == 9);
  CHECK(scan.q_values.front() == 1.0);
  CHECK(scan.q_values.back() == 2.0);
  CHECK(scan.q_max >= 1.0);
}
