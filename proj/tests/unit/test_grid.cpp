// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "mslab/error.hpp"
#include "mslab/grid.hpp"
#include "support.hpp"

using namespace mslab;
using mslab::test::random_field;

TEST_CASE("grid conventions") {
  const Grid g(1, 8, 1.0);
  CHECK(g.spacing() == 0.125);
  CHECK(g.size() == 8);
  CHECK(g.frequency_index(0) == 0);
  CHECK(g.frequency_index(3) == 3);
  CHECK(g.frequency_index(4) == -4);
  CHECK(g.frequency_index(7) == -1);
  CHECK(g.point(3)[0] == 0.375);

  const Grid g2(2, 16, 2.0);
  CHECK(g2.size() == 256);
  CHECK(g2.spacing() == 0.125);
  CHECK(g2.flat_index(2, 5) == 2 * 16 + 5);
  CHECK(g2.multi_index(37) == std::array<int, 2>{2, 5});
}

TEST_CASE("grid rejects bad parameters") {
  CHECK_THROWS_AS(Grid(1, 7, 1.0), ConfigError);
  CHECK_THROWS_AS(Grid(1, 4, 1.0), ConfigError);
  CHECK_THROWS_AS(Grid(3, 8, 1.0), ConfigError);
  CHECK_THROWS_AS(Grid(1, 8, 0.0), ConfigError);
  CHECK_THROWS_AS(Grid(1, 8, -1.0), ConfigError);
}

TEST_CASE("forward transform of simple fields") {
  const Grid g(1, 16, 1.0);
  const auto F = forward_transform(SampledField::constant(g, 1.0));
  CHECK(std::abs(F.at(0) - cplx(1.0)) < 1e-14);
  for (int k = 1; k < 16; ++k) CHECK(std::abs(F[k]) < 1e-14);

  const auto e1 = SampledField::from_function(
      g, [](const Point& x) { return std::polar(1.0, 2.0 * std::numbers::pi * x[0]); });
  const auto E = forward_transform(e1);
  CHECK(std::abs(E.at(1) - cplx(1.0)) < 1e-14);
  CHECK(std::abs(E.at(0)) < 1e-14);
  CHECK(std::abs(E.at(-1)) < 1e-14);
}

TEST_CASE("forward transform matches a naive DFT") {
  std::mt19937_64 rng(11);
  const Grid g(1, 32, 3.0);
  const auto f = random_field(g, rng);
  const auto F = forward_transform(f);
  const auto ref = test::naive_forward_1d(g, f.values());
  for (int k = 0; k < 32; ++k) CHECK(std::abs(F[k] - ref[k]) < 1e-12);
}

TEST_CASE("inverse of a unit delta at zero is the constant 1/L") {
  const Grid g(1, 8, 1.0);
  std::vector<cplx> c(8, 0.0);
  c[0] = 1.0;
  const auto f = inverse_transform(SpectralField(g, c));
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::abs(f[i] - cplx(1.0)) < 1e-15);

  const Grid g2(1, 8, 2.0);
  const auto f2 = inverse_transform(SpectralField(g2, c));
  CHECK(std::abs(f2[3] - cplx(0.5)) < 1e-15);
}

TEST_CASE("roundtrip, linearity and Parseval") {
  std::mt19937_64 rng(5);
  for (int dim : {1, 2}) {
    const Grid g(dim, 16, 1.7);
    for (int trial = 0; trial < 1000 / (dim * dim * 4); ++trial) {
      const auto f = random_field(g, rng);
      const auto F = forward_transform(f);
      const auto back = inverse_transform(F);
      double err = 0.0, norm = 0.0;
      for (std::size_t i = 0; i < f.size(); ++i) {
        err = std::max(err, std::abs(back[i] - f[i]));
        norm = std::max(norm, std::abs(f[i]));
      }
      CHECK(err <= 1e-10 * norm);
      const double energy = std::pow(lp_norm(f, 2.0), 2);
      CHECK(std::abs(spectral_energy(F) - energy) <= 1e-10 * energy);
    }
    const auto F = forward_transform(random_field(g, rng));
    const auto G = forward_transform(random_field(g, rng));
    const cplx a(0.3, -1.2), b(2.0, 0.5);
    std::vector<cplx> mix(F.size());
    for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * F[i] + b * G[i];
    const auto lhs = inverse_transform(SpectralField(g, mix));
    const auto fi = inverse_transform(F), gi = inverse_transform(G);
    for (std::size_t i = 0; i < mix.size(); ++i) CHECK(std::abs(lhs[i] - (a * fi[i] + b * gi[i])) < 1e-12);
  }
}

TEST_CASE("lp norms") {
  const Grid g(1, 16, 1.0);
  for (double p : {0.5, 1.0, 2.0, 3.7}) {
    CHECK(lp_norm(SampledField::constant(g, -3.0), p) == doctest::Approx(3.0).epsilon(1e-14));
  }
  const auto w = SampledField::constant(g, 3.0);
  CHECK(lp_norm(SampledField::constant(g, 2.0), 2.0, w) == doctest::Approx(2.0 * std::sqrt(3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(lp_norm(SampledField::constant(g, 1.0), 0.0), ConfigError);
  CHECK_THROWS_AS(lp_norm(SampledField::constant(g, 1.0), -1.0), ConfigError);

  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto f = random_field(g, rng);
    const auto h = random_field(g, rng);
    const auto wt = test::random_positive(g, rng);
    for (double p : {1.0, 1.5, 2.0, 4.0}) {
      std::vector<cplx> sum(f.size());
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = f[i] + h[i];
      CHECK(lp_norm(SampledField(g, sum), p) <= lp_norm(f, p) + lp_norm(h, p) + 1e-12);
      CHECK(weak_lp_quasinorm(f, p, wt) <= lp_norm(f, p, wt) * (1.0 + 1e-12));
    }
    std::vector<cplx> scaled(f.size());
    const cplx c(-2.0, 0.0);
    for (std::size_t i = 0; i < f.size(); ++i) scaled[i] = c * f[i];
    CHECK(lp_norm(SampledField(g, scaled), 2.0) == doctest::Approx(2.0 * lp_norm(f, 2.0)).epsilon(1e-14));
  }
}

TEST_CASE("weak norm of an indicator and of zero") {
  const Grid g(1, 32, 2.0);
  std::vector<double> v(32, 0.0);
  for (int i = 4; i < 13; ++i) v[i] = 1.0;  // |E| = 9 * 1/16
  const auto f = SampledField::from_real(g, v);
  for (double p : {0.5, 1.0, 3.0}) {
    CHECK(weak_lp_quasinorm(f, p) == doctest::Approx(std::pow(9.0 / 16.0, 1.0 / p)).epsilon(1e-14));
  }
  CHECK(weak_lp_quasinorm(SampledField::zeros(g), 2.0) == 0.0);
}

TEST_CASE("field container roundtrip") {
  std::mt19937_64 rng(3);
  const Grid g(2, 8, 1.5);
  const auto f = random_field(g, rng);
  std::stringstream ss;
  write_field(f, ss);
  const std::string bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "MSLF");
  CHECK(bytes.size() == 4 + 4 * 3 + 8 + 16 * g.size());
  const auto back = read_field(ss);
  CHECK(back.grid() == g);
  CHECK(back.values() == f.values());

  std::stringstream bad("XXXX");
  CHECK_THROWS(read_field(bad));

  std::stringstream csv;
  write_field_csv(SampledField::constant(Grid(1, 8, 1.0), 2.0), csv);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "x_0,re,im");
}

TEST_CASE("format_double") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(INFINITY) == "inf");
  CHECK(format_double(-INFINITY) == "-inf");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}
