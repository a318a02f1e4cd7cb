// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mslab {

using cplx = std::complex<double>;
using Point = std::array<double, 2>;  // unused components are zero in dim 1

// Periodic lattice on [0, L)^dim with N points per axis. Flat indices are
// row-major: flat = i0 * N + i1 in dim 2.
class Grid {
 public:
  // Throws ConfigError unless dim is 1 or 2, N >= 8 is a power of two, L > 0.
  Grid(int dim, int n, double box_length);

  int dim() const { return dim_; }
  int points_per_axis() const { return n_; }
  double box_length() const { return box_length_; }
  double spacing() const { return box_length_ / n_; }
  double cell_volume() const;
  std::size_t size() const;

  std::array<int, 2> multi_index(std::size_t flat) const;
  std::size_t flat_index(int i0, int i1 = 0) const;
  Point point(std::size_t flat) const;

  // Signed frequency index of storage slot i (FFT order): i for i < N/2,
  // i - N otherwise.
  int frequency_index(int i) const { return i < n_ / 2 ? i : i - n_; }
  double frequency(int i) const { return frequency_index(i) / box_length_; }
  Point frequency_point(std::size_t flat) const;

  bool operator==(const Grid& other) const = default;

 private:
  int dim_;
  int n_;
  double box_length_;
};

Grid make_grid(int dim, int n, double box_length);

enum class FieldKind { general, nonnegative_real };

// Immutable samples on a grid.
class SampledField {
 public:
  SampledField(Grid grid, std::vector<cplx> values,
               FieldKind kind = FieldKind::general);

  static SampledField zeros(const Grid& grid);
  static SampledField constant(const Grid& grid, cplx value);
  static SampledField from_function(const Grid& grid,
                                    const std::function<cplx(const Point&)>& fn);
  static SampledField from_real(const Grid& grid, std::vector<double> values,
                                FieldKind kind = FieldKind::general);

  const Grid& grid() const { return grid_; }
  const std::vector<cplx>& values() const { return values_; }
  const cplx& operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  FieldKind kind() const { return kind_; }

  std::vector<double> real_parts() const;
  std::vector<double> magnitudes() const;
  double max_abs() const;
  bool is_real(double tol = 0.0) const;

 private:
  Grid grid_;
  std::vector<cplx> values_;
  FieldKind kind_;
};

// Coefficients f^(xi_k) in FFT storage order.
class SpectralField {
 public:
  SpectralField(Grid grid, std::vector<cplx> coefficients);

  const Grid& grid() const { return grid_; }
  const std::vector<cplx>& coefficients() const { return coefficients_; }
  const cplx& operator[](std::size_t i) const { return coefficients_[i]; }
  // Coefficient at signed frequency indices (k0[, k1]), each in [-N/2, N/2).
  cplx at(int k0, int k1 = 0) const;
  std::size_t size() const { return coefficients_.size(); }

 private:
  Grid grid_;
  std::vector<cplx> coefficients_;
};

// f^(xi_k) = dx^dim sum_j f(x_j) exp(-2 pi i x_j . xi_k).
SpectralField forward_transform(const SampledField& f);
// f(x_j) = (1/L)^dim sum_k F(xi_k) exp(+2 pi i x_j . xi_k).
SampledField inverse_transform(const SpectralField& F);
// Raw helpers working on value arrays of grid.size().
std::vector<cplx> forward_values(const Grid& grid, const std::vector<cplx>& values);
std::vector<cplx> inverse_values(const Grid& grid, const std::vector<cplx>& coefficients);

// sum_k |F(xi_k)|^2 (1/L)^dim.
double spectral_energy(const SpectralField& F);

// (sum_j |f|^p w dx^dim)^(1/p). Throws ConfigError for p <= 0.
double lp_norm(const SampledField& f, double p,
               const std::optional<SampledField>& w = std::nullopt);
double lp_norm(const std::vector<double>& magnitudes, const Grid& grid, double p,
               const std::vector<double>* w = nullptr);

// sup over sample levels lambda of lambda * w({|f| > lambda (1 - 1e-12)})^(1/p).
double weak_lp_quasinorm(const SampledField& f, double p,
                         const std::optional<SampledField>& w = std::nullopt);
double weak_lp_quasinorm(const std::vector<double>& magnitudes, const Grid& grid,
                         double p, const std::vector<double>* w = nullptr);

// w-measure of {|f| > level}: sum of w dx^dim over the superlevel set.
double level_measure(const std::vector<double>& magnitudes, const Grid& grid,
                     double level, const std::vector<double>* w = nullptr);

// Binary container "MSLF" and CSV export.
void write_field(const SampledField& f, std::ostream& out);
SampledField read_field(std::istream& in);
void write_field_file(const SampledField& f, const std::string& path);
SampledField read_field_file(const std::string& path);
void write_field_csv(const SampledField& f, std::ostream& out);

// Shortest round-trip text form of a double ("nan", "inf", "-inf" for
// non-finite values).
std::string format_double(double v);

}  // namespace mslab
