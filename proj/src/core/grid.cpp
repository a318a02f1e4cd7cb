// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#include "mslab/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <tuple>

#include "mslab/error.hpp"

namespace mslab {

Grid::Grid(int dim, int n, double box_length) : dim_(dim), n_(n), box_length_(box_length) {
  if (dim != 1 && dim != 2) {
    throw ConfigError("grid dimension must be 1 or 2, got " + std::to_string(dim));
  }
  if (n < 8 || !std::has_single_bit(static_cast<unsigned>(n))) {
    throw ConfigError("points per axis must be a power of two >= 8, got " + std::to_string(n));
  }
  if (!(box_length > 0.0) || !std::isfinite(box_length)) {
    throw ConfigError("box length must be positive and finite");
  }
}

Grid make_grid(int dim, int n, double box_length) { return Grid(dim, n, box_length); }

double Grid::cell_volume() const {
  const double dx = spacing();
  return dim_ == 1 ? dx : dx * dx;
}

std::size_t Grid::size() const {
  const auto n = static_cast<std::size_t>(n_);
  return dim_ == 1 ? n : n * n;
}

std::array<int, 2> Grid::multi_index(std::size_t flat) const {
  if (dim_ == 1) return {static_cast<int>(flat), 0};
  return {static_cast<int>(flat / n_), static_cast<int>(flat % n_)};
}

std::size_t Grid::flat_index(int i0, int i1) const {
  return dim_ == 1 ? static_cast<std::size_t>(i0)
                   : static_cast<std::size_t>(i0) * n_ + static_cast<std::size_t>(i1);
}

Point Grid::point(std::size_t flat) const {
  const auto idx = multi_index(flat);
  const double dx = spacing();
  return {idx[0] * dx, dim_ == 2 ? idx[1] * dx : 0.0};
}

Point Grid::frequency_point(std::size_t flat) const {
  const auto idx = multi_index(flat);
  return {frequency(idx[0]), dim_ == 2 ? frequency(idx[1]) : 0.0};
}

// --- fields ---------------------------------------------------------------

SampledField::SampledField(Grid grid, std::vector<cplx> values, FieldKind kind)
    : grid_(grid), values_(std::move(values)), kind_(kind) {
  if (values_.size() != grid_.size()) {
    throw ConfigError("field has " + std::to_string(values_.size()) + " values, grid needs " +
                      std::to_string(grid_.size()));
  }
  if (kind_ == FieldKind::nonnegative_real) {
    for (const auto& v : values_) {
      if (v.imag() != 0.0 || !(v.real() >= 0.0)) {
        throw ConfigError("nonnegative-real field holds a negative or complex value");
      }
    }
  }
}

SampledField SampledField::zeros(const Grid& grid) {
  return SampledField(grid, std::vector<cplx>(grid.size()), FieldKind::general);
}

SampledField SampledField::constant(const Grid& grid, cplx value) {
  return SampledField(grid, std::vector<cplx>(grid.size(), value));
}

SampledField SampledField::from_function(const Grid& grid,
                                         const std::function<cplx(const Point&)>& fn) {
  std::vector<cplx> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.point(i));
  return SampledField(grid, std::move(v));
}

SampledField SampledField::from_real(const Grid& grid, std::vector<double> values,
                                     FieldKind kind) {
  std::vector<cplx> v(values.begin(), values.end());
  return SampledField(grid, std::move(v), kind);
}

std::vector<double> SampledField::real_parts() const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values_[i].real();
  return out;
}

std::vector<double> SampledField::magnitudes() const {
  std::vector<double> out(values_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(values_[i]);
  return out;
}

double SampledField::max_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool SampledField::is_real(double tol) const {
  return std::all_of(values_.begin(), values_.end(),
                     [tol](const cplx& v) { return std::abs(v.imag()) <= tol; });
}

SpectralField::SpectralField(Grid grid, std::vector<cplx> coefficients)
    : grid_(grid), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != grid_.size()) {
    throw ConfigError("spectral field size does not match its grid");
  }
}

cplx SpectralField::at(int k0, int k1) const {
  const int n = grid_.points_per_axis();
  auto slot = [n](int k) {
    if (k < -n / 2 || k >= n / 2) throw ConfigError("frequency index out of range");
    return k < 0 ? k + n : k;
  };
  return coefficients_[grid_.flat_index(slot(k0), grid_.dim() == 2 ? slot(k1) : 0)];
}

// --- transforms -------------------------------------------------------------

namespace {

// FFTW planning is not thread-safe, execution with the new-array interface
// is. Plans are created once per (dim, N, sign) and kept for the process.
class PlanCache {
 public:
  fftw_plan get(int dim, int n, int sign) {
    std::lock_guard<std::mutex> lock(mutex_);
    const auto key = std::make_tuple(dim, n, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    const std::size_t total = dim == 1 ? static_cast<std::size_t>(n)
                                       : static_cast<std::size_t>(n) * n;
    auto* in = fftw_alloc_complex(total);
    auto* out = fftw_alloc_complex(total);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = dim == 1 ? fftw_plan_dft_1d(n, in, out, sign, flags)
                              : fftw_plan_dft_2d(n, n, in, out, sign, flags);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

std::vector<cplx> run_dft(const Grid& grid, const std::vector<cplx>& in, int sign) {
  if (in.size() != grid.size()) throw ConfigError("transform input size mismatch");
  std::vector<cplx> out(in.size());
  fftw_plan plan = plan_cache().get(grid.dim(), grid.points_per_axis(), sign);
  // fftw_execute_dft does not modify its input for out-of-place plans.
  auto* src = reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in.data()));
  fftw_execute_dft(plan, src, reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

std::vector<cplx> forward_values(const Grid& grid, const std::vector<cplx>& values) {
  auto out = run_dft(grid, values, FFTW_FORWARD);
  const double scale = grid.cell_volume();
  for (auto& c : out) c *= scale;
  return out;
}

std::vector<cplx> inverse_values(const Grid& grid, const std::vector<cplx>& coefficients) {
  auto out = run_dft(grid, coefficients, FFTW_BACKWARD);
  const double dxi = 1.0 / grid.box_length();
  const double scale = grid.dim() == 1 ? dxi : dxi * dxi;
  for (auto& c : out) c *= scale;
  return out;
}

SpectralField forward_transform(const SampledField& f) {
  return SpectralField(f.grid(), forward_values(f.grid(), f.values()));
}

SampledField inverse_transform(const SpectralField& F) {
  return SampledField(F.grid(), inverse_values(F.grid(), F.coefficients()));
}

double spectral_energy(const SpectralField& F) {
  double sum = 0.0;
  for (const auto& c : F.coefficients()) sum += std::norm(c);
  const double dxi = 1.0 / F.grid().box_length();
  return sum * (F.grid().dim() == 1 ? dxi : dxi * dxi);
}

// --- norms --------------------------------------------------------------------

namespace {

void check_exponent(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) {
    throw ConfigError("Lebesgue exponent must be positive and finite");
  }
}

const std::vector<double>* weight_values(const std::optional<SampledField>& w,
                                         const Grid& grid, std::vector<double>& storage) {
  if (!w) return nullptr;
  if (!(w->grid() == grid)) throw ConfigError("weight lives on a different grid");
  storage = w->real_parts();
  for (double v : storage) {
    if (!(v >= 0.0)) throw ConfigError("weights must be nonnegative");
  }
  return &storage;
}

}  // namespace

double lp_norm(const std::vector<double>& magnitudes, const Grid& grid, double p,
               const std::vector<double>* w) {
  check_exponent(p);
  double sum = 0.0;
  for (std::size_t i = 0; i < magnitudes.size(); ++i) {
    const double a = magnitudes[i];
    if (a == 0.0) continue;
    sum += std::pow(a, p) * (w ? (*w)[i] : 1.0);
  }
  return std::pow(sum * grid.cell_volume(), 1.0 / p);
}

double lp_norm(const SampledField& f, double p, const std::optional<SampledField>& w) {
  std::vector<double> storage;
  const auto* wv = weight_values(w, f.grid(), storage);
  return lp_norm(f.magnitudes(), f.grid(), p, wv);
}

double level_measure(const std::vector<double>& magnitudes, const Grid& grid, double level,
                     const std::vector<double>* w) {
  double sum = 0.0;
  for (std::size_t i = 0; i < magnitudes.size(); ++i) {
    if (magnitudes[i] > level) sum += w ? (*w)[i] : 1.0;
  }
  return sum * grid.cell_volume();
}

double weak_lp_quasinorm(const std::vector<double>& magnitudes, const Grid& grid, double p,
                         const std::vector<double>* w) {
  check_exponent(p);
  // Sort samples by magnitude descending; the measure of {|f| > lambda(1-1e-12)}
  // at lambda = a_k is the weight of every sample at least as large as a_k
  // (up to the relative guard), which a single sweep accumulates.
  std::vector<std::size_t> order(magnitudes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return magnitudes[a] > magnitudes[b] || (magnitudes[a] == magnitudes[b] && a < b);
  });
  const double vol = grid.cell_volume();
  double best = 0.0;
  double mass = 0.0;
  std::size_t k = 0;
  while (k < order.size()) {
    const double level = magnitudes[order[k]];
    if (level <= 0.0) break;
    const double cut = level * (1.0 - 1e-12);
    while (k < order.size() && magnitudes[order[k]] > cut) {
      mass += w ? (*w)[order[k]] : 1.0;
      ++k;
    }
    best = std::max(best, level * std::pow(mass * vol, 1.0 / p));
  }
  return best;
}

double weak_lp_quasinorm(const SampledField& f, double p, const std::optional<SampledField>& w) {
  std::vector<double> storage;
  const auto* wv = weight_values(w, f.grid(), storage);
  return weak_lp_quasinorm(f.magnitudes(), f.grid(), p, wv);
}

// --- serialization ------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'M', 'S', 'L', 'F'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "big-endian hosts unsupported");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("truncated field container");
  return value;
}

}  // namespace

void write_field(const SampledField& f, std::ostream& out) {
  out.write(kMagic, 4);
  put_le<std::uint32_t>(out, kVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid().dim()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(f.grid().points_per_axis()));
  put_le<double>(out, f.grid().box_length());
  for (const auto& v : f.values()) {
    put_le<double>(out, v.real());
    put_le<double>(out, v.imag());
  }
  if (!out) throw IoError("failed writing field container");
}

SampledField read_field(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw IoError("not an MSLF field container");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kVersion) throw IoError("unsupported field container version");
  const auto dim = get_le<std::uint32_t>(in);
  const auto n = get_le<std::uint32_t>(in);
  const auto box = get_le<double>(in);
  Grid grid(static_cast<int>(dim), static_cast<int>(n), box);
  std::vector<cplx> values(grid.size());
  for (auto& v : values) {
    const double re = get_le<double>(in);
    const double im = get_le<double>(in);
    v = {re, im};
  }
  return SampledField(grid, std::move(values));
}

void write_field_file(const SampledField& f, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  write_field(f, out);
}

SampledField read_field_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return read_field(in);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_field_csv(const SampledField& f, std::ostream& out) {
  const Grid& g = f.grid();
  out << (g.dim() == 1 ? "x_0,re,im\n" : "x_0,x_1,re,im\n");
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto x = g.point(i);
    out << format_double(x[0]) << ',';
    if (g.dim() == 2) out << format_double(x[1]) << ',';
    out << format_double(f[i].real()) << ',' << format_double(f[i].imag()) << '\n';
  }
}

}  // namespace mslab
