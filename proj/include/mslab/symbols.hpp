// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mslab/grid.hpp"

namespace mslab {

// One frequency argument in R^dim (second component zero in dim 1).
using Freq = Point;

// Claimed decay exponents (s, eps1, eps2) for the derivative bound
// |d^alpha m| <~ rho^(-|alpha|+eps1) / (1+rho)^(eps1+eps2), |alpha| <= s.
struct DecayClaim {
  int s = 2;
  double eps1 = 1.0;
  double eps2 = 1.0;
};

// Multiplier symbol m(xi1[, xi2]). Cheap to copy; the evaluator is shared.
class Symbol {
 public:
  using Evaluator = std::function<cplx(const Freq&, const Freq&)>;

  Symbol(int arity, Evaluator fn, std::string name,
         std::optional<DecayClaim> claim = std::nullopt);

  int arity() const { return arity_; }
  const std::string& name() const { return name_; }
  const std::optional<DecayClaim>& claim() const { return claim_; }

  cplx operator()(const Freq& xi1, const Freq& xi2 = Freq{}) const { return (*fn_)(xi1, xi2); }

  // c * m, keeping arity; the claim is kept (scaling does not change decay).
  Symbol scaled(cplx c) const;

 private:
  int arity_;
  std::shared_ptr<const Evaluator> fn_;
  std::string name_;
  std::optional<DecayClaim> claim_;
};

// Expression grammar (see docs/symbol-grammar.md). Arity is 2 when the
// expression mentions xi2 or xi2y; otherwise arity_hint (1 or 2) decides,
// defaulting to 2. Throws ParseError with the byte offset of the problem.
Symbol parse_symbol(const std::string& source, int arity_hint = 0);

// Families: rational_bump (param k, default 4), gauss_bump, zero,
// unilinear_gauss, one (m = 1, unclaimed; used as a reference symbol).
Symbol builtin_symbol(const std::string& family,
                      const std::map<std::string, double>& params = {});

// "name:key=value,key=value" split into the name and numeric parameters.
struct FamilySpec {
  std::string family;
  std::map<std::string, double> params;
};
FamilySpec parse_family_spec(const std::string& spec);

// Parses "gauss_bump", "rational_bump:k=3", or "expr:<source>".
Symbol symbol_from_spec(const std::string& spec, int arity_hint = 0);

// |xi1| + |xi2| with Euclidean norms per argument.
double frequency_radius(const Freq& xi1, const Freq& xi2);

// Smooth dyadic cutoff theta(rho) = eta0(log2 rho), supported in [1/2, 2],
// with sum over l of theta(2^-l rho) = 1 for rho > 0.
double partition_bump(double rho);

// m_l(xi, eta) = theta(2^-l (|xi|+|eta|)) m(xi, eta).
Symbol lp_piece(const Symbol& m, int level);

enum class ConditionId { eq13, eq21, eq152, eq153, H2, H3, XY_smooth };

std::string condition_name(ConditionId id);
ConditionId condition_from_name(const std::string& name);

struct ConditionEntry {
  int level = 0;                 // annulus index (or window scale for kernel conditions)
  std::vector<int> multiindex;   // derivative orders (or annulus pair j, k)
  double margin = 0.0;           // sup of |observed| / bound
  bool finite = true;
};

struct ConditionReport {
  ConditionId condition = ConditionId::eq13;
  std::vector<ConditionEntry> entries;
  double overall_margin = 0.0;
  double derivative_step = 0.0;
  int level_min = 0;
  int level_max = 0;
  // Slopes of log2(max margin per level) against level over the first and
  // last few levels; bounded margins keep both within 0.1 of 0 or decaying.
  double low_end_slope = 0.0;
  double high_end_slope = 0.0;
  bool margins_bounded = true;
};

struct DecayCheckOptions {
  int dim = 1;
  int s = 2;             // maximal derivative order for eq13 / eq152
  double eps1 = 1.0;     // also the eps of eq21
  double eps2 = 1.0;
  int max_order = -1;    // overrides the condition's default order bound when >= 0
  int level_min = -10;
  int level_max = 10;
  int samples_per_annulus = 64;
  double fd_step = 1e-3;
};

// Frequency-side conditions: eq13, eq21, eq152, eq153. Margins only.
ConditionReport check_decay_condition(const Symbol& m, ConditionId cond,
                                      const DecayCheckOptions& opts);

// Partial derivative d^alpha m by tensor central differences of second-order
// accuracy. Variables are ordered (xi1_0, xi1_1, xi2_0, xi2_1) restricted to
// the first dim components of each argument; alpha has arity * dim entries.
cplx central_derivative(const Symbol& m, int dim, const Freq& xi1, const Freq& xi2,
                        const std::vector<int>& alpha, double h);

// Closed-form inverse transform of the symbol for families that have one
// (gauss_bump, unilinear_gauss, zero), in total dimension arity*dim.
// Variables follow the same ordering as central_derivative.
std::optional<std::function<double(const std::vector<double>&)>> analytic_inverse(
    const std::string& family, int arity, int dim);

// Fine frequency lattice used to represent m-check by a finite Fourier sum.
struct KernelLattice {
  double box = 8.0;  // period of the lattice representation in kernel units
  int points = 128;  // samples per axis
};

// m-check sampled through a finite Fourier sum over the kernel lattice,
// restricted to one period cell (zero outside). Supports total dimension
// D = arity * dim <= 2.
class KernelEvaluator {
 public:
  KernelEvaluator(const Symbol& m, int dim, KernelLattice lattice = {});

  int total_dim() const { return total_dim_; }
  const KernelLattice& lattice() const { return lattice_; }

  // m-check at one point (v has total_dim entries).
  cplx value(const std::vector<double>& v) const;

  // Table of t^-D m-check(u / t) on the product grid of per-axis
  // displacements (axis_points[a] lists u values along axis a). With
  // period > 0 every entry sums the images u + n * period for all integers n.
  // Result is row-major over the axes.
  std::vector<cplx> table(double t, const std::vector<std::vector<double>>& axis_points,
                          double period = 0.0) const;

 private:
  std::vector<cplx> axis_phases(const std::vector<double>& pts, double t, double period) const;

  int dim_;
  int total_dim_;
  KernelLattice lattice_;
  std::vector<cplx> samples_;  // m on the lattice, FFT order, row-major
};

// K_t on the displacement lattice of g: value at displacements (u1[, u2])
// equals t^(-arity*dim) m-check(u1/t[, u2/t]) with u wrapped to [-L/2, L/2).
// Returned on a grid of dimension arity*dim (which must be <= 2) with the
// same N and L as g. With periodize, all torus images are summed.
SampledField synthesize_kernel(const Symbol& m, const Grid& g, double t,
                               const KernelLattice& lattice = {}, bool periodize = false);

}  // namespace mslab
