// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mslab/grid.hpp"
#include "mslab/symbols.hpp"

namespace mslab {

// Log-spaced quadrature for integrals over dt/t on [t_min, t_max]: the range
// is split into count = round(nodes_per_octave * log2(t_max / t_min)) equal
// cells in log t, each represented by its midpoint with weight
// ln(t_max / t_min) / count.
struct TQuad {
  double t_min = 0.0;
  double t_max = 0.0;
  int nodes_per_octave = 8;

  void validate() const;
  std::size_t count() const;
  std::vector<double> nodes() const;
  double weight() const;
};

// t_min = dx / 4, t_max = 4 L, 8 nodes per octave.
TQuad default_tquad(const Grid& g);

// Exponents of a weighted estimate: 1/p = sum 1/p_i.
struct ExponentConfig {
  double p0 = 1.0;
  std::vector<double> p_list{2.0, 2.0};
  int s = 2;
  double eps1 = 1.0;
  double eps2 = 1.0;
  double delta = 1.0;

  double p() const;
  void validate() const;  // p0 >= 1, p_i > 0, finite
};

// B_t(f1, f2)(x_j) = sum_{k1,k2} m(t xi_k1, t xi_k2) f1^(xi_k1) f2^(xi_k2)
//                     e^{2 pi i x_j (xi_k1 + xi_k2)} (1/L)^{2 dim}
// by the direct double frequency sum, folded onto sum frequencies modulo N.
SampledField apply_bilinear_fixed_t(const Symbol& m, double t, const SampledField& f1,
                                    const SampledField& f2);
// Unilinear analogue: sum_k m(t xi_k) f^(xi_k) e^{2 pi i x xi_k} (1/L)^dim.
SampledField apply_unilinear_fixed_t(const Symbol& m, double t, const SampledField& f);

// (sum_q w_q |B_{t_q}(f)|^2)^{1/2}; fields.size() must equal m.arity().
SampledField square_multiplier(const Symbol& m, const std::vector<SampledField>& fields,
                               const TQuad& q);

// True when m(0, 0) != 0; the dt/t integral then diverges at t -> infinity and
// truncated outputs depend on t_max.
bool zero_frequency_warning(const Symbol& m);

struct KernelRouteOptions {
  KernelLattice lattice{};
  int max_refine = 16;              // cap on the y-grid refinement factor
  double work_limit = 134217728.0;  // cap on N^(1 + arity * dim)
};

// Brute-force kernel route: physical-space Riemann sums of the periodized
// kernel K_t against spectrally interpolated inputs on a y-grid refined so
// that its spacing resolves t. Kernel tables are computed once per node and
// reused across inputs.
class KernelSquareOperator {
 public:
  KernelSquareOperator(const Symbol& m, const Grid& g, const TQuad& q,
                       const KernelRouteOptions& opts = {});

  SampledField apply(const std::vector<SampledField>& fields) const;
  // Commutator with b_i(x) - b_i(y_i) inside the integral, summed over slots.
  SampledField commutator(const std::vector<SampledField>& b,
                          const std::vector<SampledField>& fields) const;

 private:
  struct Node {
    double t;
    double weight;
    int refine;
    std::vector<cplx> table;
  };
  // Integral for one node at every coarse x; slot < 0 means no commutator.
  std::vector<cplx> node_integral(const Node& node, const std::vector<std::vector<cplx>>& fine,
                                  int slot, const std::vector<cplx>& b_fine) const;
  void check_fields(const std::vector<SampledField>& fields) const;

  int arity_;
  Grid grid_;
  std::vector<Node> nodes_;
};

SampledField square_kernel(const Symbol& m, const std::vector<SampledField>& fields,
                           const TQuad& q, const KernelRouteOptions& opts = {});

// Kernel-route commutator sum_i (sum_q w_q |int (b_i(x) - b_i(y_i)) K_t f|^2)^{1/2}.
SampledField commutator_square(const Symbol& m, const std::vector<SampledField>& b,
                               const std::vector<SampledField>& fields, const TQuad& q,
                               const KernelRouteOptions& opts = {});

// Same commutator through the multiplier route, using the exact expansion
// int (b(x) - b(y_i)) K_t f = b(x) B_t(f) - B_t(f with f_i -> b f_i) per slot.
SampledField commutator_multiplier(const Symbol& m, const std::vector<SampledField>& b,
                                   const std::vector<SampledField>& fields, const TQuad& q);

// Compares sum_q w_q |B_t(f1, f2)|^2 with the four-frequency form whose
// symbol is sum_q w_q m(t xi1, t xi2) conj(m(-t xi3, -t xi4)) applied to
// (f1, f2, conj f1, conj f2). Returns the largest pointwise relative
// discrepancy (denominators floored at 1e-12 of the largest left side).
double square_identity_check(const Symbol& m, const SampledField& f1, const SampledField& f2,
                             const TQuad& q);

// Interval (dim 1) with center and half side length.
struct Cube {
  double center = 0.0;
  double half_side = 1.0;
};

// t-range used by the annulus estimates when none is supplied:
// [R 2^-6, R 2^(max(j,k)+6)] at 8 nodes per octave, R the half side.
TQuad default_annulus_tquad(const Cube& Q, int j, int k);

struct AnnulusOptions {
  std::optional<TQuad> tquad;  // default_annulus_tquad when empty
  int mesh = 64;               // midpoint cells per annulus
  KernelLattice lattice{};
};

// (int_{S_j} int_{S_k} (sum_q w_q t^-4 |m-check((x-y1)/t, (x-y2)/t)
//   - m-check((xb-y1)/t, (xb-y2)/t)|^2)^{p'/2} dy1 dy2)^{1/p'}, y1 in S_k,
// y2 in S_j; dim 1, bilinear m; x, xb in Q/2; 1 < p <= 2.
double estimate_Ajk(const Symbol& m, const Cube& Q, double x, double xbar, int j, int k,
                     double p, const AnnulusOptions& opts = {});
// Same without the difference, with x the center of Q.
double estimate_Bjk(const Symbol& m, const Cube& Q, int j, int k, double p,
                    const AnnulusOptions& opts = {});

struct KernelCheckOptions {
  double p0 = 1.5;
  double delta = 1.0;   // H2 regularity exponent
  double gamma = 1.0;   // XY-smooth regularity exponent
  int scale_min = -2;   // window half sides 2^scale
  int scale_max = 2;
  int j_max = 3;
  int mesh = 32;
  int samples = 16;     // XY-smooth samples per scale
};

// Kernel-side conditions H2, H3 and XY-smooth for bilinear dim-1 symbols.
// Margins are observed quantity / right-hand side without constant.
ConditionReport check_kernel_condition(const Symbol& m, ConditionId cond,
                                       const KernelCheckOptions& opts = {});

}  // namespace mslab
