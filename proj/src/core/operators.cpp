// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#include "mslab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "mslab/error.hpp"
#include "mslab/parallel.hpp"

namespace mslab {

// --- quadrature and exponents -------------------------------------------------

void TQuad::validate() const {
  if (!(t_min > 0.0) || !(t_max > t_min) || !std::isfinite(t_max)) {
    throw ConfigError("t-quadrature needs 0 < t_min < t_max");
  }
  if (nodes_per_octave < 1) throw ConfigError("nodes_per_octave must be >= 1");
}

std::size_t TQuad::count() const {
  validate();
  const double cells = std::round(nodes_per_octave * std::log2(t_max / t_min));
  return static_cast<std::size_t>(std::max(1.0, cells));
}

std::vector<double> TQuad::nodes() const {
  const std::size_t n = count();
  const double span = std::log(t_max / t_min);
  std::vector<double> out(n);
  for (std::size_t q = 0; q < n; ++q) {
    out[q] = t_min * std::exp(span * (static_cast<double>(q) + 0.5) / static_cast<double>(n));
  }
  return out;
}

double TQuad::weight() const { return std::log(t_max / t_min) / static_cast<double>(count()); }

TQuad default_tquad(const Grid& g) {
  return TQuad{g.spacing() / 4.0, 4.0 * g.box_length(), 8};
}

double ExponentConfig::p() const {
  double inv = 0.0;
  for (double pi : p_list) inv += 1.0 / pi;
  return 1.0 / inv;
}

void ExponentConfig::validate() const {
  if (!(p0 >= 1.0) || !std::isfinite(p0)) throw ConfigError("p0 must be a finite real >= 1");
  if (p_list.empty()) throw ConfigError("p_list must not be empty");
  for (double pi : p_list) {
    if (!(pi > 0.0) || !std::isfinite(pi)) throw ConfigError("every p_i must be positive and finite");
  }
  if (!(eps1 > 0.0) || !(eps2 > 0.0)) throw ConfigError("eps1 and eps2 must be positive");
  if (s < 0) throw ConfigError("s must be nonnegative");
}

// --- multiplier route ---------------------------------------------------------

namespace {

void require_same_grid(const std::vector<SampledField>& fields) {
  for (const auto& f : fields) {
    if (!(f.grid() == fields.front().grid())) throw ConfigError("fields live on different grids");
  }
}

void require_arity(const Symbol& m, std::size_t count) {
  if (static_cast<std::size_t>(m.arity()) != count) {
    throw ConfigError("symbol arity " + std::to_string(m.arity()) + " does not match " +
                      std::to_string(count) + " input field(s)");
  }
}

double frequency_measure(const Grid& g) {
  const double d = 1.0 / g.box_length();
  return g.dim() == 1 ? d : d * d;
}

// Spectrum of B_t for several (F1, F2) pairs sharing one symbol table.
std::vector<std::vector<cplx>> bilinear_spectra(
    const Symbol& m, const Grid& g, double t,
    const std::vector<std::pair<const std::vector<cplx>*, const std::vector<cplx>*>>& pairs) {
  const std::size_t total = g.size();
  const int n = g.points_per_axis();
  const int mask = n - 1;
  std::vector<std::vector<cplx>> out(pairs.size(), std::vector<cplx>(total));
  std::vector<Freq> freq(total);
  for (std::size_t i = 0; i < total; ++i) {
    const auto p = g.frequency_point(i);
    freq[i] = {t * p[0], t * p[1]};
  }
  for (std::size_t i1 = 0; i1 < total; ++i1) {
    const auto a = g.multi_index(i1);
    for (std::size_t i2 = 0; i2 < total; ++i2) {
      const cplx mv = m(freq[i1], freq[i2]);
      if (mv == cplx(0.0, 0.0)) continue;
      const auto b = g.multi_index(i2);
      const std::size_t k = g.dim() == 1
                                ? static_cast<std::size_t>((a[0] + b[0]) & mask)
                                : g.flat_index((a[0] + b[0]) & mask, (a[1] + b[1]) & mask);
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        out[p][k] += mv * (*pairs[p].first)[i1] * (*pairs[p].second)[i2];
      }
    }
  }
  const double measure = frequency_measure(g);
  for (auto& s : out) {
    for (auto& c : s) c *= measure;
  }
  return out;
}

std::vector<cplx> unilinear_spectrum(const Symbol& m, const Grid& g, double t,
                                     const std::vector<cplx>& F) {
  std::vector<cplx> out(F.size());
  for (std::size_t i = 0; i < F.size(); ++i) {
    const auto p = g.frequency_point(i);
    out[i] = m(Freq{t * p[0], t * p[1]}, Freq{}) * F[i];
  }
  return out;
}

std::vector<cplx> pointwise_product(const SampledField& b, const SampledField& f) {
  std::vector<cplx> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = b[i].real() * f[i];
  return out;
}

}  // namespace

SampledField apply_bilinear_fixed_t(const Symbol& m, double t, const SampledField& f1,
                                    const SampledField& f2) {
  require_arity(m, 2);
  if (!(f1.grid() == f2.grid())) throw ConfigError("fields live on different grids");
  if (!(t > 0.0)) throw ConfigError("t must be positive");
  const Grid& g = f1.grid();
  const auto F1 = forward_values(g, f1.values());
  const auto F2 = forward_values(g, f2.values());
  auto spec = bilinear_spectra(m, g, t, {{&F1, &F2}});
  return SampledField(g, inverse_values(g, spec[0]));
}

SampledField apply_unilinear_fixed_t(const Symbol& m, double t, const SampledField& f) {
  require_arity(m, 1);
  if (!(t > 0.0)) throw ConfigError("t must be positive");
  const Grid& g = f.grid();
  const auto F = forward_values(g, f.values());
  return SampledField(g, inverse_values(g, unilinear_spectrum(m, g, t, F)));
}

SampledField square_multiplier(const Symbol& m, const std::vector<SampledField>& fields,
                               const TQuad& q) {
  require_arity(m, fields.size());
  require_same_grid(fields);
  const Grid& g = fields.front().grid();
  const auto nodes = q.nodes();
  const double w = q.weight();
  std::vector<std::vector<cplx>> spectra;
  for (const auto& f : fields) spectra.push_back(forward_values(g, f.values()));

  std::vector<std::vector<double>> per_node(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) {
    std::vector<cplx> spec;
    if (m.arity() == 1) {
      spec = unilinear_spectrum(m, g, nodes[i], spectra[0]);
    } else {
      spec = std::move(bilinear_spectra(m, g, nodes[i], {{&spectra[0], &spectra[1]}})[0]);
    }
    const auto b = inverse_values(g, spec);
    auto& sq = per_node[i];
    sq.resize(b.size());
    for (std::size_t x = 0; x < b.size(); ++x) sq[x] = std::norm(b[x]);
  });
  std::vector<double> acc(g.size(), 0.0);
  for (const auto& sq : per_node) {
    for (std::size_t x = 0; x < acc.size(); ++x) acc[x] += w * sq[x];
  }
  for (auto& v : acc) v = std::sqrt(v);
  return SampledField::from_real(g, std::move(acc), FieldKind::nonnegative_real);
}

bool zero_frequency_warning(const Symbol& m) { return m(Freq{}, Freq{}) != cplx(0.0, 0.0); }

SampledField commutator_multiplier(const Symbol& m, const std::vector<SampledField>& b,
                                   const std::vector<SampledField>& fields, const TQuad& q) {
  require_arity(m, fields.size());
  require_same_grid(fields);
  if (b.size() != fields.size()) throw ConfigError("need one symbol-slot function b per input");
  for (const auto& bi : b) {
    if (!(bi.grid() == fields.front().grid())) throw ConfigError("b lives on a different grid");
  }
  const Grid& g = fields.front().grid();
  const std::size_t slots = fields.size();
  const auto nodes = q.nodes();
  const double w = q.weight();
  std::vector<std::vector<cplx>> spectra;
  for (const auto& f : fields) spectra.push_back(forward_values(g, f.values()));
  // Spectra of b_i f_i for each slot.
  std::vector<std::vector<cplx>> weighted;
  for (std::size_t i = 0; i < slots; ++i) {
    weighted.push_back(forward_values(g, pointwise_product(b[i], fields[i])));
  }

  // per_node[node][slot] holds |C_{i,t}|^2 at every x.
  std::vector<std::vector<std::vector<double>>> per_node(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t n) {
    const double t = nodes[n];
    std::vector<std::vector<cplx>> base_and_slots;
    if (slots == 1) {
      base_and_slots.push_back(unilinear_spectrum(m, g, t, spectra[0]));
      base_and_slots.push_back(unilinear_spectrum(m, g, t, weighted[0]));
    } else {
      base_and_slots = bilinear_spectra(
          m, g, t, {{&spectra[0], &spectra[1]}, {&weighted[0], &spectra[1]}, {&spectra[0], &weighted[1]}});
    }
    const auto base = inverse_values(g, base_and_slots[0]);
    auto& out = per_node[n];
    out.resize(slots);
    for (std::size_t i = 0; i < slots; ++i) {
      const auto moved = inverse_values(g, base_and_slots[i + 1]);
      out[i].resize(g.size());
      for (std::size_t x = 0; x < g.size(); ++x) {
        out[i][x] = std::norm(b[i][x].real() * base[x] - moved[x]);
      }
    }
  });
  std::vector<double> result(g.size(), 0.0);
  for (std::size_t i = 0; i < slots; ++i) {
    std::vector<double> acc(g.size(), 0.0);
    for (const auto& node : per_node) {
      for (std::size_t x = 0; x < acc.size(); ++x) acc[x] += w * node[i][x];
    }
    for (std::size_t x = 0; x < acc.size(); ++x) result[x] += std::sqrt(acc[x]);
  }
  return SampledField::from_real(g, std::move(result), FieldKind::nonnegative_real);
}

// --- kernel route ---------------------------------------------------------------

namespace {

// Band-limited interpolation of coarse samples onto a grid r times finer.
std::vector<cplx> refine_samples(const Grid& g, const std::vector<cplx>& values, int r) {
  if (r == 1) return values;
  const int n = g.points_per_axis();
  const int big = n * r;
  const Grid fine(g.dim(), big, g.box_length());
  const auto F = forward_values(g, values);
  std::vector<cplx> padded(fine.size());
  auto slot = [n, big](int i) {
    const int k = i < n / 2 ? i : i - n;
    return k < 0 ? k + big : k;
  };
  for (std::size_t i = 0; i < F.size(); ++i) {
    const auto idx = g.multi_index(i);
    const std::size_t dst = g.dim() == 1 ? static_cast<std::size_t>(slot(idx[0]))
                                         : fine.flat_index(slot(idx[0]), slot(idx[1]));
    padded[dst] = F[i];
  }
  return inverse_values(fine, padded);
}

int refinement_for(double t, double dx, int cap) {
  int r = 1;
  while (dx / r > t / 4.0 && r < cap) r *= 2;
  return r;
}

}  // namespace

KernelSquareOperator::KernelSquareOperator(const Symbol& m, const Grid& g, const TQuad& q,
                                           const KernelRouteOptions& opts)
    : arity_(m.arity()), grid_(g) {
  if (m.arity() * g.dim() > 2) {
    throw ConfigError("kernel route supports bilinear dim 1 or unilinear dim <= 2");
  }
  const double work = std::pow(static_cast<double>(g.points_per_axis()), 1 + m.arity() * g.dim());
  if (work > opts.work_limit) {
    throw ResourceError("kernel route work N^(1+arity*dim) = " + format_double(work) +
                        " exceeds the configured limit " + format_double(opts.work_limit));
  }
  if (opts.max_refine < 1) throw ConfigError("max_refine must be >= 1");
  const KernelEvaluator ev(m, g.dim(), opts.lattice);
  const auto ts = q.nodes();
  const double w = q.weight();
  nodes_.resize(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) {
    Node& node = nodes_[i];
    node.t = ts[i];
    node.weight = w;
    node.refine = refinement_for(ts[i], g.spacing(), opts.max_refine);
    const int p = g.points_per_axis() * node.refine;
    const double h = g.spacing() / node.refine;
    std::vector<double> disp(static_cast<std::size_t>(p));
    for (int d = 0; d < p; ++d) disp[static_cast<std::size_t>(d)] = d * h;
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(ev.total_dim()), disp);
    node.table = ev.table(node.t, axes, g.box_length());
  });
}

void KernelSquareOperator::check_fields(const std::vector<SampledField>& fields) const {
  if (fields.size() != static_cast<std::size_t>(arity_)) {
    throw ConfigError("kernel route expects " + std::to_string(arity_) + " input field(s)");
  }
  for (const auto& f : fields) {
    if (!(f.grid() == grid_)) throw ConfigError("input field does not match the operator grid");
  }
}

std::vector<cplx> KernelSquareOperator::node_integral(
    const Node& node, const std::vector<std::vector<cplx>>& fine, int slot,
    const std::vector<cplx>& b_fine) const {
  const int n = grid_.points_per_axis();
  const int r = node.refine;
  const int p = n * r;
  const std::size_t pp = static_cast<std::size_t>(p);
  const int mask = p - 1;
  const double h = grid_.spacing() / r;
  const auto& tab = node.table;
  std::vector<cplx> out(grid_.size());
  std::vector<cplx> g(fine[0].size());

  if (arity_ == 2) {
    std::vector<cplx> inner(pp);
    std::vector<cplx> g2(pp);
    for (int j = 0; j < n; ++j) {
      const int jr = j * r;
      const double bx = slot >= 0 ? b_fine[static_cast<std::size_t>(jr)].real() : 0.0;
      for (std::size_t y = 0; y < pp; ++y) {
        g2[y] = slot == 1 ? fine[1][y] * (bx - b_fine[y].real()) : fine[1][y];
      }
      for (std::size_t d1 = 0; d1 < pp; ++d1) {
        const cplx* row = &tab[d1 * pp];
        cplx s = 0.0;
        for (int y2 = 0; y2 < p; ++y2) s += row[(jr - y2) & mask] * g2[static_cast<std::size_t>(y2)];
        inner[d1] = s;
      }
      cplx s = 0.0;
      for (int y1 = 0; y1 < p; ++y1) {
        cplx f1 = fine[0][static_cast<std::size_t>(y1)];
        if (slot == 0) f1 *= bx - b_fine[static_cast<std::size_t>(y1)].real();
        s += f1 * inner[static_cast<std::size_t>((jr - y1) & mask)];
      }
      out[static_cast<std::size_t>(j)] = s * h * h;
    }
    return out;
  }

  if (grid_.dim() == 1) {
    for (int j = 0; j < n; ++j) {
      const int jr = j * r;
      const double bx = slot >= 0 ? b_fine[static_cast<std::size_t>(jr)].real() : 0.0;
      cplx s = 0.0;
      for (int y = 0; y < p; ++y) {
        cplx f = fine[0][static_cast<std::size_t>(y)];
        if (slot == 0) f *= bx - b_fine[static_cast<std::size_t>(y)].real();
        s += tab[static_cast<std::size_t>((jr - y) & mask)] * f;
      }
      out[static_cast<std::size_t>(j)] = s * h;
    }
    return out;
  }

  for (int j0 = 0; j0 < n; ++j0) {
    for (int j1 = 0; j1 < n; ++j1) {
      const std::size_t xfine = static_cast<std::size_t>(j0 * r) * pp + static_cast<std::size_t>(j1 * r);
      const double bx = slot >= 0 ? b_fine[xfine].real() : 0.0;
      cplx s = 0.0;
      for (int y0 = 0; y0 < p; ++y0) {
        const std::size_t trow = static_cast<std::size_t>((j0 * r - y0) & mask) * pp;
        for (int y1 = 0; y1 < p; ++y1) {
          const std::size_t y = static_cast<std::size_t>(y0) * pp + static_cast<std::size_t>(y1);
          cplx f = fine[0][y];
          if (slot == 0) f *= bx - b_fine[y].real();
          s += tab[trow + static_cast<std::size_t>((j1 * r - y1) & mask)] * f;
        }
      }
      out[grid_.flat_index(j0, j1)] = s * h * h;
    }
  }
  return out;
}

SampledField KernelSquareOperator::apply(const std::vector<SampledField>& fields) const {
  return commutator({}, fields);
}

SampledField KernelSquareOperator::commutator(const std::vector<SampledField>& b,
                                              const std::vector<SampledField>& fields) const {
  check_fields(fields);
  const bool plain = b.empty();
  if (!plain && b.size() != fields.size()) {
    throw ConfigError("need one symbol-slot function b per input");
  }
  for (const auto& bi : b) {
    if (!(bi.grid() == grid_)) throw ConfigError("b lives on a different grid");
  }
  // Interpolated inputs per distinct refinement factor.
  std::map<int, std::vector<std::vector<cplx>>> fine_fields;
  std::map<int, std::vector<std::vector<cplx>>> fine_b;
  for (const auto& node : nodes_) {
    if (fine_fields.count(node.refine)) continue;
    auto& ff = fine_fields[node.refine];
    for (const auto& f : fields) ff.push_back(refine_samples(grid_, f.values(), node.refine));
    auto& fb = fine_b[node.refine];
    for (const auto& bi : b) fb.push_back(refine_samples(grid_, bi.values(), node.refine));
  }
  const std::size_t slots = plain ? 1 : fields.size();
  std::vector<std::vector<std::vector<double>>> per_node(nodes_.size());
  parallel_for(nodes_.size(), [&](std::size_t i) {
    const Node& node = nodes_[i];
    const auto& ff = fine_fields.at(node.refine);
    per_node[i].resize(slots);
    for (std::size_t s = 0; s < slots; ++s) {
      const auto vals = plain ? node_integral(node, ff, -1, {})
                              : node_integral(node, ff, static_cast<int>(s),
                                              fine_b.at(node.refine)[s]);
      auto& sq = per_node[i][s];
      sq.resize(vals.size());
      for (std::size_t x = 0; x < vals.size(); ++x) sq[x] = std::norm(vals[x]);
    }
  });
  std::vector<double> result(grid_.size(), 0.0);
  for (std::size_t s = 0; s < slots; ++s) {
    std::vector<double> acc(grid_.size(), 0.0);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      for (std::size_t x = 0; x < acc.size(); ++x) acc[x] += nodes_[i].weight * per_node[i][s][x];
    }
    for (std::size_t x = 0; x < acc.size(); ++x) result[x] += std::sqrt(acc[x]);
  }
  return SampledField::from_real(grid_, std::move(result), FieldKind::nonnegative_real);
}

SampledField square_kernel(const Symbol& m, const std::vector<SampledField>& fields,
                           const TQuad& q, const KernelRouteOptions& opts) {
  require_arity(m, fields.size());
  require_same_grid(fields);
  return KernelSquareOperator(m, fields.front().grid(), q, opts).apply(fields);
}

SampledField commutator_square(const Symbol& m, const std::vector<SampledField>& b,
                               const std::vector<SampledField>& fields, const TQuad& q,
                               const KernelRouteOptions& opts) {
  require_arity(m, fields.size());
  require_same_grid(fields);
  if (b.size() != fields.size()) throw ConfigError("need one symbol-slot function b per input");
  return KernelSquareOperator(m, fields.front().grid(), q, opts).commutator(b, fields);
}

// --- four-frequency identity ----------------------------------------------------

double square_identity_check(const Symbol& m, const SampledField& f1, const SampledField& f2,
                             const TQuad& q) {
  require_arity(m, 2);
  if (!(f1.grid() == f2.grid())) throw ConfigError("fields live on different grids");
  const Grid& g = f1.grid();
  if (g.dim() != 1) throw ConfigError("the four-frequency identity check runs in dim 1");
  const int n = g.points_per_axis();
  if (n > 32) throw ResourceError("the four-frequency identity check is limited to N <= 32");
  const auto nodes = q.nodes();
  const double w = q.weight();
  const std::size_t nn = static_cast<std::size_t>(n);
  const int mask = n - 1;

  // Left side: sum_q w |B_t|^2 through the multiplier route.
  std::vector<double> lhs(nn, 0.0);
  for (double t : nodes) {
    const auto b = apply_bilinear_fixed_t(m, t, f1, f2);
    for (std::size_t x = 0; x < nn; ++x) lhs[x] += w * std::norm(b[x]);
  }

  // Right side: symbol summed over t first, then the four-fold sum per x.
  const auto F1 = forward_values(g, f1.values());
  const auto F2 = forward_values(g, f2.values());
  std::vector<cplx> c1(nn), c2(nn);
  for (std::size_t i = 0; i < nn; ++i) {
    c1[i] = std::conj(f1[i]);
    c2[i] = std::conj(f2[i]);
  }
  const auto G1 = forward_values(g, c1);
  const auto G2 = forward_values(g, c2);
  auto neg = [mask](std::size_t i) { return static_cast<std::size_t>((-static_cast<int>(i)) & mask); };
  std::vector<cplx> symbol4(nn * nn * nn * nn);
  std::vector<cplx> mt(nn * nn);
  for (double t : nodes) {
    for (std::size_t a = 0; a < nn; ++a) {
      for (std::size_t b = 0; b < nn; ++b) {
        mt[a * nn + b] = m(Freq{t * g.frequency(static_cast<int>(a)), 0.0},
                           Freq{t * g.frequency(static_cast<int>(b)), 0.0});
      }
    }
    for (std::size_t i1 = 0; i1 < nn; ++i1) {
      for (std::size_t i2 = 0; i2 < nn; ++i2) {
        const cplx left = w * mt[i1 * nn + i2];
        for (std::size_t i3 = 0; i3 < nn; ++i3) {
          cplx* dst = &symbol4[((i1 * nn + i2) * nn + i3) * nn];
          for (std::size_t i4 = 0; i4 < nn; ++i4) {
            dst[i4] += left * std::conj(mt[neg(i3) * nn + neg(i4)]);
          }
        }
      }
    }
  }
  std::vector<cplx> phase(nn);
  for (std::size_t k = 0; k < nn; ++k) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / n;
    phase[k] = {std::cos(a), std::sin(a)};
  }
  const double measure = std::pow(1.0 / g.box_length(), 4);
  std::vector<double> rhs(nn);
  for (std::size_t x = 0; x < nn; ++x) {
    cplx s = 0.0;
    for (std::size_t i1 = 0; i1 < nn; ++i1) {
      for (std::size_t i2 = 0; i2 < nn; ++i2) {
        const cplx p12 = F1[i1] * F2[i2];
        for (std::size_t i3 = 0; i3 < nn; ++i3) {
          const cplx p123 = p12 * G1[i3];
          const cplx* sym = &symbol4[((i1 * nn + i2) * nn + i3) * nn];
          for (std::size_t i4 = 0; i4 < nn; ++i4) {
            const std::size_t k = ((i1 + i2 + i3 + i4) * x) & static_cast<std::size_t>(mask);
            s += sym[i4] * p123 * G2[i4] * phase[k];
          }
        }
      }
    }
    rhs[x] = (s * measure).real();
  }
  const double top = *std::max_element(lhs.begin(), lhs.end());
  const double floor = 1e-12 * top;
  double worst = 0.0;
  for (std::size_t x = 0; x < nn; ++x) {
    const double den = std::max({std::abs(lhs[x]), std::abs(rhs[x]), floor});
    if (den == 0.0) continue;
    worst = std::max(worst, std::abs(lhs[x] - rhs[x]) / den);
  }
  return worst;
}

// --- annulus estimates --------------------------------------------------------

TQuad default_annulus_tquad(const Cube& Q, int j, int k) {
  const double r = Q.half_side;
  return TQuad{r * std::ldexp(1.0, -6), r * std::ldexp(1.0, std::max(j, k) + 6), 8};
}

namespace {

struct MeshPoint {
  double y;
  double weight;
};

// Midpoint cells of S_j(Q): Q itself for j = 0, else 2^j Q minus 2^(j-1) Q.
std::vector<MeshPoint> annulus_mesh(const Cube& Q, int j, int mesh) {
  std::vector<MeshPoint> out;
  const double c = Q.center;
  if (j == 0) {
    const double len = 2.0 * Q.half_side;
    const double h = len / mesh;
    for (int i = 0; i < mesh; ++i) out.push_back({c - Q.half_side + (i + 0.5) * h, h});
    return out;
  }
  const double inner = std::ldexp(Q.half_side, j - 1);
  const double outer = std::ldexp(Q.half_side, j);
  const int half = std::max(1, mesh / 2);
  const double h = (outer - inner) / half;
  for (int i = 0; i < half; ++i) out.push_back({c - outer + (i + 0.5) * h, h});
  for (int i = 0; i < half; ++i) out.push_back({c + inner + (i + 0.5) * h, h});
  return out;
}

// (sum_{y1 in S_k, y2 in S_j} I(y1, y2)^{p'/2} dy1 dy2)^{1/p'} where I is the
// t-integral of |K_t(x, y) - K_t(xb, y)|^2 (or |K_t(x, y)|^2 without xb).
// p = 1 gives the supremum of I^{1/2}.
double annulus_value(const Symbol& m, const Cube& Q, double x, std::optional<double> xbar,
                     int j, int k, double p, const AnnulusOptions& opts) {
  if (m.arity() != 2) throw ConfigError("annulus estimates need a bilinear symbol");
  if (j < 0 || k < 0 || (j == 0 && k == 0)) {
    throw ConfigError("annulus indices must be nonnegative and not both zero");
  }
  if (!(Q.half_side > 0.0)) throw ConfigError("window half side must be positive");
  if (opts.mesh < 2) throw ConfigError("annulus mesh must have at least 2 cells");
  const TQuad q = opts.tquad ? *opts.tquad : default_annulus_tquad(Q, j, k);
  const auto mesh1 = annulus_mesh(Q, k, opts.mesh);
  const auto mesh2 = annulus_mesh(Q, j, opts.mesh);
  const KernelEvaluator ev(m, 1, opts.lattice);
  const auto ts = q.nodes();
  const double w = q.weight();
  auto displacements = [](double from, const std::vector<MeshPoint>& pts) {
    std::vector<double> u(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) u[i] = from - pts[i].y;
    return u;
  };
  const auto ux1 = displacements(x, mesh1);
  const auto ux2 = displacements(x, mesh2);
  std::vector<double> ub1, ub2;
  if (xbar) {
    ub1 = displacements(*xbar, mesh1);
    ub2 = displacements(*xbar, mesh2);
  }
  const std::size_t cells = mesh1.size() * mesh2.size();
  std::vector<std::vector<double>> per_node(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) {
    auto kx = ev.table(ts[i], {ux1, ux2});
    auto& acc = per_node[i];
    acc.resize(cells);
    if (xbar) {
      const auto kb = ev.table(ts[i], {ub1, ub2});
      for (std::size_t c = 0; c < cells; ++c) acc[c] = std::norm(kx[c] - kb[c]);
    } else {
      for (std::size_t c = 0; c < cells; ++c) acc[c] = std::norm(kx[c]);
    }
  });
  std::vector<double> integrand(cells, 0.0);
  for (const auto& acc : per_node) {
    for (std::size_t c = 0; c < cells; ++c) integrand[c] += w * acc[c];
  }
  if (p == 1.0) {
    double best = 0.0;
    for (double v : integrand) best = std::max(best, std::sqrt(v));
    return best;
  }
  const double pc = p / (p - 1.0);
  double sum = 0.0;
  for (std::size_t a = 0; a < mesh1.size(); ++a) {
    for (std::size_t b = 0; b < mesh2.size(); ++b) {
      const double v = integrand[a * mesh2.size() + b];
      if (v == 0.0) continue;
      sum += std::pow(v, 0.5 * pc) * mesh1[a].weight * mesh2[b].weight;
    }
  }
  return std::pow(sum, 1.0 / pc);
}

void check_annulus_exponent(double p) {
  if (!(p > 1.0 && p <= 2.0)) throw ConfigError("annulus estimates need 1 < p <= 2");
}

void check_inside_half(const Cube& Q, double x) {
  if (std::abs(x - Q.center) > 0.5 * Q.half_side * (1.0 + 1e-12)) {
    throw ConfigError("points must lie in the half-size window");
  }
}

}  // namespace

double estimate_Ajk(const Symbol& m, const Cube& Q, double x, double xbar, int j, int k,
                    double p, const AnnulusOptions& opts) {
  check_annulus_exponent(p);
  check_inside_half(Q, x);
  check_inside_half(Q, xbar);
  if (x == xbar) {
    if (j < 0 || k < 0 || (j == 0 && k == 0)) {
      throw ConfigError("annulus indices must be nonnegative and not both zero");
    }
    return 0.0;
  }
  return annulus_value(m, Q, x, xbar, j, k, p, opts);
}

double estimate_Bjk(const Symbol& m, const Cube& Q, int j, int k, double p,
                    const AnnulusOptions& opts) {
  check_annulus_exponent(p);
  return annulus_value(m, Q, Q.center, std::nullopt, j, k, p, opts);
}

// --- kernel-side conditions -------------------------------------------------------

namespace {

double slope_of(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

}  // namespace

ConditionReport check_kernel_condition(const Symbol& m, ConditionId cond,
                                       const KernelCheckOptions& opts) {
  if (m.arity() != 2) throw ConfigError("kernel conditions are checked for bilinear symbols");
  if (!(opts.p0 >= 1.0 && opts.p0 <= 2.0)) throw ConfigError("kernel checks need 1 <= p0 <= 2");
  if (opts.scale_min > opts.scale_max) throw ConfigError("empty scale range");
  ConditionReport rep;
  rep.condition = cond;
  rep.level_min = opts.scale_min;
  rep.level_max = opts.scale_max;
  const int mlin = 2;  // multilinearity
  const int n = 1;     // dimension
  AnnulusOptions aopt;
  aopt.mesh = opts.mesh;

  if (cond == ConditionId::H2 || cond == ConditionId::H3) {
    if (cond == ConditionId::H2 && !(opts.delta > n / opts.p0)) {
      throw HypothesisError("kernel regularity needs delta > dim / p0");
    }
    for (int scale = opts.scale_min; scale <= opts.scale_max; ++scale) {
      const Cube Q{0.0, std::ldexp(1.0, scale)};
      const double volume = 2.0 * Q.half_side;
      for (int j = 0; j <= opts.j_max; ++j) {
        for (int k = 0; k <= opts.j_max; ++k) {
          if (j == 0 && k == 0) continue;
          const int j0 = std::max(j, k);
          double observed = 0.0;
          double bound = 0.0;
          if (cond == ConditionId::H3) {
            observed = annulus_value(m, Q, Q.center, std::nullopt, j, k, opts.p0, aopt);
            bound = std::pow(2.0, -static_cast<double>(mlin * n * j0) / opts.p0) /
                    std::pow(volume, mlin / opts.p0);
          } else {
            const double z = Q.center + 0.25 * Q.half_side;
            observed = annulus_value(m, Q, Q.center, z, j, k, opts.p0, aopt);
            const double dist = std::abs(z - Q.center);
            bound = std::pow(dist, mlin * (opts.delta - n / opts.p0)) /
                    std::pow(volume, mlin * opts.delta / n) *
                    std::pow(2.0, -mlin * opts.delta * j0);
          }
          const double margin = observed / bound;
          rep.entries.push_back({scale, {j, k}, margin, std::isfinite(margin)});
        }
      }
    }
  } else if (cond == ConditionId::XY_smooth) {
    const KernelEvaluator ev(m, 1, KernelLattice{});
    for (int scale = opts.scale_min; scale <= opts.scale_max; ++scale) {
      const double rho = std::ldexp(1.0, scale);
      const TQuad q{rho * std::ldexp(1.0, -8), rho * std::ldexp(1.0, 8), 4};
      const auto ts = q.nodes();
      std::vector<double> u1, u2, v1, v2;
      for (int i = 0; i < opts.samples; ++i) {
        const double share = (i + 0.5) / opts.samples;
        const double s1 = (i % 2 == 0) ? 1.0 : -1.0;
        const double s2 = (i % 4 < 2) ? 1.0 : -1.0;
        u1.push_back(s1 * rho * share);
        u2.push_back(s2 * rho * (1.0 - share));
        v1.push_back(u1.back() + 0.25 * rho);
        v2.push_back(u2.back() + 0.25 * rho);
      }
      std::vector<double> size(u1.size(), 0.0), reg(u1.size(), 0.0);
      for (double t : ts) {
        const auto kx = ev.table(t, {u1, u2});
        const auto kz = ev.table(t, {v1, v2});
        const std::size_t cols = u2.size();
        for (std::size_t i = 0; i < u1.size(); ++i) {
          size[i] += q.weight() * std::norm(kx[i * cols + i]);
          reg[i] += q.weight() * std::norm(kz[i * cols + i] - kx[i * cols + i]);
        }
      }
      double size_margin = 0.0;
      double reg_margin = 0.0;
      for (std::size_t i = 0; i < u1.size(); ++i) {
        size_margin = std::max(size_margin, std::sqrt(size[i]) * std::pow(rho, mlin * n));
        reg_margin = std::max(reg_margin, std::sqrt(reg[i]) * std::pow(rho, mlin * n + opts.gamma) /
                                              std::pow(0.25 * rho, opts.gamma));
      }
      rep.entries.push_back({scale, {0}, size_margin, std::isfinite(size_margin)});
      rep.entries.push_back({scale, {1}, reg_margin, std::isfinite(reg_margin)});
    }
  } else {
    throw ConfigError("condition " + condition_name(cond) + " is a symbol condition");
  }
  std::map<int, double> per_level;
  for (const auto& e : rep.entries) {
    rep.overall_margin = std::max(rep.overall_margin, e.margin);
    per_level[e.level] = std::max(per_level[e.level], e.margin);
  }
  std::vector<std::pair<double, double>> curve;
  for (const auto& [level, v] : per_level) {
    if (v > 0.0 && std::isfinite(v)) curve.emplace_back(level, std::log2(v));
  }
  rep.low_end_slope = rep.high_end_slope = slope_of(curve);
  rep.margins_bounded = std::isfinite(rep.overall_margin) && std::abs(rep.low_end_slope) <= 0.1;
  return rep;
}

}  // namespace mslab
