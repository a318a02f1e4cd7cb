// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#include "mslab/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

#include "mslab/error.hpp"
#include "mslab/parallel.hpp"

namespace mslab {

Symbol::Symbol(int arity, Evaluator fn, std::string name, std::optional<DecayClaim> claim)
    : arity_(arity),
      fn_(std::make_shared<const Evaluator>(std::move(fn))),
      name_(std::move(name)),
      claim_(claim) {
  if (arity != 1 && arity != 2) throw ConfigError("symbol arity must be 1 or 2");
}

Symbol Symbol::scaled(cplx c) const {
  auto inner = fn_;
  return Symbol(
      arity_, [inner, c](const Freq& a, const Freq& b) { return c * (*inner)(a, b); },
      name_ + "*scaled", claim_);
}

namespace {

double radius_squared(const Freq& a, const Freq& b) {
  return a[0] * a[0] + a[1] * a[1] + b[0] * b[0] + b[1] * b[1];
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

}  // namespace

Symbol builtin_symbol(const std::string& family, const std::map<std::string, double>& params) {
  auto param = [&](const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  for (const auto& [key, value] : params) {
    if (!(family == "rational_bump" && key == "k")) {
      throw ConfigError("family " + family + " takes no parameter '" + key + "'");
    }
  }
  const DecayClaim schwartz{2, 1.0, 1.0};
  if (family == "gauss_bump" || family == "unilinear_gauss") {
    const int arity = family == "gauss_bump" ? 2 : 1;
    return Symbol(
        arity,
        [](const Freq& a, const Freq& b) {
          const double r2 = radius_squared(a, b);
          return cplx(r2 * std::exp(-r2), 0.0);
        },
        family, schwartz);
  }
  if (family == "rational_bump") {
    const double k = param("k", 4.0);
    if (k < 2.0 || std::floor(k) != k) throw ConfigError("rational_bump needs an integer k >= 2");
    // Claims eps1 <= 2 and s + eps2 <= 2k - 2; the representative claim
    // below is the one used when a config does not override it.
    const DecayClaim claim{2, 1.0, std::min(1.0, 2.0 * k - 4.0)};
    return Symbol(
        2,
        [k](const Freq& a, const Freq& b) {
          const double r2 = radius_squared(a, b);
          return cplx(r2 / std::pow(1.0 + r2, k), 0.0);
        },
        "rational_bump:k=" + std::to_string(static_cast<int>(k)), claim);
  }
  if (family == "zero") {
    return Symbol(2, [](const Freq&, const Freq&) { return cplx(0.0, 0.0); }, family, schwartz);
  }
  if (family == "one") {
    return Symbol(2, [](const Freq&, const Freq&) { return cplx(1.0, 0.0); }, family);
  }
  throw ConfigError("unknown symbol family '" + family + "'");
}

FamilySpec parse_family_spec(const std::string& spec) {
  const std::string s = trim(spec);
  const auto colon = s.find(':');
  FamilySpec out;
  out.family = trim(s.substr(0, colon));
  if (colon == std::string::npos) return out;
  const std::string rest = s.substr(colon + 1);
  std::size_t pos = 0;
  while (pos <= rest.size()) {
    const auto comma = rest.find(',', pos);
    const std::string item = trim(rest.substr(pos, comma - pos));
    if (!item.empty()) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("malformed parameter '" + item + "'");
      std::size_t used = 0;
      const std::string value = trim(item.substr(eq + 1));
      try {
        out.params[trim(item.substr(0, eq))] = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size()) throw ConfigError("malformed parameter '" + item + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

Symbol symbol_from_spec(const std::string& spec, int arity_hint) {
  const std::string s = trim(spec);
  if (s.rfind("expr:", 0) == 0) return parse_symbol(s.substr(5), arity_hint);
  const auto [family, params] = parse_family_spec(s);
  Symbol m = builtin_symbol(family, params);
  if (arity_hint == 1 && m.arity() == 2 && family == "zero") {
    return Symbol(1, [](const Freq&, const Freq&) { return cplx(0.0, 0.0); }, "zero");
  }
  if (arity_hint != 0 && m.arity() != arity_hint) {
    throw ConfigError("symbol family " + family + " has arity " + std::to_string(m.arity()));
  }
  return m;
}

double frequency_radius(const Freq& xi1, const Freq& xi2) {
  return std::hypot(xi1[0], xi1[1]) + std::hypot(xi2[0], xi2[1]);
}

// --- Littlewood-Paley pieces --------------------------------------------------

namespace {

double sigma(double u) { return u > 0.0 ? std::exp(-1.0 / u) : 0.0; }

// Smooth step: 1 for u <= 0, 0 for u >= 1.
double chi(double u) {
  const double a = sigma(1.0 - u);
  const double b = sigma(u);
  return a / (a + b);
}

}  // namespace

double partition_bump(double rho) {
  if (!(rho > 0.0)) return 0.0;
  const double u = std::log2(rho);
  if (u <= -1.0 || u >= 1.0) return 0.0;
  // chi(u) - chi(u + 1): rises on [-1, 0], falls on [0, 1]. Consecutive
  // dyadic shifts telescope to 1.
  return chi(u) - chi(u + 1.0);
}

Symbol lp_piece(const Symbol& m, int level) {
  if (m.arity() != 2) throw ConfigError("Littlewood-Paley pieces need a bilinear symbol");
  const double scale = std::ldexp(1.0, -level);
  return Symbol(
      2,
      [m, scale](const Freq& a, const Freq& b) {
        const double cut = partition_bump(scale * frequency_radius(a, b));
        if (cut == 0.0) return cplx(0.0, 0.0);
        return cut * m(a, b);
      },
      m.name() + "@" + std::to_string(level));
}

// --- derivative checks --------------------------------------------------------

std::string condition_name(ConditionId id) {
  switch (id) {
    case ConditionId::eq13: return "eq13";
    case ConditionId::eq21: return "eq21";
    case ConditionId::eq152: return "eq152";
    case ConditionId::eq153: return "eq153";
    case ConditionId::H2: return "H2";
    case ConditionId::H3: return "H3";
    case ConditionId::XY_smooth: return "XY-smooth";
  }
  return "?";
}

ConditionId condition_from_name(const std::string& name) {
  for (auto id : {ConditionId::eq13, ConditionId::eq21, ConditionId::eq152, ConditionId::eq153,
                  ConditionId::H2, ConditionId::H3, ConditionId::XY_smooth}) {
    if (condition_name(id) == name) return id;
  }
  throw ConfigError("unknown condition '" + name + "'");
}

namespace {

struct Stencil {
  std::vector<int> offsets;
  std::vector<double> weights;  // to be divided by h^order
};

// Central difference stencils of second-order accuracy.
const Stencil& stencil(int order) {
  static const std::vector<Stencil> table = {
      {{0}, {1.0}},
      {{-1, 1}, {-0.5, 0.5}},
      {{-1, 0, 1}, {1.0, -2.0, 1.0}},
      {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}},
      {{-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}},
      {{-3, -2, -1, 1, 2, 3}, {-0.5, 2.0, -2.5, 2.5, -2.0, 0.5}},
  };
  if (order < 0 || order >= static_cast<int>(table.size())) {
    throw ConfigError("derivative order per variable must be at most 5");
  }
  return table[static_cast<std::size_t>(order)];
}

// Variable v of the flattened (xi1, xi2) vector, v = arg * dim + component.
double& variable(Freq& a, Freq& b, int dim, int v) {
  const int arg = v / dim;
  const int comp = v % dim;
  return arg == 0 ? a[static_cast<std::size_t>(comp)] : b[static_cast<std::size_t>(comp)];
}

void enumerate_multiindices(int vars, int max_order, std::vector<int>& cur,
                            std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == vars) {
    out.push_back(cur);
    return;
  }
  int used = 0;
  for (int a : cur) used += a;
  for (int k = 0; k + used <= max_order; ++k) {
    cur.push_back(k);
    enumerate_multiindices(vars, max_order, cur, out);
    cur.pop_back();
  }
}

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
    i /= static_cast<std::uint64_t>(base);
    f *= inv;
  }
  return r;
}

// Quasi-random point with |xi1| + |xi2| = rho (Halton coordinates u[1..3]).
void annulus_point(int arity, int dim, double rho, const double u[4], Freq& a, Freq& b) {
  a = {0.0, 0.0};
  b = {0.0, 0.0};
  const double share = arity == 2 ? u[1] : 1.0;
  const double ra = rho * share;
  const double rb = rho - ra;
  auto place = [dim](Freq& f, double r, double w) {
    if (dim == 1) {
      f[0] = w < 0.5 ? -r : r;
    } else {
      const double angle = 2.0 * std::numbers::pi * w;
      f[0] = r * std::cos(angle);
      f[1] = r * std::sin(angle);
    }
  };
  place(a, ra, u[2]);
  if (arity == 2) place(b, rb, u[3]);
}

double fit_slope(const std::vector<std::pair<double, double>>& pts) {
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

cplx central_derivative(const Symbol& m, int dim, const Freq& xi1, const Freq& xi2,
                        const std::vector<int>& alpha, double h) {
  const int vars = m.arity() * dim;
  if (static_cast<int>(alpha.size()) != vars) throw ConfigError("multiindex length mismatch");
  int total = 0;
  for (int a : alpha) total += a;
  // Tensor product of per-variable stencils, walked as an odometer.
  std::vector<const Stencil*> st(static_cast<std::size_t>(vars));
  for (int v = 0; v < vars; ++v) st[static_cast<std::size_t>(v)] = &stencil(alpha[static_cast<std::size_t>(v)]);
  std::vector<std::size_t> pos(static_cast<std::size_t>(vars), 0);
  cplx sum = 0.0;
  for (;;) {
    Freq a = xi1;
    Freq b = xi2;
    double w = 1.0;
    for (int v = 0; v < vars; ++v) {
      const auto& s = *st[static_cast<std::size_t>(v)];
      const std::size_t p = pos[static_cast<std::size_t>(v)];
      variable(a, b, dim, v) += s.offsets[p] * h;
      w *= s.weights[p];
    }
    sum += w * m(a, b);
    int v = 0;
    for (; v < vars; ++v) {
      auto& p = pos[static_cast<std::size_t>(v)];
      if (++p < st[static_cast<std::size_t>(v)]->offsets.size()) break;
      p = 0;
    }
    if (v == vars) break;
  }
  return sum / std::pow(h, total);
}

ConditionReport check_decay_condition(const Symbol& m, ConditionId cond,
                                      const DecayCheckOptions& opts) {
  if (opts.dim != 1 && opts.dim != 2) throw ConfigError("dimension must be 1 or 2");
  if (opts.level_min > opts.level_max) throw ConfigError("empty annulus range");
  if (opts.samples_per_annulus < 1) throw ConfigError("need at least one sample per annulus");
  if (!(opts.fd_step > 0.0)) throw ConfigError("finite-difference step must be positive");
  const int vars = m.arity() * opts.dim;
  int order = 0;
  switch (cond) {
    case ConditionId::eq13:
    case ConditionId::eq152:
      order = opts.s;
      break;
    case ConditionId::eq21:
      order = 2 * opts.dim + 1;
      break;
    case ConditionId::eq153:
      order = 0;
      break;
    default:
      throw ConfigError("condition " + condition_name(cond) +
                        " is a kernel condition; use check_kernel_condition");
  }
  if (opts.max_order >= 0) order = opts.max_order;
  std::vector<std::vector<int>> alphas;
  std::vector<int> cur;
  enumerate_multiindices(vars, order, cur, alphas);

  auto bound = [&](double rho, int abs_alpha) {
    switch (cond) {
      case ConditionId::eq13:
        return std::pow(rho, -abs_alpha + opts.eps1) / std::pow(1.0 + rho, opts.eps1 + opts.eps2);
      case ConditionId::eq21:
        return std::pow(1.0 + rho, -opts.s - opts.eps1);
      case ConditionId::eq152:
        return std::pow(rho, -abs_alpha);
      default:
        return std::pow(rho, opts.eps1) / std::pow(1.0 + rho, opts.eps1 + opts.eps2);
    }
  };

  const int levels = opts.level_max - opts.level_min + 1;
  std::vector<std::vector<ConditionEntry>> per_level(static_cast<std::size_t>(levels));
  parallel_for(static_cast<std::size_t>(levels), [&](std::size_t li) {
    const int level = opts.level_min + static_cast<int>(li);
    const double h = opts.fd_step * std::ldexp(1.0, level);
    auto& entries = per_level[li];
    for (const auto& alpha : alphas) {
      int abs_alpha = 0;
      for (int a : alpha) abs_alpha += a;
      ConditionEntry e{level, alpha, 0.0, true};
      for (int i = 0; i < opts.samples_per_annulus; ++i) {
        const auto idx = static_cast<std::uint64_t>(i) + 1;
        const double u[4] = {radical_inverse(idx, 2), radical_inverse(idx, 3),
                             radical_inverse(idx, 5), radical_inverse(idx, 7)};
        const double rho = std::ldexp(1.0, level - 1) * std::pow(4.0, u[0]);
        Freq a, b;
        annulus_point(m.arity(), opts.dim, rho, u, a, b);
        const double d = std::abs(central_derivative(m, opts.dim, a, b, alpha, h));
        const double r = d / bound(rho, abs_alpha);
        if (!std::isfinite(r)) {
          e.finite = false;
          e.margin = std::numeric_limits<double>::infinity();
          break;
        }
        e.margin = std::max(e.margin, r);
      }
      entries.push_back(std::move(e));
    }
  });

  ConditionReport rep;
  rep.condition = cond;
  rep.derivative_step = opts.fd_step;
  rep.level_min = opts.level_min;
  rep.level_max = opts.level_max;
  std::vector<std::pair<double, double>> curve;
  for (auto& entries : per_level) {
    double level_max = 0.0;
    for (auto& e : entries) {
      rep.overall_margin = std::max(rep.overall_margin, e.margin);
      level_max = std::max(level_max, e.margin);
      rep.entries.push_back(std::move(e));
    }
    if (level_max > 0.0 && std::isfinite(level_max)) {
      curve.emplace_back(rep.entries.back().level, std::log2(level_max));
    }
  }
  const std::size_t edge = std::min<std::size_t>(4, curve.size());
  if (edge >= 2) {
    rep.low_end_slope = fit_slope({curve.begin(), curve.begin() + static_cast<long>(edge)});
    rep.high_end_slope = fit_slope({curve.end() - static_cast<long>(edge), curve.end()});
  }
  rep.margins_bounded = std::isfinite(rep.overall_margin) && rep.low_end_slope >= -0.1 &&
                        rep.high_end_slope <= 0.1;
  return rep;
}

// --- kernels ----------------------------------------------------------------

std::optional<std::function<double(const std::vector<double>&)>> analytic_inverse(
    const std::string& family, int arity, int dim) {
  const int total = arity * dim;
  if (family == "zero") {
    return [](const std::vector<double>&) { return 0.0; };
  }
  if ((family == "gauss_bump" && arity == 2) || (family == "unilinear_gauss" && arity == 1)) {
    // Transform of e^{-|xi|^2} is g(v) = pi^{D/2} e^{-pi^2 |v|^2}; multiplying
    // by |xi|^2 applies -Laplacian / (4 pi^2).
    const double pi = std::numbers::pi;
    const double pref = std::pow(pi, 0.5 * total);
    return [pref, total, pi](const std::vector<double>& v) {
      double r2 = 0.0;
      for (double x : v) r2 += x * x;
      const double q = pi * pi * r2;
      return pref * std::exp(-q) * (0.5 * total - q);
    };
  }
  return std::nullopt;
}

KernelEvaluator::KernelEvaluator(const Symbol& m, int dim, KernelLattice lattice)
    : dim_(dim), total_dim_(m.arity() * dim), lattice_(lattice) {
  if (dim != 1 && dim != 2) throw ConfigError("dimension must be 1 or 2");
  if (total_dim_ > 2) {
    throw ConfigError("kernel synthesis supports arity * dim <= 2");
  }
  if (!(lattice.box > 0.0) || lattice.points < 8 || (lattice.points & (lattice.points - 1))) {
    throw ConfigError("kernel lattice needs a positive box and a power-of-two point count");
  }
  const int n = lattice.points;
  const double deta = 1.0 / lattice.box;
  auto freq = [n, deta](int i) { return (i < n / 2 ? i : i - n) * deta; };
  const std::size_t count = total_dim_ == 1 ? static_cast<std::size_t>(n)
                                            : static_cast<std::size_t>(n) * n;
  samples_.resize(count);
  for (std::size_t idx = 0; idx < count; ++idx) {
    const int i0 = total_dim_ == 1 ? static_cast<int>(idx) : static_cast<int>(idx / n);
    const int i1 = total_dim_ == 1 ? 0 : static_cast<int>(idx % n);
    Freq a{0.0, 0.0};
    Freq b{0.0, 0.0};
    if (total_dim_ == 1) {
      a[0] = freq(i0);
    } else if (m.arity() == 2) {
      a[0] = freq(i0);
      b[0] = freq(i1);
    } else {
      a[0] = freq(i0);
      a[1] = freq(i1);
    }
    samples_[idx] = m(a, b);
  }
}

std::vector<cplx> KernelEvaluator::axis_phases(const std::vector<double>& pts, double t,
                                               double period) const {
  const int n = lattice_.points;
  const double half = 0.5 * lattice_.box;
  const double deta = 1.0 / lattice_.box;
  std::vector<cplx> out(pts.size() * static_cast<std::size_t>(n));
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const double u = pts[p];
    long n_lo = 0;
    long n_hi = 0;
    if (period > 0.0) {
      n_lo = static_cast<long>(std::ceil((-half * t - u) / period));
      n_hi = static_cast<long>(std::floor((half * t - u) / period));
    }
    for (long img = n_lo; img <= n_hi; ++img) {
      const double v = (u + static_cast<double>(img) * period) / t;
      if (!(v >= -half && v < half)) continue;
      for (int k = 0; k < n; ++k) {
        const double eta = (k < n / 2 ? k : k - n) * deta;
        const double phase = 2.0 * std::numbers::pi * v * eta;
        out[p * static_cast<std::size_t>(n) + static_cast<std::size_t>(k)] +=
            cplx(std::cos(phase), std::sin(phase));
      }
    }
  }
  return out;
}

std::vector<cplx> KernelEvaluator::table(double t, const std::vector<std::vector<double>>& axis_points,
                                         double period) const {
  if (!(t > 0.0)) throw ConfigError("kernel scale t must be positive");
  if (static_cast<int>(axis_points.size()) != total_dim_) {
    throw ConfigError("kernel table needs one point list per kernel axis");
  }
  const int n = lattice_.points;
  const std::size_t nn = static_cast<std::size_t>(n);
  const double norm = 1.0 / lattice_.box;
  if (total_dim_ == 1) {
    const auto e = axis_phases(axis_points[0], t, period);
    const double scale = norm / t;
    std::vector<cplx> out(axis_points[0].size());
    for (std::size_t p = 0; p < out.size(); ++p) {
      cplx s = 0.0;
      for (std::size_t k = 0; k < nn; ++k) s += e[p * nn + k] * samples_[k];
      out[p] = s * scale;
    }
    return out;
  }
  const auto e0 = axis_phases(axis_points[0], t, period);
  const auto e1 = axis_phases(axis_points[1], t, period);
  const std::size_t p0 = axis_points[0].size();
  const std::size_t p1 = axis_points[1].size();
  // A[k0][q] = sum_k1 M[k0][k1] E1[q][k1]
  std::vector<cplx> a(nn * p1);
  for (std::size_t k0 = 0; k0 < nn; ++k0) {
    const cplx* row = &samples_[k0 * nn];
    for (std::size_t q = 0; q < p1; ++q) {
      const cplx* e = &e1[q * nn];
      cplx s = 0.0;
      for (std::size_t k1 = 0; k1 < nn; ++k1) s += row[k1] * e[k1];
      a[k0 * p1 + q] = s;
    }
  }
  const double scale = norm * norm / (t * t);
  std::vector<cplx> out(p0 * p1);
  for (std::size_t p = 0; p < p0; ++p) {
    const cplx* e = &e0[p * nn];
    cplx* dst = &out[p * p1];
    for (std::size_t k0 = 0; k0 < nn; ++k0) {
      const cplx w = e[k0];
      if (w == cplx(0.0, 0.0)) continue;
      const cplx* src = &a[k0 * p1];
      for (std::size_t q = 0; q < p1; ++q) dst[q] += w * src[q];
    }
    for (std::size_t q = 0; q < p1; ++q) dst[q] *= scale;
  }
  return out;
}

cplx KernelEvaluator::value(const std::vector<double>& v) const {
  std::vector<std::vector<double>> pts;
  for (double x : v) pts.push_back({x});
  return table(1.0, pts)[0];
}

SampledField synthesize_kernel(const Symbol& m, const Grid& g, double t,
                               const KernelLattice& lattice, bool periodize) {
  if (!(t > 0.0)) throw ConfigError("kernel scale t must be positive");
  KernelEvaluator ev(m, g.dim(), lattice);
  const int n = g.points_per_axis();
  std::vector<double> disp(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) disp[static_cast<std::size_t>(i)] = g.frequency_index(i) * g.spacing();
  std::vector<std::vector<double>> axes(static_cast<std::size_t>(ev.total_dim()), disp);
  auto values = ev.table(t, axes, periodize ? g.box_length() : 0.0);
  return SampledField(Grid(ev.total_dim(), n, g.box_length()), std::move(values));
}

}  // namespace mslab
