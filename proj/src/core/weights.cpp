// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#include "mslab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mslab/error.hpp"
#include "mslab/parallel.hpp"
#include "mslab/symbols.hpp"

namespace mslab {

namespace {

double torus_distance(const Point& x, const Point& c, const Grid& g) {
  const double L = g.box_length();
  double s = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    double d = std::fmod(std::abs(x[static_cast<std::size_t>(a)] - c[static_cast<std::size_t>(a)]), L);
    d = std::min(d, L - d);
    s += d * d;
  }
  return std::sqrt(s);
}

double regularized_distance(const Point& x, const Point& c, const Grid& g) {
  return std::max(torus_distance(x, c, g), 0.5 * g.spacing());
}

double param(const FamilySpec& spec, const std::string& key, double fallback) {
  auto it = spec.params.find(key);
  return it == spec.params.end() ? fallback : it->second;
}

void allow_keys(const FamilySpec& spec, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : spec.params) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; })) {
      throw ConfigError("unknown parameter '" + k + "' for " + spec.family);
    }
  }
}

Point spec_center(const FamilySpec& spec, const Grid& g) {
  const double mid = 0.5 * g.box_length();
  return {param(spec, "x0", mid), g.dim() == 2 ? param(spec, "x1", mid) : 0.0};
}

std::vector<double> positive_samples(const SampledField& w) {
  if (!w.is_real()) throw ConfigError("weights must be real");
  auto v = w.real_parts();
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) throw ConfigError("weights must be positive and finite");
  }
  return v;
}

// Rescale by the maximum so that w -> c w leaves the samples unchanged
// whenever c is a power of two.
std::vector<double> normalized(std::vector<double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  for (auto& x : v) x /= top;
  return v;
}

}  // namespace

SampledField power_weight(double a, const Point& center, const Grid& g) {
  if (!(std::abs(a) < 10.0 * g.dim())) throw ConfigError("power weight exponent out of range");
  std::vector<double> v(g.size(), 1.0);
  if (a != 0.0) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      v[i] = std::max(std::pow(regularized_distance(g.point(i), center, g), a), 1e-300);
    }
  }
  return SampledField::from_real(g, std::move(v), FieldKind::nonnegative_real);
}

SampledField weight_from_spec(const std::string& text, const Grid& g) {
  const FamilySpec spec = parse_family_spec(text);
  if (spec.family == "unit") {
    allow_keys(spec, {});
    return SampledField::from_real(g, std::vector<double>(g.size(), 1.0), FieldKind::nonnegative_real);
  }
  if (spec.family == "constant") {
    allow_keys(spec, {"c"});
    const double c = param(spec, "c", 1.0);
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("constant weight must be positive");
    return SampledField::from_real(g, std::vector<double>(g.size(), c), FieldKind::nonnegative_real);
  }
  if (spec.family == "power") {
    allow_keys(spec, {"a", "x0", "x1"});
    if (!spec.params.count("a")) throw ConfigError("power weight needs a=<exponent>");
    return power_weight(param(spec, "a", 0.0), spec_center(spec, g), g);
  }
  throw ConfigError("unknown weight family '" + spec.family + "'");
}

SampledField bmo_function_from_spec(const std::string& text, const Grid& g) {
  const FamilySpec spec = parse_family_spec(text);
  std::function<double(const Point&)> fn;
  if (spec.family == "zero") {
    allow_keys(spec, {});
    fn = [](const Point&) { return 0.0; };
  } else if (spec.family == "constant") {
    allow_keys(spec, {"c"});
    const double c = param(spec, "c", 1.0);
    fn = [c](const Point&) { return c; };
  } else if (spec.family == "log") {
    allow_keys(spec, {"x0", "x1"});
    const Point c = spec_center(spec, g);
    fn = [c, &g](const Point& x) { return std::log(regularized_distance(x, c, g)); };
  } else if (spec.family == "cos") {
    allow_keys(spec, {"k"});
    const double k = param(spec, "k", 1.0);
    const double L = g.box_length();
    fn = [k, L](const Point& x) { return std::cos(2.0 * std::numbers::pi * k * x[0] / L); };
  } else {
    throw ConfigError("unknown bmo function family '" + spec.family + "'");
  }
  std::vector<double> v(g.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(g.point(i));
  return SampledField::from_real(g, std::move(v));
}

WeightReport ap_characteristic(const SampledField& w, double p, const WindowFamily& W) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw ConfigError("A_p characteristic needs finite p > 1 (use the A_1 variant for p = 1)");
  }
  const Grid& g = w.grid();
  const auto v = normalized(positive_samples(w));
  const double dual = 1.0 - p / (p - 1.0);  // 1 - p'
  std::vector<double> sigma(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) sigma[i] = std::pow(v[i], dual);
  const WindowStats sw(g, v, W.wrap);
  const WindowStats ss(g, sigma, W.wrap);
  const auto best = best_window_per_side(g, W, [&](int side) {
    auto lo = std::make_shared<std::vector<double>>(sw.minima(side));
    auto hi = std::make_shared<std::vector<double>>(sw.maxima(side));
    return CornerValue([&, lo, hi](const Window& win, std::size_t c) {
      if ((*lo)[c] == (*hi)[c]) return 1.0;
      return sw.mean(win) * std::pow(ss.mean(win), p - 1.0);
    });
  });
  return {best.value, best.window};
}

WeightReport a1_characteristic(const SampledField& w, const WindowFamily& W) {
  const Grid& g = w.grid();
  const auto v = normalized(positive_samples(w));
  const WindowStats sw(g, v, W.wrap);
  const auto best = best_window_per_side(g, W, [&](int side) {
    auto lo = std::make_shared<std::vector<double>>(sw.minima(side));
    auto hi = std::make_shared<std::vector<double>>(sw.maxima(side));
    return CornerValue([&, lo, hi](const Window& win, std::size_t c) {
      if ((*lo)[c] == (*hi)[c]) return 1.0;
      return sw.mean(win) / (*lo)[c];
    });
  });
  return {best.value, best.window};
}

namespace {

double harmonic_exponent(const std::vector<double>& p_list) {
  double inv = 0.0;
  for (double pi : p_list) {
    if (!(pi > 0.0) || !std::isfinite(pi)) throw ConfigError("exponents p_i must be finite and positive");
    inv += 1.0 / pi;
  }
  return 1.0 / inv;
}

}  // namespace

WeightReport multi_ap_characteristic(const std::vector<SampledField>& w,
                                     const std::vector<double>& p_list, double p0,
                                     const WindowFamily& W) {
  if (w.empty() || w.size() != p_list.size()) {
    throw ConfigError("need one exponent per weight");
  }
  if (!(p0 >= 1.0) || !std::isfinite(p0)) throw ConfigError("p0 must be a finite real >= 1");
  for (double pi : p_list) {
    if (!(pi >= p0)) throw ConfigError("multiple A_p condition requires p_i >= p0");
  }
  const Grid& g = w.front().grid();
  const double r = harmonic_exponent(p_list) / p0;
  std::vector<std::vector<double>> v;
  for (const auto& wi : w) {
    if (!(wi.grid() == g)) throw ConfigError("weights live on different grids");
    v.push_back(normalized(positive_samples(wi)));
  }
  const std::size_t m = w.size();
  std::vector<double> nu(g.size(), 1.0);
  std::vector<WindowStats> slot_stats;  // w_i^(1 - r_i'), or w_i itself for A_1 slots
  std::vector<double> slot_exp(m);      // 1 / r_i', zero marks an A_1 slot
  for (std::size_t i = 0; i < m; ++i) {
    const double ri = p_list[i] / p0;
    for (std::size_t x = 0; x < nu.size(); ++x) nu[x] *= std::pow(v[i][x], r / ri);
    if (ri == 1.0) {
      slot_exp[i] = 0.0;
      slot_stats.emplace_back(g, v[i], W.wrap);
    } else {
      const double dual = ri / (ri - 1.0);
      slot_exp[i] = 1.0 / dual;
      std::vector<double> s(g.size());
      for (std::size_t x = 0; x < s.size(); ++x) s[x] = std::pow(v[i][x], 1.0 - dual);
      slot_stats.emplace_back(g, std::move(s), W.wrap);
    }
  }
  const WindowStats nu_stats(g, nu, W.wrap);
  std::vector<WindowStats> raw;
  for (std::size_t i = 0; i < m; ++i) raw.emplace_back(g, v[i], W.wrap);
  const auto best = best_window_per_side(g, W, [&](int side) {
    auto lo = std::make_shared<std::vector<std::vector<double>>>();
    auto hi = std::make_shared<std::vector<std::vector<double>>>();
    for (std::size_t i = 0; i < m; ++i) {
      lo->push_back(raw[i].minima(side));
      hi->push_back(raw[i].maxima(side));
    }
    return CornerValue([&, lo, hi, m](const Window& win, std::size_t c) {
      bool constant = true;
      for (std::size_t i = 0; i < m; ++i) constant = constant && (*lo)[i][c] == (*hi)[i][c];
      if (constant) return 1.0;
      double value = std::pow(nu_stats.mean(win), 1.0 / r);
      for (std::size_t i = 0; i < m; ++i) {
        value *= slot_exp[i] == 0.0 ? 1.0 / (*lo)[i][c]
                                    : std::pow(slot_stats[i].mean(win), slot_exp[i]);
      }
      return value;
    });
  });
  return {best.value, best.window};
}

SampledField nu_weight(const std::vector<SampledField>& w, const std::vector<double>& p_list) {
  if (w.empty() || w.size() != p_list.size()) throw ConfigError("need one exponent per weight");
  const double p = harmonic_exponent(p_list);
  const Grid& g = w.front().grid();
  std::vector<double> nu(g.size(), 1.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i].grid() == g)) throw ConfigError("weights live on different grids");
    const auto v = w[i].real_parts();
    const double e = p / p_list[i];
    for (std::size_t x = 0; x < nu.size(); ++x) nu[x] *= e == 1.0 ? v[x] : std::pow(v[x], e);
  }
  return SampledField::from_real(g, std::move(nu), FieldKind::nonnegative_real);
}

double bmo_norm(const SampledField& b, const WindowFamily& W) {
  if (!b.is_real()) throw ConfigError("BMO norm needs a real function");
  const Grid& g = b.grid();
  const auto v = b.real_parts();
  const WindowStats stats(g, v, W.wrap);
  const auto best = best_window(g, W, [&](const Window& w) {
    if (w.side == 1) return 0.0;
    const double mean = stats.mean(w);
    const auto cells = window_cells(g, w);
    double dev = 0.0;
    for (auto i : cells) dev += std::abs(v[i] - mean);
    return dev / static_cast<double>(cells.size());
  });
  return best.value;
}

JohnNirenbergProfile john_nirenberg_profile(const SampledField& b, const WindowFamily& W,
                                            const std::vector<double>& lambdas) {
  JohnNirenbergProfile out;
  out.lambdas = lambdas;
  out.fractions.assign(lambdas.size(), 0.0);
  out.bmo = bmo_norm(b, W);
  if (out.bmo == 0.0) {
    out.degenerate = true;
    return out;
  }
  const Grid& g = b.grid();
  const auto v = b.real_parts();
  const WindowStats stats(g, v, W.wrap);
  const auto sides = W.sides(g.points_per_axis());
  std::vector<std::vector<double>> per_side(sides.size());
  parallel_for(sides.size(), [&](std::size_t si) {
    const int side = sides[si];
    const int corners = stats.corners_per_axis(side);
    const std::size_t count = g.dim() == 1 ? static_cast<std::size_t>(corners)
                                           : static_cast<std::size_t>(corners) * corners;
    std::vector<double> best(lambdas.size(), 0.0);
    std::vector<double> dev;
    for (std::size_t c = 0; c < count; ++c) {
      Window w{{g.dim() == 1 ? static_cast<int>(c) : static_cast<int>(c / corners),
                g.dim() == 1 ? 0 : static_cast<int>(c % corners)},
               side};
      const double mean = stats.mean(w);
      const auto cells = window_cells(g, w);
      dev.clear();
      for (auto i : cells) dev.push_back(std::abs(v[i] - mean));
      std::sort(dev.begin(), dev.end());
      for (std::size_t l = 0; l < lambdas.size(); ++l) {
        const auto above = dev.end() - std::upper_bound(dev.begin(), dev.end(), lambdas[l]);
        best[l] = std::max(best[l], static_cast<double>(above) / static_cast<double>(dev.size()));
      }
    }
    per_side[si] = std::move(best);
  });
  for (const auto& s : per_side) {
    for (std::size_t l = 0; l < lambdas.size(); ++l) out.fractions[l] = std::max(out.fractions[l], s[l]);
  }
  // Least squares of log(fraction) against lambda over the fit range.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t l = 0; l < lambdas.size(); ++l) {
    const double f = out.fractions[l];
    if (f < 1e-6 || f > 0.5) continue;
    const double y = std::log(f);
    sx += lambdas[l];
    sy += y;
    sxx += lambdas[l] * lambdas[l];
    sxy += lambdas[l] * y;
    ++out.fit_points;
  }
  const double n = out.fit_points;
  const double det = n * sxx - sx * sx;
  if (out.fit_points < 2 || det <= 0.0) {
    out.degenerate = true;
    return out;
  }
  const double slope = (n * sxy - sx * sy) / det;
  out.rate = -slope;
  out.intercept = (sy - slope * sx) / n;
  return out;
}

OpennessScan openness_scan(const std::vector<SampledField>& w, const std::vector<double>& p_list,
                           double p0, const WindowFamily& W, int steps, double cap) {
  if (steps < 1) throw ConfigError("openness scan needs at least one step");
  const double top = *std::min_element(p_list.begin(), p_list.end());
  if (!(top >= p0)) throw ConfigError("openness scan requires p_i >= p0");
  OpennessScan out;
  out.q_max = p0;
  for (int k = 0; k <= steps; ++k) {
    const double q = k == steps ? top : p0 + (top - p0) * k / steps;
    const double c = multi_ap_characteristic(w, p_list, q, W).characteristic;
    out.q_values.push_back(q);
    out.characteristics.push_back(c);
    if (std::isfinite(c) && c < cap) out.q_max = q;
  }
  return out;
}

}  // namespace mslab
