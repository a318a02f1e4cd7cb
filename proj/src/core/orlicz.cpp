// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#include "mslab/orlicz.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "mslab/error.hpp"

namespace mslab {
namespace {

void check_arguments(double t, double alpha) {
  if (!(t >= 0.0)) throw ConfigError("Young functions take nonnegative arguments");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be positive");
}

template <typename F>
double integrate(F f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate(f, a, b, 8, 1e-13);
}

// Both tails below carry a factor e^-w with a polynomially bounded cofactor,
// so the integral past w = 40 is below 1e-17 of the total.
constexpr double kTailCut = 40.0;

constexpr double kOverflowExponent = 700.0;

}  // namespace

double phi(double t, double alpha) {
  check_arguments(t, alpha);
  if (t == 0.0) return 0.0;
  const double lg = t > 1.0 ? std::log(t) : 0.0;
  return std::pow(t * (1.0 + lg), alpha);
}

double phi0(double t, double alpha) {
  check_arguments(t, alpha);
  if (t < 1.0) return std::pow(t, 1.0 + alpha);
  return t * std::pow(1.0 + std::log(t), alpha);
}

double phi1_density(double t, double alpha) {
  check_arguments(t, alpha);
  if (t < 1.0) return std::pow(t, alpha);
  return std::pow(1.0 + std::log(t), alpha);
}

double phi1(double t, double alpha) {
  check_arguments(t, alpha);
  if (t <= 1.0) return std::pow(t, alpha + 1.0) / (alpha + 1.0);
  if (std::isinf(t)) return t;
  // int_1^t (1 + log s)^a ds = e^V int_0^V (1 + V - w)^a e^-w dw, V = log t.
  const double v = std::log(t);
  const double tail = integrate(
      [v, alpha](double w) { return std::pow(1.0 + v - w, alpha) * std::exp(-w); }, 0.0,
      std::min(v, kTailCut));
  return 1.0 / (alpha + 1.0) + t * tail;
}

double phibar1_density(double t, double alpha) {
  check_arguments(t, alpha);
  const double u = std::pow(t, 1.0 / alpha);
  if (t < 1.0) return u;
  if (u > kOverflowExponent) return std::numeric_limits<double>::infinity();
  return std::exp(u - 1.0);
}

double phibar1(double t, double alpha) {
  check_arguments(t, alpha);
  if (t <= 1.0) return std::pow(t, 1.0 + 1.0 / alpha) * alpha / (alpha + 1.0);
  const double u = std::pow(t, 1.0 / alpha);
  if (u > kOverflowExponent) return std::numeric_limits<double>::infinity();
  // s = x^a turns int_1^t e^(s^(1/a) - 1) ds into
  // a e^(U-1) int_0^(U-1) (U - w)^(a-1) e^-w dw with U = t^(1/a).
  const double span = u - 1.0;
  const double tail = integrate(
      [u, alpha](double w) { return std::pow(u - w, alpha - 1.0) * std::exp(-w); }, 0.0,
      std::min(span, kTailCut));
  return alpha / (alpha + 1.0) + alpha * std::exp(span) * tail;
}

double YoungFn::operator()(double t) const {
  switch (kind) {
    case YoungKind::phi: return phi(t, alpha);
    case YoungKind::phi0: return phi0(t, alpha);
    case YoungKind::phi1: return phi1(t, alpha);
    case YoungKind::phibar1: return phibar1(t, alpha);
  }
  return 0.0;
}

std::string young_kind_name(YoungKind kind) {
  switch (kind) {
    case YoungKind::phi: return "phi";
    case YoungKind::phi0: return "phi0";
    case YoungKind::phi1: return "phi1";
    case YoungKind::phibar1: return "phibar1";
  }
  return "?";
}

YoungKind young_kind_from_name(const std::string& name) {
  for (auto k : {YoungKind::phi, YoungKind::phi0, YoungKind::phi1, YoungKind::phibar1}) {
    if (young_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown Young function '" + name + "'");
}

double luxemburg_norm(const std::vector<double>& samples, const YoungFn& Y) {
  double top = 0.0;
  for (double v : samples) {
    if (!std::isfinite(v)) throw ConfigError("Luxemburg norm of non-finite samples");
    top = std::max(top, std::abs(v));
  }
  if (top == 0.0 || samples.empty()) return 0.0;
  const double count = static_cast<double>(samples.size());
  auto objective = [&](double lambda) {
    double sum = 0.0;
    for (double v : samples) {
      if (v == 0.0) continue;
      sum += Y(std::abs(v) / lambda);
      if (std::isinf(sum)) return sum;
    }
    return sum / count;
  };
  double hi = top;
  while (objective(hi) > 1.0) hi *= 2.0;
  double lo = hi;
  while (objective(lo) <= 1.0) {
    lo *= 0.5;
    if (lo < 1e-300) return lo;
  }
  // objective(lo) > 1 >= objective(hi); the objective is decreasing in lambda.
  for (int iter = 0; iter < 200 && hi - lo > 1e-10 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (objective(mid) > 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

YoungCheck young_pair_check(double s, double t, double alpha) {
  YoungCheck out;
  const double a = phi1(s, alpha);
  const double b = phibar1(t, alpha);
  out.slack = a + b - s * t;
  out.violated = out.slack < -1e-12 * std::max(1.0, s * t);
  return out;
}

HolderCheck orlicz_holder_check(const std::vector<double>& f, const std::vector<double>& g,
                                double alpha) {
  if (f.size() != g.size()) throw ConfigError("Hoelder check needs samples over one window");
  HolderCheck out;
  if (f.empty()) return out;
  double num = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) num += std::abs(f[i] * g[i]);
  num /= static_cast<double>(f.size());
  const double nf = luxemburg_norm(f, YoungFn{YoungKind::phi1, alpha});
  const double ng = luxemburg_norm(g, YoungFn{YoungKind::phibar1, alpha});
  if (nf == 0.0 || ng == 0.0) {
    out.consistent = num == 0.0;
    out.ratio = num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return out;
  }
  out.ratio = num / (2.0 * nf * ng);
  return out;
}

}  // namespace mslab
