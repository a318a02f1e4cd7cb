// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mslab/grid.hpp"
#include "mslab/maximal.hpp"

namespace mslab {

// dist_torus(x, center)^a. Distances below half a cell spacing are raised to
// half a cell spacing, so the pole cell takes the value at that offset.
// Values are clamped below by 1e-300. Requires |a| < 10 dim.
SampledField power_weight(double a, const Point& center, const Grid& g);

// Weight from a textual spec: "unit", "constant:c=4", "power:a=-0.5" with
// optional center coordinates x0, x1 (default: box center).
SampledField weight_from_spec(const std::string& spec, const Grid& g);

// Real function for commutators: "zero", "constant:c=2", "log" (log of the
// regularized torus distance to x0, default box center), "cos:k=1"
// (cos(2 pi k x_0 / L)).
SampledField bmo_function_from_spec(const std::string& spec, const Grid& g);

struct WeightReport {
  double characteristic = 1.0;
  Window argmax_window;
};

// max over windows of (mean w)(mean w^(1-p'))^(p-1), p > 1. Weights are
// rescaled by their maximum first and windows on which w is constant
// contribute exactly 1.
WeightReport ap_characteristic(const SampledField& w, double p, const WindowFamily& W);
// max over windows of (mean w) / (inf w).
WeightReport a1_characteristic(const SampledField& w, const WindowFamily& W);

// Joint condition for exponents P/p0: with r_i = p_i / p0 and r = p / p0,
// max over windows of (mean prod_i w_i^(r / r_i))^(1/r)
// prod_i (mean w_i^(1 - r_i'))^(1 / r_i'); slots with r_i = 1 use
// (inf w_i)^-1. Requires p_i >= p0.
WeightReport multi_ap_characteristic(const std::vector<SampledField>& w,
                                     const std::vector<double>& p_list, double p0,
                                     const WindowFamily& W);

// prod_i w_i^(p / p_i) with 1/p = sum 1/p_i.
SampledField nu_weight(const std::vector<SampledField>& w, const std::vector<double>& p_list);

// max over windows of mean |b - mean b|.
double bmo_norm(const SampledField& b, const WindowFamily& W);

struct JohnNirenbergProfile {
  std::vector<double> lambdas;
  std::vector<double> fractions;  // max over windows of |{|b - b_Q| > lambda}| / |Q|
  double bmo = 0.0;
  double rate = 0.0;       // -d log(fraction) / d lambda from the fit
  double intercept = 0.0;  // fitted log(fraction) at lambda = 0
  int fit_points = 0;      // levels with fraction in [1e-6, 0.5]
  bool degenerate = false; // bmo norm zero or fewer than two fit points
};

JohnNirenbergProfile john_nirenberg_profile(const SampledField& b, const WindowFamily& W,
                                            const std::vector<double>& lambdas);

struct OpennessScan {
  std::vector<double> q_values;
  std::vector<double> characteristics;
  double q_max = 0.0;  // largest scanned q with characteristic below the cap
};

// q -> multi_ap_characteristic(w, P, q) on `steps` + 1 evenly spaced q in
// [p0, min p_i]; a characteristic is counted finite below `cap`.
OpennessScan openness_scan(const std::vector<SampledField>& w, const std::vector<double>& p_list,
                           double p0, const WindowFamily& W, int steps = 16, double cap = 1e12);

}  // namespace mslab
