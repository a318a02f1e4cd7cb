// Copyright 2026 mslab developers
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace mslab {

// Phi(t) = t^a (1 + log+ t)^a.
double phi(double t, double alpha);
// Phi_0(t) = t^(1+a) for t < 1, t (1 + log t)^a for t >= 1.
double phi0(double t, double alpha);
// Density phi_1(t) = t^a for t < 1, (1 + log t)^a for t >= 1.
double phi1_density(double t, double alpha);
// Phi_1(t) = integral of phi_1 over [0, t].
double phi1(double t, double alpha);
// Inverse density: t^(1/a) for t < 1, e^(t^(1/a) - 1) for t >= 1.
double phibar1_density(double t, double alpha);
// Phibar_1(t) = integral of the inverse density over [0, t]; +inf once
// t^(1/a) exceeds 700.
double phibar1(double t, double alpha);

enum class YoungKind { phi, phi0, phi1, phibar1 };

struct YoungFn {
  YoungKind kind = YoungKind::phi;
  double alpha = 1.0;

  double operator()(double t) const;
};

std::string young_kind_name(YoungKind kind);
YoungKind young_kind_from_name(const std::string& name);

// inf { lambda > 0 : mean Y(|f| / lambda) <= 1 } by bisection to relative
// width 1e-10; 0 when every sample vanishes.
double luxemburg_norm(const std::vector<double>& samples, const YoungFn& Y);

struct YoungCheck {
  bool violated = false;
  double slack = 0.0;  // Phi_1(s) + Phibar_1(t) - s t
};

// Young's inequality s t <= Phi_1(s) + Phibar_1(t); violation when the slack
// falls below -1e-12 max(1, s t).
YoungCheck young_pair_check(double s, double t, double alpha);

struct HolderCheck {
  double ratio = 0.0;
  bool consistent = true;  // false when a norm vanishes but the numerator does not
};

// mean |f g| / (2 ||f||_{Phi_1} ||g||_{Phibar_1}) over one window.
HolderCheck orlicz_holder_check(const std::vector<double>& f, const std::vector<double>& g,
                                double alpha);

}  // namespace mslab
