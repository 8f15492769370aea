#pragma once

#include "varik/extremal.hpp"
#include "varik/kawafield.hpp"
#include "varik/kawafield2.hpp"
#include "varik/kawamech.hpp"

namespace varik::builtin {

/// F = sqrt(sum y^2) on an n-dimensional chart (x0.., y0..).
FinslerStructure euclidean(int n);

/// F = (m/2)(y1^2 + ... + yn^2)/y0 - V(x) y0; V is an expression over the
/// base names x0..xn.
FinslerStructure newton(int n_spatial, const std::string& V, double m);

/// F = sqrt((y0^2 + y1^2)/(2 g x1)); x0 horizontal, x1 vertical (downward).
FinslerStructure brachistochrone(double g);

/// Lifted conventional oscillator L = (m/2) qdot^2 - (m w^2/2) q^2.
FinslerStructure oscillator(double m, double omega);

/// Lifted conventional second-order density L = (1/2) qddot^2.
KawaMechStructure qddot();

/// De Broglie structure on R^4 (k = 2) with a constant external potential.
CArealStructure debroglie(double m, double e, double phi0);

/// Valid second-order 2-areal structure on R^3 used by the demo problem.
Areal2Structure areal2_demo(double a);

/// Analytic brachistochrone cycloid through the origin: x(theta), y(theta).
double cycloid_x(double theta, double y_pi);
double cycloid_y(double theta, double y_pi);

}  // namespace varik::builtin
