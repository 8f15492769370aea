#pragma once

#include <functional>
#include <string>
#include <vector>

#include "varik/geometry.hpp"
#include "varik/sample.hpp"

namespace varik {

/// First-order structure: a positively 1-homogeneous density F over an
/// induced chart (x^1..x^n, y^1..y^n) with bound constants. Homogeneity is
/// checked, not assumed.
class FinslerStructure {
public:
    FinslerStructure(int n, LagrangianExpr F, std::vector<double> env = {},
                     SampleSpec admissible = {});

    int n() const { return n_; }
    const LagrangianExpr& F() const { return F_; }
    const std::vector<double>& env() const { return env_; }
    const SampleSpec& admissible_samples() const { return admissible_; }
    void set_admissible_samples(SampleSpec s) { admissible_ = std::move(s); }

    /// F evaluated on chart jets (x then y), constants appended internally.
    Jet<double> eval(std::span<const Jet<double>> chart_jets) const;
    double eval_point(std::span<const double> chart_point) const;

    /// dF/d(chart coordinate) along the jet path.
    Jet<double> partial(std::span<const Jet<double>> chart_jets, int chart_index) const;

    /// Directional second partial sum_j d2F/(d chart_i d chart_j) w_j.
    Jet<double> second_partial_dir(std::span<const Jet<double>> chart_jets, int chart_i,
                                   std::span<const double> w) const;

    /// Full gradient in all 2n chart coordinates at a plain point.
    std::vector<double> gradient(std::span<const double> chart_point) const;

private:
    std::vector<Jet<double>> with_env(std::span<const Jet<double>> chart_jets) const;

    int n_;
    LagrangianExpr F_;
    std::vector<double> env_;
    SampleSpec admissible_;
};

struct HomogeneityReport {
    double max_rel_residual_scaling = 0.0;
    double max_rel_residual_euler = 0.0;
};

/// Positive scaling law F(x, lambda y) = lambda F(x, y) plus the Euler
/// relation, both as max relative residuals over admissible samples.
/// `absolute` additionally checks F(x, lambda y) = |lambda| F for lambda < 0.
HomogeneityReport check_homogeneity(const FinslerStructure& s, const SampleSpec& spec,
                                    std::span<const double> lambdas, bool absolute = false);

/// Hilbert form (dF/dy^mu) dx^mu on the 2n chart (x axes then y axes).
DifferentialForm<double> hilbert_form(const FinslerStructure& s);

struct LengthResult {
    double value = 0.0;     // integral of F along the tangent lift
    double via_form = 0.0;  // the Hilbert-form route
    int levels = 0;
};

/// Finsler length of an arc segment; evaluates both the density route and
/// the Hilbert-form route and insists they agree within 2x the quadrature
/// tolerance.
LengthResult finsler_length(const FinslerStructure& s, const Curve& c, const QuadratureSpec& q);

/// Euler-Lagrange residual R_mu(t) pulled back along the tangent lift.
std::vector<double> el_residual(const FinslerStructure& s, const Curve& c, double t);

/// Per-component EL 1-form on the 2n chart (the mu-th equation).
DifferentialForm<double> el_component_form(const FinslerStructure& s, int mu);

/// Global EL 2-form dx^mu ^ EL_mu.
DifferentialForm<double> el_form(const FinslerStructure& s);

struct NoetherSpec {
    std::vector<LagrangianExpr> generator;  // u^mu over the base names
};

struct NoetherCurrent {
    /// f(x, y) = dF/dy^rho * u^rho(x)
    std::function<double(std::span<const double>)> value;
    /// max |L_Y Hilbert-form| coefficient over admissible samples
    std::function<double(const SampleSpec&)> symmetry_test;
};

NoetherCurrent noether_current(const FinslerStructure& s, const NoetherSpec& u);

/// Conventional-Lagrangian lift: F(x, y) = L(x^0, x^i, y^i/y^0) y^0 on the
/// (n+1)-dimensional chart. L is over (t, q^1.., qdot^1..) plus constants.
FinslerStructure lift_conventional(const LagrangianExpr& L, int n_config,
                                   std::vector<double> env = {});

/// Cartan-form restriction to the (t, q^i, qdot^i) chart via y^0 = 1.
DifferentialForm<double> cartan_restrict(const FinslerStructure& s);

/// Transforms samples by a diffeo x -> phi(x), transports velocities with the
/// Jacobian, and compares the Hilbert-form pullback densities along a shared
/// curve expressed in both charts. Returns the max discrepancy.
double chart_transition_test(const FinslerStructure& s, const std::vector<LagrangianExpr>& phi,
                             const Curve& c, int time_samples);

/// First variation of the length functional under x -> x + s xi(x), computed
/// by exact s-differentiation of the deformed action (independent of the EL
/// machinery).
double first_variation(const FinslerStructure& s, const Curve& c,
                       const std::vector<LagrangianExpr>& xi, const QuadratureSpec& q);

}  // namespace varik
