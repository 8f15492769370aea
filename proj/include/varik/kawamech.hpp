#pragma once

#include "varik/geometry.hpp"
#include "varik/sample.hpp"

namespace varik {

/// Second-order mechanics structure: a density K over the induced chart
/// (x^mu, y^mu, z^mu) of the second-order tangent bundle, subject to the
/// Zermelo conditions (checked, not assumed).
class KawaMechStructure {
public:
    KawaMechStructure(int n, LagrangianExpr K, std::vector<double> env = {},
                      SampleSpec admissible = {});

    int n() const { return n_; }
    const LagrangianExpr& K() const { return K_; }
    const std::vector<double>& env() const { return env_; }
    const SampleSpec& admissible_samples() const { return admissible_; }
    void set_admissible_samples(SampleSpec s) { admissible_ = std::move(s); }

    Jet<double> eval(std::span<const Jet<double>> chart_jets) const;
    double eval_point(std::span<const double> chart_point) const;
    Jet<double> partial(std::span<const Jet<double>> chart_jets, int chart_index) const;
    Jet<double> second_partial_dir(std::span<const Jet<double>> chart_jets, int chart_i,
                                   std::span<const double> w) const;
    std::vector<double> gradient(std::span<const double> chart_point) const;

private:
    std::vector<Jet<double>> with_env(std::span<const Jet<double>> chart_jets) const;

    int n_;
    LagrangianExpr K_;
    std::vector<double> env_;
    SampleSpec admissible_;
};

struct ZermeloReport {
    double res_scaling = 0.0;  // K(x, ly, l^2 z + r y) vs l K
    double res_A = 0.0;        // y dK/dy + 2 z dK/dz = K
    double res_B = 0.0;        // y dK/dz = 0
};

ZermeloReport check_zermelo(const KawaMechStructure& s, const SampleSpec& spec,
                            std::span<const double> lambdas, std::span<const double> rhos);

/// Max residual of the differentiated Zermelo identities (the derived
/// second-order homogeneity family) over the samples.
double zermelo_derived_residual(const KawaMechStructure& s, const SampleSpec& spec);

/// Finsler-Kawaguchi form (dK/dy^mu) dx^mu + 2 (dK/dz^mu) dy^mu on the
/// 3n chart (x, y, z axes in that order).
DifferentialForm<double> fk_form(const KawaMechStructure& s);

struct LengthResult2 {
    double value = 0.0;
    double via_form = 0.0;
    int levels = 0;
};

/// Second-order length of a curve with the Kawaguchi-form route as self-test.
LengthResult2 fk_length(const KawaMechStructure& s, const Curve& c, const QuadratureSpec& q);

/// Second-order Euler-Lagrange residual pulled back along the third lift.
std::vector<double> el2_residual(const KawaMechStructure& s, const Curve& c, double t);

struct Noether2Current {
    /// f evaluated along the third-order lift of a curve at t.
    std::function<double(const Curve&, double)> along;
};

Noether2Current noether2_current(const KawaMechStructure& s,
                                 const std::vector<LagrangianExpr>& u);

/// K(x, y, z) = L(x^0, x^i, y^i/y^0, (z^i y^0 - z^0 y^i)/(y^0)^3) y^0 for a
/// conventional second-order Lagrangian over (t, q^i, qdot^i, qddot^i).
KawaMechStructure lift2_conventional(const LagrangianExpr& L, int n_config,
                                     std::vector<double> env = {});

/// Restriction of the Finsler-Kawaguchi form to the (t, q, qdot, qddot)
/// chart via y^0 = 1, z^0 = 0.
DifferentialForm<double> theta_k_restrict(const KawaMechStructure& s);

/// First variation of the second-order length under x -> x + s xi(x),
/// by exact s-differentiation (independent of the EL machinery).
double first_variation2(const KawaMechStructure& s, const Curve& c,
                        const std::vector<LagrangianExpr>& xi, const QuadratureSpec& q);

}  // namespace varik
