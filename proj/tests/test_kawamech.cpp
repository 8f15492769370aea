#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "varik/kawamech.hpp"

using namespace varik;

namespace {

std::vector<std::string> chart_names(int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back("x" + std::to_string(i));
    for (int i = 0; i < n; ++i) v.push_back("y" + std::to_string(i));
    for (int i = 0; i < n; ++i) v.push_back("z" + std::to_string(i));
    return v;
}

// the lifted (1/2) qddot^2 structure on the (x0, x1) chart
KawaMechStructure qddot_structure() {
    auto L = LagrangianExpr::parse("(1/2)*qddot1^2", {"t", "q1", "qdot1", "qddot1"});
    return lift2_conventional(L, 1);
}

SampleSpec t2m_box(int n, unsigned seed, int count = 40) {
    SampleSpec s;
    s.seed = seed;
    s.count = count;
    s.box.assign(3 * n, {-2.0, 2.0});
    s.exclusion_name = "y0_nonzero";
    s.exclusion = away_from_zero({n});
    return s;
}

}  // namespace

TEST_CASE("second-order lift of a curve") {
    auto c = make_expr_curve({"t", "t^2"}, {0.0, 2.0});
    auto p = lift2_point(c, 1.0);
    CHECK(p == std::vector<double>{1.0, 1.0, 1.0, 2.0, 0.0, 2.0});

    auto constant = make_expr_curve({"3 + 0*t", "1 + 0*t"}, {0.0, 1.0});
    auto pc = lift2_point(constant, 0.5);
    CHECK(pc == std::vector<double>{3.0, 1.0, 0.0, 0.0, 0.0, 0.0});
}

TEST_CASE("second-order lift transforms by the reparameterization law") {
    auto sigma = make_expr_curve({"sin(t)", "t^3 - t"}, {0.2, 1.5});
    // phi(s) = s^2 on s in [sqrt(0.2), sqrt(1.5)], rho = sigma o phi
    auto rho = make_expr_curve({"sin(t^2)", "t^6 - t^2"}, {std::sqrt(0.2), std::sqrt(1.5)});
    for (double s : {0.5, 0.8, 1.1}) {
        double phi = s * s, dphi = 2.0 * s, ddphi = 2.0;
        auto lr = lift2_point(rho, s);
        auto ls = lift2_point(sigma, phi);
        for (int i = 0; i < 2; ++i) {
            CHECK(lr[2 + i] == doctest::Approx(dphi * ls[2 + i]).epsilon(1e-10));
            CHECK(lr[4 + i] ==
                  doctest::Approx(dphi * dphi * ls[4 + i] + ddphi * ls[2 + i]).epsilon(1e-10));
        }
    }
}

TEST_CASE("Zermelo conditions") {
    double lambdas[] = {0.5, 2.0, M_PI};
    double rhos[] = {-1.0, 0.0, 3.0};

    auto lifted = qddot_structure();
    auto spec = lifted.admissible_samples();
    spec.count = 60;
    auto rep = check_zermelo(lifted, spec, lambdas, rhos);
    CHECK(rep.res_scaling <= 1e-10);
    CHECK(rep.res_A <= 1e-10);
    CHECK(rep.res_B <= 1e-10);

    // z-independent K reduces to the first-order Euler relation; res_B = 0
    auto zfree = KawaMechStructure(
        2, LagrangianExpr::parse("sqrt(y0^2 + y1^2) + 0*z0 + 0*z1", chart_names(2)));
    SampleSpec zspec;
    zspec.seed = 3;
    zspec.count = 40;
    zspec.box.assign(6, {-2.0, 2.0});
    zspec.exclusion_name = "velocity_nonzero";
    zspec.exclusion = [](const std::vector<double>& p) {
        return p[2] * p[2] + p[3] * p[3] > 1e-2;
    };
    auto zrep = check_zermelo(zfree, zspec, lambdas, rhos);
    CHECK(zrep.res_B == 0.0);
    CHECK(zrep.res_A <= 1e-12);
    CHECK(zrep.res_scaling <= 1e-12);

    // K = sum z^2 violates the transversality condition
    auto broken =
        KawaMechStructure(1, LagrangianExpr::parse("z0^2 + 0*y0 + 0*x0", chart_names(1)));
    SampleSpec bspec;
    bspec.seed = 5;
    bspec.count = 40;
    bspec.box.assign(3, {0.5, 2.0});
    auto brep = check_zermelo(broken, bspec, lambdas, rhos);
    CHECK(brep.res_B > 0.1);
}

TEST_CASE("Zermelo derived identities hold for the lifted structure") {
    auto lifted = qddot_structure();
    auto spec = lifted.admissible_samples();
    spec.count = 30;
    CHECK(zermelo_derived_residual(lifted, spec) <= 1e-9);
}

TEST_CASE("Kawaguchi form and length") {
    // trivially lifted K = y0: length of (t, ...) over [0,2] is 2
    auto ky0 = KawaMechStructure(
        2, LagrangianExpr::parse("y0 + 0*y1 + 0*z0 + 0*z1 + 0*x0 + 0*x1", chart_names(2)));
    auto c = make_expr_curve({"t", "sin(t)"}, {0.0, 2.0});
    QuadratureSpec q;
    auto len = fk_length(ky0, c, q);
    CHECK(len.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(len.via_form == doctest::Approx(2.0).epsilon(1e-12));

    // K from (1/2) qddot^2 along (t, t^3): integral of (1/2)(6t)^2 = 6
    auto lifted = qddot_structure();
    auto cubic = make_expr_curve({"t", "t^3"}, {0.0, 1.0});
    CHECK(fk_length(lifted, cubic, q).value == doctest::Approx(6.0).epsilon(1e-10));

    // invariance under t = s^2 between [1, sqrt(3)] and [1, 3]
    auto direct = make_expr_curve({"t", "t^3"}, {1.0, 3.0});
    auto repar = make_expr_curve({"t^2", "t^6"}, {1.0, std::sqrt(3.0)});
    double a = fk_length(lifted, direct, q).value;
    double b = fk_length(lifted, repar, q).value;
    CHECK(std::abs(a - b) <= 1e-8 * std::abs(a));
}

TEST_CASE("z-independent K has fk_form equal to its Hilbert-style form") {
    auto zfree = KawaMechStructure(
        1, LagrangianExpr::parse("y0 + x0*y0 + 0*z0", chart_names(1)));
    auto form = fk_form(zfree);
    std::vector<double> pt = {0.4, 1.2, -0.7};
    auto vals = form.coefficients_at(std::span<const double>(pt));
    CHECK(vals.at({0}) == doctest::Approx(1.0 + 0.4));
    auto it = vals.find({1});
    if (it != vals.end()) CHECK(it->second == doctest::Approx(0.0));
}

TEST_CASE("fk_form coefficients match finite differences for the lifted density") {
    auto lifted = qddot_structure();
    auto form = fk_form(lifted);
    std::vector<double> p = {0.1, -0.4, 1.3, 0.8, 0.2, -0.6};  // (x0,x1,y0,y1,z0,z1)
    auto vals = form.coefficients_at(std::span<const double>(p));
    const double h = 1e-6;
    for (int mu = 0; mu < 2; ++mu) {
        auto up = p, dn = p;
        up[static_cast<std::size_t>(2 + mu)] += h;
        dn[static_cast<std::size_t>(2 + mu)] -= h;
        double dKdy = (lifted.eval_point(up) - lifted.eval_point(dn)) / (2 * h);
        CHECK(vals.at({mu}) == doctest::Approx(dKdy).epsilon(1e-7));
        up = p;
        dn = p;
        up[static_cast<std::size_t>(4 + mu)] += h;
        dn[static_cast<std::size_t>(4 + mu)] -= h;
        double dKdz = (lifted.eval_point(up) - lifted.eval_point(dn)) / (2 * h);
        CHECK(vals.at({2 + mu}) == doctest::Approx(2.0 * dKdz).epsilon(1e-7));
    }
}

TEST_CASE("second-order EL residual") {
    auto lifted = qddot_structure();

    // cubics solve the (1/2) qddot^2 problem
    auto cubic = make_expr_curve({"t", "1 + t + t^3"}, {0.0, 2.0});
    for (double t : {0.3, 0.9, 1.7}) {
        for (double v : el2_residual(lifted, cubic, t)) CHECK(std::abs(v) <= 1e-7);
    }

    // q = sin t has residual q'''' = sin t in the q-component
    auto sine = make_expr_curve({"t", "sin(t)"}, {0.0, 3.0});
    auto r = el2_residual(lifted, sine, M_PI / 2.0);
    CHECK(std::abs(r[1]) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(std::abs(r[1]) > 0.5);

    // contraction identity sum R_mu xdot^mu = 0 on a generic curve
    auto wavy = make_expr_curve({"t + 0.1*t^2", "cos(2*t) + t^3/3"}, {0.2, 1.4});
    for (double t : {0.4, 0.9, 1.3}) {
        auto res = el2_residual(lifted, wavy, t);
        auto jets = wavy.components(t, 1);
        double contraction = 0.0;
        for (int mu = 0; mu < 2; ++mu) contraction += res[mu] * jets[mu].coeff(1);
        CHECK(std::abs(contraction) <= 1e-8 * (1.0 + std::abs(res[1])));
    }
}

TEST_CASE("gauge pullback reproduces the classical second-order EL expression") {
    // L = (1/2) qddot^2 - (1/2) qdot^2 + q: EL = q'''' + qddot + 1
    auto L = LagrangianExpr::parse("(1/2)*qddot1^2 - (1/2)*qdot1^2 + q1",
                                   {"t", "q1", "qdot1", "qddot1"});
    auto lifted = lift2_conventional(L, 1);
    auto curve = make_expr_curve({"t", "sin(2*t) + t^2/4"}, {0.1, 1.2});
    for (double t : {0.3, 0.7, 1.1}) {
        auto r = el2_residual(lifted, curve, t);
        // q(t) = sin(2t) + t^2/4
        double q4 = 16.0 * std::sin(2.0 * t);
        double qdd = -4.0 * std::sin(2.0 * t) + 0.5;
        double classical = q4 + qdd + 1.0;
        CHECK(r[1] == doctest::Approx(classical).epsilon(1e-7));
    }
}

TEST_CASE("second-order Noether current") {
    auto lifted = qddot_structure();
    std::vector<std::string> base = {"x0", "x1"};
    std::vector<LagrangianExpr> u = {LagrangianExpr::parse("0", base),
                                     LagrangianExpr::parse("1", base)};
    auto cur = noether2_current(lifted, u);

    // along a cubic the current is -qddot' = -6 a3 (constant)
    auto cubic = make_expr_curve({"t", "2 + t - 0.5*t^3"}, {0.0, 2.0});
    double f0 = cur.along(cubic, 0.2);
    CHECK(f0 == doctest::Approx(3.0).epsilon(1e-9));  // -6*(-0.5)
    for (double t : {0.5, 1.0, 1.7}) CHECK(cur.along(cubic, t) == doctest::Approx(f0).epsilon(1e-9));

    std::vector<LagrangianExpr> zero = {LagrangianExpr::parse("0", base),
                                        LagrangianExpr::parse("0", base)};
    CHECK(noether2_current(lifted, zero).along(cubic, 0.7) == 0.0);
}

TEST_CASE("conservation holds for any parameterization of the extremal") {
    auto lifted = qddot_structure();
    std::vector<std::string> base = {"x0", "x1"};
    std::vector<LagrangianExpr> u = {LagrangianExpr::parse("0", base),
                                     LagrangianExpr::parse("1", base)};
    auto cur = noether2_current(lifted, u);

    // the same cubic extremal, reparameterized by t = s^2 (monotone on [1, 2])
    auto repar = make_expr_curve({"t^2", "2 + t^2 - 0.5*t^6"}, {1.0, std::sqrt(2.0)});
    for (double s : {1.1, 1.25, 1.4}) {
        for (double v : el2_residual(lifted, repar, s)) CHECK(std::abs(v) <= 1e-7);
    }
    double f0 = cur.along(repar, 1.05);
    for (double s : {1.15, 1.3, 1.38})
        CHECK(cur.along(repar, s) == doctest::Approx(f0).epsilon(1e-8));
}

TEST_CASE("direct substitution lift: L = qddot") {
    auto L = LagrangianExpr::parse("qddot1", {"t", "q1", "qdot1", "qddot1"});
    auto lifted = lift2_conventional(L, 1);
    // K = (z1 y0 - z0 y1)/y0^2
    std::vector<double> pt = {0.0, 0.0, 2.0, 3.0, 0.5, 1.0};  // (x0,x1,y0,y1,z0,z1)
    double want = (1.0 * 2.0 - 0.5 * 3.0) / 4.0;
    CHECK(lifted.eval_point(pt) == doctest::Approx(want).epsilon(1e-14));
}

TEST_CASE("Theta_K restriction") {
    // qddot-independent K reduces to the first-order Cartan form
    auto L1 = LagrangianExpr::parse("(1/2)*qdot1^2 - q1 + 0*qddot1",
                                    {"t", "q1", "qdot1", "qddot1"});
    auto lifted1 = lift2_conventional(L1, 1);
    auto theta1 = theta_k_restrict(lifted1);
    std::vector<double> pt = {0.1, 0.4, 1.3, -0.6};  // (t, q, qdot, qddot)
    auto v1 = theta1.coefficients_at(std::span<const double>(pt));
    double Lval = 0.5 * 1.3 * 1.3 - 0.4;
    CHECK(v1.at({0}) == doctest::Approx(Lval - 1.3 * 1.3));
    CHECK(v1.at({1}) == doctest::Approx(1.3));
    auto it = v1.find({2});
    if (it != v1.end()) CHECK(it->second == doctest::Approx(0.0));

    // L = (1/2) qddot^2: coefficient of dqdot is 2 dL/dqddot = 2 qddot
    auto lifted2 = qddot_structure();
    auto theta2 = theta_k_restrict(lifted2);
    auto v2 = theta2.coefficients_at(std::span<const double>(pt));
    CHECK(v2.at({2}) == doctest::Approx(2.0 * -0.6).epsilon(1e-12));

    // holonomic pullback along (t, q, qdot, qddot) of a curve equals L dt
    auto jcurve = make_expr_curve({"t", "sin(t)", "cos(t)", "-sin(t)"}, {0.1, 1.3});
    for (double t : {0.4, 1.0}) {
        auto jets = jcurve.components(t, 1);
        double dens = theta2.pullback_density(std::span<const Jet<double>>(jets));
        double Lv = 0.5 * std::sin(t) * std::sin(t);  // (1/2) qddot^2
        CHECK(dens == doctest::Approx(Lv).epsilon(1e-10));
    }
}

TEST_CASE("appendix identity: first variation equals the EL pairing") {
    auto lifted = qddot_structure();
    auto curve = make_expr_curve({"t", "cos(t) + 0.2*t^3"}, {0.3, 1.6});
    std::vector<std::string> base = {"x0", "x1"};
    // boundary-vanishing generator with vanishing first derivatives in t at
    // the ends (quadratic factors), nonlinear in x1
    std::vector<LagrangianExpr> xi = {
        LagrangianExpr::parse("0", base),
        LagrangianExpr::parse("((x0 - 0.3)^2)*((1.6 - x0)^2)*(1 + x1/3)", base)};
    QuadratureSpec q;
    double direct = first_variation2(lifted, curve, xi, q);
    std::function<double(std::span<const double>)> pairing = [&](std::span<const double> t) {
        auto r = el2_residual(lifted, curve, t[0]);
        auto x = curve.point(t[0]);
        double acc = 0.0;
        for (int mu = 0; mu < 2; ++mu)
            acc += xi[static_cast<std::size_t>(mu)].evaluate_real(x) *
                   r[static_cast<std::size_t>(mu)];
        return acc;
    };
    std::vector<std::pair<double, double>> rect = {{0.3, 1.6}};
    double via_el = integrate_density<double>(pairing, rect, q).value;
    CHECK(direct == doctest::Approx(via_el).epsilon(1e-6));
}
