#include "varik/builtin.hpp"

#include <cmath>

namespace varik::builtin {

namespace {

std::vector<std::string> tm_names(int n) {
    std::vector<std::string> v;
    for (int i = 0; i < n; ++i) v.push_back("x" + std::to_string(i));
    for (int i = 0; i < n; ++i) v.push_back("y" + std::to_string(i));
    return v;
}

}  // namespace

FinslerStructure euclidean(int n) {
    std::string src = "sqrt(";
    for (int i = 0; i < n; ++i) src += (i ? "+" : "") + ("y" + std::to_string(i)) + "^2";
    src += ")";
    SampleSpec adm;
    adm.seed = 101;
    adm.box.assign(static_cast<std::size_t>(2 * n), {-2.0, 2.0});
    adm.exclusion_name = "velocity_nonzero";
    adm.exclusion = [n](const std::vector<double>& p) {
        double norm = 0.0;
        for (int i = 0; i < n; ++i)
            norm += p[static_cast<std::size_t>(n + i)] * p[static_cast<std::size_t>(n + i)];
        return norm > 1e-2;
    };
    return FinslerStructure(n, LagrangianExpr::parse(src, tm_names(n)), {}, adm);
}

FinslerStructure newton(int n_spatial, const std::string& V, double m) {
    std::string kinetic;
    for (int i = 1; i <= n_spatial; ++i)
        kinetic += (i > 1 ? "+" : "") + ("y" + std::to_string(i)) + "^2";
    std::string src = "(m/2)*(" + kinetic + ")/y0 - (" + V + ")*y0";
    auto names = tm_names(n_spatial + 1);
    names.push_back("m");
    SampleSpec adm;
    adm.seed = 103;
    adm.box.assign(static_cast<std::size_t>(2 * (n_spatial + 1)), {-2.0, 2.0});
    adm.exclusion_name = "y0_nonzero";
    adm.exclusion = away_from_zero({n_spatial + 1});
    return FinslerStructure(n_spatial + 1, LagrangianExpr::parse(src, names), {m}, adm);
}

FinslerStructure brachistochrone(double g) {
    auto names = tm_names(2);
    names.push_back("g");
    SampleSpec adm;
    adm.seed = 107;
    adm.box = {{0.0, 3.2}, {0.05, 2.0}, {-2.0, 2.0}, {-2.0, 2.0}};
    adm.exclusion_name = "velocity_nonzero";
    adm.exclusion = [](const std::vector<double>& p) {
        return p[2] * p[2] + p[3] * p[3] > 1e-2;
    };
    return FinslerStructure(2, LagrangianExpr::parse("sqrt((y0^2 + y1^2)/(2*g*x1))", names), {g},
                            adm);
}

FinslerStructure oscillator(double m, double omega) {
    auto L = LagrangianExpr::parse("(m/2)*qdot1^2 - (m*w^2/2)*q1^2",
                                   {"t", "q1", "qdot1", "m", "w"});
    return lift_conventional(L, 1, {m, omega});
}

KawaMechStructure qddot() {
    auto L = LagrangianExpr::parse("(1/2)*qddot1^2", {"t", "q1", "qdot1", "qddot1"});
    return lift2_conventional(L, 1);
}

CArealStructure debroglie(double m, double e, double phi0) {
    using C = std::complex<double>;
    std::vector<std::string> lvars = {"t",     "xs",     "psi",      "psibar", "psi_t",
                                      "psi_x", "psibar_t", "psibar_x", "m",      "e",
                                      "phi0"};
    auto L = LagrangianExpr::parse(
        "(i/2)*(psibar*psi_t - psibar_t*psi) - (1/(2*m))*psibar_x*psi_x + e*psibar*phi0*psi",
        lvars, ScalarKind::Complex);
    return lift_field_conventional<C>(L, 2, 2, {C(m), C(e), C(phi0)});
}

Areal2Structure areal2_demo(double a) {
    auto names = Areal2Structure::chart_names(3, 2);
    names.push_back("a");
    auto K = LagrangianExpr::parse(
        "(z12_1*y13 - z13_1*y12)/y23^2 + a*sqrt(y12^2 + y13^2 + y23^2)", names);
    SampleSpec adm;
    adm.seed = 109;
    adm.box.assign(Areal2Structure::chart_names(3, 2).size(), {-2.0, 2.0});
    adm.exclusion_name = "y23_nonzero";
    adm.exclusion = away_from_zero({5}, 0.2);
    return Areal2Structure(3, 2, std::move(K), {a}, adm, 2);
}

double cycloid_x(double theta, double y_pi) {
    return 0.5 * y_pi * (theta - std::sin(theta));
}

double cycloid_y(double theta, double y_pi) {
    return 0.5 * y_pi * (1.0 - std::cos(theta));
}

}  // namespace varik::builtin
