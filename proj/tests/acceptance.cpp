// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned here, not configurable.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numeric>
#include <random>

#include "varik/builtin.hpp"
#include "varik/cli.hpp"
#include "fd_oracle.hpp"

using namespace varik;
using C = std::complex<double>;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
                detail.c_str());
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

ExprPatchT<C> plane_wave(double kappa, double omega,
                         std::vector<std::pair<double, double>> rect) {
    std::vector<std::string> vars = {"t1", "t2", "kappa", "omega"};
    std::vector<LagrangianExpr> comps;
    comps.push_back(LagrangianExpr::parse("t1", vars, ScalarKind::Complex));
    comps.push_back(LagrangianExpr::parse("t2", vars, ScalarKind::Complex));
    comps.push_back(
        LagrangianExpr::parse("exp(i*(kappa*t2 - omega*t1))", vars, ScalarKind::Complex));
    comps.push_back(
        LagrangianExpr::parse("exp(0 - i*(kappa*t2 - omega*t1))", vars, ScalarKind::Complex));
    return ExprPatchT<C>(std::move(comps), std::move(rect), 2, {C(kappa), C(omega)});
}

double theta_for_cycloid_x(double x, double y_pi) {
    double lo = 0.0, hi = M_PI;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (builtin::cycloid_x(mid, y_pi) < x)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// ---- criterion 1 ------------------------------------------------------------

void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    const double lambdas[] = {0.5, 2.0, M_PI};
    const double rhos[] = {-1.0, 0.0, 3.0};
    double worst = 0.0;
    std::string worst_name = "none";
    auto note = [&](const std::string& name, double v) {
        if (v > worst) {
            worst = v;
            worst_name = name;
        }
    };

    {
        auto s = builtin::euclidean(3);
        auto spec = s.admissible_samples();
        spec.count = 200;
        auto rep = check_homogeneity(s, spec, lambdas);
        note("euclidean", std::max(rep.max_rel_residual_scaling, rep.max_rel_residual_euler));
    }
    {
        auto s = builtin::newton(2, "x1^2 + 0.5*x2^2", 1.3);
        auto spec = s.admissible_samples();
        spec.count = 200;
        auto rep = check_homogeneity(s, spec, lambdas);
        note("newton", std::max(rep.max_rel_residual_scaling, rep.max_rel_residual_euler));
    }
    {
        auto s = builtin::brachistochrone(1.0);
        auto spec = s.admissible_samples();
        spec.count = 200;
        auto rep = check_homogeneity(s, spec, lambdas);
        note("brachistochrone", std::max(rep.max_rel_residual_scaling, rep.max_rel_residual_euler));
    }
    {
        auto s = builtin::oscillator(1.0, 1.0);
        auto spec = s.admissible_samples();
        spec.count = 200;
        auto rep = check_homogeneity(s, spec, lambdas);
        note("oscillator", std::max(rep.max_rel_residual_scaling, rep.max_rel_residual_euler));
    }
    {
        auto s = builtin::qddot();
        auto spec = s.admissible_samples();
        spec.count = 200;
        auto rep = check_zermelo(s, spec, lambdas, rhos);
        note("second-order-qddot", std::max({rep.res_scaling, rep.res_A, rep.res_B}));
    }
    {
        auto s = builtin::debroglie(1.0, 0.8, 0.3);
        auto spec = s.admissible_samples();
        spec.count = 200;
        auto rep = check_homogeneity_field(s, spec, lambdas);
        note("debroglie", std::max(rep.max_rel_residual_scaling, rep.max_rel_residual_euler));
    }
    double broken_residual = 0.0;
    {
        std::vector<std::string> names = {"x0", "x1", "y0", "y1"};
        FinslerStructure broken(2, LagrangianExpr::parse("y0^2 + y1^2", names));
        SampleSpec spec;
        spec.seed = 11;
        spec.count = 200;
        spec.box.assign(4, {-2.0, 2.0});
        broken_residual = check_homogeneity(broken, spec, lambdas).max_rel_residual_scaling;
    }
    double elapsed = seconds_since(t0);
    bool pass = worst <= 1e-10 && broken_residual > 1e-2 && elapsed < 5.0;
    report(1, "homogeneity suite over the six built-in structures", pass,
           "max residual " + fmt(worst) + " at " + worst_name + ", broken structure residual " +
               fmt(broken_residual) + ", " + fmt(elapsed) + " s");
}

// ---- criterion 2 ------------------------------------------------------------

void criterion_2() {
    auto t0 = std::chrono::steady_clock::now();
    QuadratureSpec q;
    double worst = 0.0;

    {
        auto s = builtin::euclidean(2);
        auto direct = make_expr_curve({"sin(t)", "t^2"}, {0.2, 1.0});
        auto repar = make_expr_curve(
            {"sin(0.2 + (exp(t) - 1)*(0.8/1.7182818284590452))",
             "(0.2 + (exp(t) - 1)*(0.8/1.7182818284590452))^2"},
            {0.0, 1.0});
        double a = finsler_length(s, direct, q).value;
        double b = finsler_length(s, repar, q).value;
        worst = std::max(worst, std::abs(a - b) / std::abs(a));
    }
    {
        auto s = builtin::qddot();
        auto direct = make_expr_curve({"t", "t^3"}, {1.0, 3.0});
        auto repar = make_expr_curve({"t^2", "t^6"}, {1.0, std::sqrt(3.0)});
        double a = fk_length(s, direct, q).value;
        double b = fk_length(s, repar, q).value;
        worst = std::max(worst, std::abs(a - b) / std::abs(a));
    }
    {
        auto names = ArealStructure::chart_names(2, 2);
        ArealStructure s(2, 2, LagrangianExpr::parse("y12*(1 + x1^2/(4 + x2))", names));
        auto mk = [&](const std::vector<std::string>& comps,
                      std::vector<std::pair<double, double>> rect) {
            std::vector<LagrangianExpr> parsed;
            for (const auto& c : comps) parsed.push_back(LagrangianExpr::parse(c, {"t1", "t2"}));
            return ExprPatchT<double>(std::move(parsed), std::move(rect), 2);
        };
        auto direct = mk({"t1", "t2 + t1*t2"}, {{0.2, 1.0}, {0.0, 1.0}});
        auto repar = mk({"t1^2", "t2 + t1^2*t2"}, {{std::sqrt(0.2), 1.0}, {0.0, 1.0}});
        double a = kawaguchi_area<double>(s, direct, q).value;
        double b = kawaguchi_area<double>(s, repar, q).value;
        worst = std::max(worst, std::abs(a - b) / std::abs(a));
    }
    double elapsed = seconds_since(t0);
    bool pass = worst <= 1e-8 && elapsed < 10.0;
    report(2, "reparameterization invariance of length and area", pass,
           "max relative difference " + fmt(worst) + ", " + fmt(elapsed) + " s");
}

// ---- criterion 3 ------------------------------------------------------------

void criterion_3() {
    auto osc = builtin::newton(1, "x1^2/2", 1.0);
    auto sol = make_expr_curve({"t", "cos(t)"}, {0.0, 2.0 * M_PI});
    double worst_res = 0.0;
    for (int i = 0; i < 100; ++i) {
        double t = 2.0 * M_PI * (i + 0.5) / 100.0;
        for (double v : el_residual(osc, sol, t)) worst_res = std::max(worst_res, std::abs(v));
    }

    auto nwt = builtin::newton(2, "x1^2 + 0.5*x2^2", 1.3);
    SampleSpec spec;
    spec.seed = 33;
    spec.count = 100;
    spec.box = {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}};
    double worst_acc = 0.0;
    for (const auto& p : sample_points(spec)) {
        std::vector<double> x = {p[0], p[1], p[2]};
        std::vector<double> xd = {1.0, p[3], p[4]};
        auto acc = reduced_acceleration(nwt, GaugeSpec{0}, x, xd);
        worst_acc = std::max(worst_acc, std::abs(acc[1] - (-2.0 * p[1] / 1.3)));
        worst_acc = std::max(worst_acc, std::abs(acc[2] - (-1.0 * p[2] / 1.3)));
    }
    bool pass = worst_res <= 1e-8 && worst_acc <= 1e-10;
    report(3, "Newton reproduction", pass,
           "oscillator EL sup " + fmt(worst_res) + ", acceleration error " + fmt(worst_acc));
}

// ---- criterion 4 ------------------------------------------------------------

void criterion_4() {
    auto t0 = std::chrono::steady_clock::now();
    const double y_pi = 2.0, g = 1.0;
    auto brach = builtin::brachistochrone(g);
    const double x0 = 1e-4;
    const double theta0 = theta_for_cycloid_x(x0, y_pi);
    BvpProblem p;
    p.structure = &brach;
    p.gauge = GaugeSpec{0};
    p.start = {x0, builtin::cycloid_y(theta0, y_pi)};
    p.end = {M_PI * y_pi / 2.0, y_pi};
    p.rk4_steps = 20000;
    p.initial_slope = std::vector<double>{std::sin(theta0) / (1.0 - std::cos(theta0))};
    auto sol = solve_bvp(p);

    double sup = 0.0;
    for (int i = 1; i <= 200; ++i) {
        double x = x0 + (p.end[0] - x0) * i / 200.0;
        double theta = theta_for_cycloid_x(x, y_pi);
        sup = std::max(sup, std::abs(sol.curve->point(x)[1] - builtin::cycloid_y(theta, y_pi)));
    }

    // travel time along the solved curve (cusp flattened by a cubic warp)
    QuadratureSpec q;
    auto phi = LagrangianExpr::parse("0.0001 + 3.1414926535897931*s^3", {"s"});
    WarpedCurve warped(sol.curve, phi, {0.0, 1.0});
    double time = finsler_length(brach, warped, q).value;

    // independent trapezoid quadrature along the analytic cycloid, 1e6 nodes
    const int N = 1000000;
    double trap = 0.0;
    for (int i = 0; i <= N; ++i) {
        double theta = theta0 + (M_PI - theta0) * i / N;
        double xdot = 0.5 * y_pi * (1.0 - std::cos(theta));
        double ydot = 0.5 * y_pi * std::sin(theta);
        double y = builtin::cycloid_y(theta, y_pi);
        double f = std::sqrt((xdot * xdot + ydot * ydot) / (2.0 * g * y));
        trap += (i == 0 || i == N) ? 0.5 * f : f;
    }
    trap *= (M_PI - theta0) / N;

    double rel = std::abs(time - trap) / std::abs(trap);
    double elapsed = seconds_since(t0);
    bool pass = sup <= 1e-5 && rel <= 1e-6 && elapsed < 30.0;
    report(4, "brachistochrone reproduction", pass,
           "sup-norm " + fmt(sup) + ", travel-time rel error " + fmt(rel) + ", " + fmt(elapsed) +
               " s");
}

// ---- criterion 5 ------------------------------------------------------------

void criterion_5() {
    const double m = 1.0, e = 0.8, phi = 0.3, kappa = 1.2;
    const double omega0 = kappa * kappa / (2 * m) - e * phi;
    auto db = builtin::debroglie(m, e, phi);
    std::vector<std::pair<double, double>> rect = {{0.0, 1.0}, {0.0, 1.0}};

    auto wave = plane_wave(kappa, omega0, rect);
    double worst = 0.0, worst_base = 0.0;
    for (int i = 0; i < 20; ++i) {
        for (int j = 0; j < 20; ++j) {
            std::vector<double> t = {(i + 0.5) / 20.0, (j + 0.5) / 20.0};
            auto r = el_field_residual<C>(db, wave, t);
            for (int mu = 0; mu < 4; ++mu) {
                worst = std::max(worst, std::abs(r[static_cast<std::size_t>(mu)]));
                if (mu < 2) worst_base = std::max(worst_base, std::abs(r[static_cast<std::size_t>(mu)]));
            }
        }
    }

    auto detuned = plane_wave(kappa, 1.1 * omega0, rect);
    double detuned_residual = 0.0;
    std::vector<double> t = {0.4, 0.6};
    for (const C& v : el_field_residual<C>(db, detuned, t))
        detuned_residual = std::max(detuned_residual, std::abs(v));

    bool pass = worst <= 1e-7 && worst_base <= 1e-9 && detuned_residual > 1e-2;
    report(5, "De Broglie reproduction", pass,
           "plane-wave residual " + fmt(worst) + ", base components " + fmt(worst_base) +
               ", detuned residual " + fmt(detuned_residual));
}

// ---- criterion 6 ------------------------------------------------------------

void criterion_6() {
    double worst_mech = 0.0;
    {
        auto nwt = builtin::newton(2, "x1^2 + 0.3*x2^2", 1.3);
        auto dF = hilbert_form(nwt).exterior_derivative();
        auto EL = el_form(nwt);
        SampleSpec spec = nwt.admissible_samples();
        spec.count = 100;
        auto layout = JetLayout::get(1, 0);
        for (const auto& p : sample_points(spec)) {
            std::vector<Jet<double>> chart;
            for (double v : p) chart.emplace_back(layout, v);
            auto dFv = dF.coefficients_at(std::span<const double>(p));
            auto ELv = EL.coefficients_at(std::span<const double>(p));
            std::map<std::vector<int>, double> corr;
            for (int mu = 0; mu < 3; ++mu)
                for (int nu = 0; nu < 3; ++nu) {
                    if (mu == nu) continue;
                    std::vector<double> dir(6, 0.0);
                    dir[static_cast<std::size_t>(3 + nu)] = 1.0;
                    double mixed = nwt.second_partial_dir(chart, mu, dir).value();
                    std::vector<int> key = {mu, nu};
                    double sign = 1.0;
                    if (key[0] > key[1]) {
                        std::swap(key[0], key[1]);
                        sign = -1.0;
                    }
                    corr[key] += sign * mixed;
                }
            auto get = [](const std::map<std::vector<int>, double>& mm,
                          const std::vector<int>& k) {
                auto it = mm.find(k);
                return it == mm.end() ? 0.0 : it->second;
            };
            for (int a = 0; a < 6; ++a)
                for (int b = a + 1; b < 6; ++b) {
                    std::vector<int> key = {a, b};
                    double lhs = get(dFv, key);
                    double rhs = get(ELv, key) - get(corr, key);
                    worst_mech =
                        std::max(worst_mech, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
                }
        }
    }

    double worst_field = 0.0;
    {
        auto db = builtin::debroglie(1.0, 0.8, 0.3);
        auto dK = kawaguchi_k_form(db).exterior_derivative();
        auto EL = el_field_form(db);
        SampleSpec spec;
        spec.seed = 77;
        spec.count = 100;
        spec.box.assign(10, {-1.2, 1.2});
        spec.exclusion_name = "y12_nonzero";
        spec.exclusion = away_from_zero({4}, 0.3);
        auto layout = JetLayout::get(1, 0);
        for (const auto& raw : sample_points(spec)) {
            std::vector<C> pt(raw.begin(), raw.end());
            std::vector<Jet<C>> chart;
            for (const C& v : pt) chart.emplace_back(layout, v);
            auto dKv = dK.coefficients_at(std::span<const C>(pt));
            auto ELv = EL.coefficients_at(std::span<const C>(pt));
            std::map<std::vector<int>, C> corr;
            for (int mu = 0; mu < 4; ++mu)
                for (int b = 0; b < db.blocks(); ++b) {
                    std::vector<C> w(10, C(0));
                    w[static_cast<std::size_t>(db.block_axis(b))] = C(1);
                    C mixed = db.second_partial_dir(chart, mu, w).value();
                    std::vector<int> key = {mu};
                    key.insert(key.end(), db.block(b).begin(), db.block(b).end());
                    int sign = multi_index::sort_sign(key);
                    if (sign == 0) continue;
                    corr[key] += C(double(sign)) * mixed;
                }
            auto get = [](const std::map<std::vector<int>, C>& mm, const std::vector<int>& k) {
                auto it = mm.find(k);
                return it == mm.end() ? C(0) : it->second;
            };
            std::vector<std::vector<int>> keys;
            for (const auto& [k, v] : dKv) keys.push_back(k);
            for (const auto& [k, v] : ELv)
                if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
            for (const auto& [k, v] : corr)
                if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
            for (const auto& key : keys) {
                C lhs = get(dKv, key);
                C rhs = get(ELv, key) - get(corr, key);
                worst_field = std::max(worst_field, std::abs(lhs - rhs) / (1.0 + std::abs(rhs)));
            }
        }
    }

    // integral identities: form route vs direct density route
    QuadratureSpec q;
    double worst_id = 0.0;
    {
        auto s = builtin::euclidean(2);
        auto c = make_expr_curve({"sin(t)", "t^2"}, {0.2, 1.0});
        auto len = finsler_length(s, c, q);
        worst_id = std::max(worst_id, std::abs(len.value - len.via_form) /
                                          (2.0 * q.refine_rtol * (std::abs(len.value) + 1.0)));
    }
    {
        auto names = ArealStructure::chart_names(2, 2);
        ArealStructure s(2, 2, LagrangianExpr::parse("y12*(1 + x1^2/(4 + x2))", names));
        std::vector<LagrangianExpr> comps = {LagrangianExpr::parse("t1", {"t1", "t2"}),
                                             LagrangianExpr::parse("t2 + t1*t2", {"t1", "t2"})};
        ExprPatchT<double> patch(std::move(comps), {{0.2, 1.0}, {0.0, 1.0}}, 2);
        auto area = kawaguchi_area<double>(s, patch, q);
        worst_id = std::max(worst_id, std::abs(area.value - area.via_form) /
                                          (2.0 * q.refine_rtol * (std::abs(area.value) + 1.0)));
    }
    {
        auto s = builtin::areal2_demo(0.5);
        std::vector<LagrangianExpr> comps = {
            LagrangianExpr::parse("t1", {"t1", "t2"}),
            LagrangianExpr::parse("t2*t1", {"t1", "t2"}),
            LagrangianExpr::parse("t2 - t1^2", {"t1", "t2"})};
        ExprPatchT<double> patch(std::move(comps), {{0.2, 1.0}, {0.2, 1.0}}, 2);
        auto area = kawaguchi2_area(s, patch, q);
        worst_id = std::max(worst_id, std::abs(area.value - area.via_form) /
                                          (2.0 * q.refine_rtol * (std::abs(area.value) + 1.0)));
    }

    bool pass = worst_mech <= 1e-9 && worst_field <= 1e-9 && worst_id <= 1.0;
    report(6, "form identities", pass,
           "dF relation " + fmt(worst_mech) + ", dK relation " + fmt(worst_field) +
               ", integral identities at " + fmt(worst_id) + "x tolerance");
}

// ---- criterion 7 ------------------------------------------------------------

void criterion_7() {
    QuadratureSpec q;
    double worst = 0.0;
    struct Case {
        std::string L;
        std::string curve1;
        std::string xi;
    };
    // three problems: density, curve, and boundary-vanishing generator vary
    std::vector<Case> cases = {
        {"(1/2)*qddot1^2", "cos(t) + 0.2*t^3", "((x0 - 0.3)^2)*((1.6 - x0)^2)*(1 + x1/3)"},
        {"(1/2)*qddot1^2 - (1/2)*qdot1^2 + q1", "sin(2*t) + t^2/4",
         "((x0 - 0.3)^2)*((1.6 - x0)^2)*(2 - x1/2)"},
        {"(1/2)*qddot1^2 + (1/4)*qdot1^2*qddot1", "t^2 - cos(3*t)/9",
         "((x0 - 0.3)^2)*((1.6 - x0)^2)*(x1/2 + x1^2/5)"},
    };
    for (const auto& cs : cases) {
        auto L = LagrangianExpr::parse(cs.L, {"t", "q1", "qdot1", "qddot1"});
        auto lifted = lift2_conventional(L, 1);
        auto curve = make_expr_curve({"t", cs.curve1}, {0.3, 1.6});
        std::vector<std::string> base = {"x0", "x1"};
        std::vector<LagrangianExpr> xi = {LagrangianExpr::parse("0", base),
                                          LagrangianExpr::parse(cs.xi, base)};
        double direct = first_variation2(lifted, curve, xi, q);
        std::function<double(std::span<const double>)> pairing =
            [&](std::span<const double> t) {
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
        worst = std::max(worst, std::abs(direct - via_el) / (1.0 + std::abs(via_el)));
    }
    report(7, "appendix variation identity", worst <= 1e-6, "max deviation " + fmt(worst));
}

// ---- criterion 8 ------------------------------------------------------------

void criterion_8() {
    // Jacobian minors vs the Leibniz permutation sum
    std::mt19937_64 rng(4096);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    double worst_minor = 0.0;
    int jacobians = 0;
    while (jacobians < 500) {
        for (int n = 2; n <= 5 && jacobians < 500; ++n) {
            for (int k = 1; k <= std::min(3, n) && jacobians < 500; ++k) {
                std::vector<double> mat(static_cast<std::size_t>(n) * k);
                for (auto& v : mat) v = u(rng);
                ++jacobians;
                for (const auto& rows : multi_index::all_ordered(n, k)) {
                    double got = minor_determinant<double>(mat, k, rows);
                    // permutation-sum oracle
                    std::vector<int> perm(static_cast<std::size_t>(k));
                    std::iota(perm.begin(), perm.end(), 0);
                    double want = 0.0;
                    do {
                        auto sorted = perm;
                        int sign = multi_index::sort_sign(sorted);
                        double prod = 1.0;
                        for (int r = 0; r < k; ++r)
                            prod *= mat[static_cast<std::size_t>(rows[static_cast<std::size_t>(r)]) *
                                            k +
                                        perm[static_cast<std::size_t>(r)]];
                        want += sign * prod;
                    } while (std::next_permutation(perm.begin(), perm.end()));
                    worst_minor = std::max(worst_minor, std::abs(got - want));
                }
            }
        }
    }

    // AD partials used in the EL residuals vs central finite differences
    double worst_low = 0.0;   // orders 1..2, tolerance 1e-5 relative
    double worst_high = 0.0;  // orders 3..4, tolerance 1e-3 relative
    {
        auto nwt = builtin::newton(1, "x1^2/2", 1.0);
        auto curve = make_expr_curve({"t", "sin(2*t) + t^2/3"}, {0.1, 1.4});
        auto composite = [&](double t) {
            std::vector<double> tt = {t};
            auto chart = tangent_lift_map(curve)(tt, 0);
            return nwt.partial(chart, 2 + 1).value();  // dF/dy1 along the lift
        };
        for (double t : {0.3, 0.7, 1.1}) {
            std::vector<double> tt = {t};
            auto chart = tangent_lift_map(curve)(tt, 2);
            auto jet = nwt.partial(chart, 2 + 1);
            for (int order = 1; order <= 2; ++order) {
                double got = jet.coeff(order) * (order == 2 ? 2.0 : 1.0);
                double want = fd::derivative(composite, t, order);
                worst_low = std::max(worst_low,
                                     std::abs(got - want) / (1.0 + std::abs(want)));
            }
        }
    }
    {
        auto s = builtin::qddot();
        auto curve = make_expr_curve({"t", "sin(2*t) + t^3/5"}, {0.1, 1.4});
        auto kvalue = [&](double t) {
            std::vector<double> tt = {t};
            auto chart = second_lift_map(curve)(tt, 0);
            return s.eval(std::span<const Jet<double>>(chart)).value();
        };
        for (double t : {0.4, 0.9}) {
            std::vector<double> tt = {t};
            auto chart = second_lift_map(curve)(tt, 4);
            auto jet = s.eval(std::span<const Jet<double>>(chart));
            for (int order = 3; order <= 4; ++order) {
                double fact = order == 3 ? 6.0 : 24.0;
                double got = jet.coeff(order) * fact;
                double want = fd::derivative(kvalue, t, order);
                worst_high = std::max(worst_high,
                                      std::abs(got - want) / (1.0 + std::abs(want)));
            }
        }
    }
    bool pass = worst_minor <= 1e-12 && worst_low <= 1e-5 && worst_high <= 1e-3;
    report(8, "oracle equivalence", pass,
           "minor error " + fmt(worst_minor) + ", AD vs FD " + fmt(worst_low) + " / " +
               fmt(worst_high));
}

// ---- criterion 9 ------------------------------------------------------------

void criterion_9() {
    double worst = 0.0;
    std::vector<std::string> base2 = {"x0", "x1"};
    {
        auto s = builtin::newton(1, "0", 1.0);
        BvpProblem p;
        p.structure = &s;
        p.gauge = GaugeSpec{0};
        p.start = {0.0, 0.0};
        p.end = {1.0, 1.0};
        auto sol = solve_bvp(p);
        NoetherSpec u;
        u.generator = {LagrangianExpr::parse("0", base2), LagrangianExpr::parse("1", base2)};
        worst = std::max(worst, conserved_along(sol, noether_current(s, u).value).max_drift);
    }
    {
        auto s = builtin::oscillator(1.0, 1.0);
        BvpProblem p;
        p.structure = &s;
        p.gauge = GaugeSpec{0};
        p.start = {0.0, 0.0};
        p.end = {M_PI / 2.0, 1.0};
        auto sol = solve_bvp(p);
        NoetherSpec u;
        u.generator = {LagrangianExpr::parse("1", base2), LagrangianExpr::parse("0", base2)};
        worst = std::max(worst, conserved_along(sol, noether_current(s, u).value).max_drift);
    }
    {
        auto s = builtin::newton(2, "x2^2", 1.0);
        BvpProblem p;
        p.structure = &s;
        p.gauge = GaugeSpec{0};
        p.start = {0.0, 0.0, 0.5};
        p.end = {1.0, 0.7, 0.1};
        auto sol = solve_bvp(p);
        std::vector<std::string> base3 = {"x0", "x1", "x2"};
        NoetherSpec u;
        u.generator = {LagrangianExpr::parse("0", base3), LagrangianExpr::parse("1", base3),
                       LagrangianExpr::parse("0", base3)};
        worst = std::max(worst, conserved_along(sol, noether_current(s, u).value).max_drift);
    }
    report(9, "Noether conservation along solved extremals", worst <= 1e-7,
           "max drift " + fmt(worst));
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (g_failures == 0) {
        std::printf("acceptance: all criteria passed\n");
        return 0;
    }
    std::printf("acceptance: %d criteria failed\n", g_failures);
    return 1;
}
