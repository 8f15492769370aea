#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "varik/kawafield2.hpp"
#include "varik/kawamech.hpp"

using namespace varik;

namespace {

ExprPatchT<double> patch2(const std::vector<std::string>& comps,
                          std::vector<std::pair<double, double>> rect) {
    std::vector<LagrangianExpr> parsed;
    for (const auto& c : comps) parsed.push_back(LagrangianExpr::parse(c, {"t1", "t2"}));
    return ExprPatchT<double>(std::move(parsed), std::move(rect), 2);
}

// valid second-order 2-areal structure on R^3:
//   K = (z12_1 y13 - z13_1 y12)/y23^2 + a sqrt(y12^2 + y13^2 + y23^2)
Areal2Structure demo_structure(double a = 0.5) {
    auto names = Areal2Structure::chart_names(3, 2);
    names.push_back("a");
    auto K = LagrangianExpr::parse(
        "(z12_1*y13 - z13_1*y12)/y23^2 + a*sqrt(y12^2 + y13^2 + y23^2)", names);
    SampleSpec adm;
    adm.seed = 6;
    adm.box.assign(Areal2Structure::chart_names(3, 2).size(), {-2.0, 2.0});
    adm.exclusion_name = "y23_nonzero";
    adm.exclusion = away_from_zero({5}, 0.2);  // y23 axis: x1,x2,x3,y12,y13,y23
    return Areal2Structure(3, 2, std::move(K), {a}, adm, 2);
}

}  // namespace

TEST_CASE("chart enumeration and names") {
    // n=3, k=2: 3 x, 3 y blocks, 9 level-1 slots, 3 level-2 slots
    auto names = Areal2Structure::chart_names(3, 2);
    CHECK(names.size() == 3 + 3 + 9 + 3);
    CHECK(names[3] == "y12");
    CHECK(names[6] == "z12_1");
    CHECK(names[14] == "z23_3");
    CHECK(names[15] == "z12_13");
    CHECK(names[17] == "z13_23");

    // k=1 reduces to the mechanics chart
    auto names1 = Areal2Structure::chart_names(2, 1);
    CHECK(names1 == std::vector<std::string>{"x1", "x2", "y1", "y2", "z1", "z2"});
}

TEST_CASE("second-order field lift: linear patches have vanishing z") {
    auto p = patch2({"t1 + 2*t2", "3*t1 + 4*t2", "5*t1 + 6*t2"}, {{0, 1}, {0, 1}});
    auto s = demo_structure();
    std::vector<double> t = {0.3, 0.4};
    auto lift = lift2_field(s, p, t);
    CHECK(lift.size() == 18);
    for (int i = 6; i < 18; ++i) CHECK(lift[static_cast<std::size_t>(i)] == doctest::Approx(0.0));
}

TEST_CASE("second-order field lift matches a finite-difference oracle of the minors") {
    // x1 = t1, x2 = t2 t1, x3 = t1^2 - t2
    auto p = patch2({"t1", "t2*t1", "t1^2 - t2"}, {{0.1, 1}, {0.1, 1}});
    auto s = demo_structure();
    std::vector<double> t = {0.5, 0.7};
    auto lift = lift2_field(s, p, t);

    const double h = 1e-6;
    auto minors_at = [&](double a, double b) {
        std::vector<double> tt = {a, b};
        auto jets = p.components(tt, 1);
        std::vector<double> jac(6);
        for (int mu = 0; mu < 3; ++mu)
            for (int c = 0; c < 2; ++c) jac[static_cast<std::size_t>(mu) * 2 + c] = jets[static_cast<std::size_t>(mu)].coeff(1 + c);
        std::vector<double> out;
        for (const auto& I : multi_index::all_ordered(3, 2))
            out.push_back(minor_determinant<double>(jac, 2, I));
        return out;
    };
    auto xd_at = [&](double a, double b) {
        std::vector<double> tt = {a, b};
        auto jets = p.components(tt, 1);
        std::vector<std::vector<double>> d(3, std::vector<double>(2));
        for (int mu = 0; mu < 3; ++mu)
            for (int c = 0; c < 2; ++c) d[static_cast<std::size_t>(mu)][static_cast<std::size_t>(c)] = jets[static_cast<std::size_t>(mu)].coeff(1 + c);
        return d;
    };
    // dy^B/dt^a central differences
    auto y0 = minors_at(t[0], t[1]);
    std::vector<std::vector<double>> dy(3, std::vector<double>(2));
    for (int a = 0; a < 2; ++a) {
        auto up = minors_at(t[0] + (a == 0 ? h : 0.0), t[1] + (a == 1 ? h : 0.0));
        auto dn = minors_at(t[0] - (a == 0 ? h : 0.0), t[1] - (a == 1 ? h : 0.0));
        for (int b = 0; b < 3; ++b) dy[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = (up[static_cast<std::size_t>(b)] - dn[static_cast<std::size_t>(b)]) / (2 * h);
    }
    auto xd = xd_at(t[0], t[1]);
    // level-1 slots: z^{(B, nu)} = eps^{ab} dy^B/dt^a dx^nu/dt^b
    int idx = 6;
    for (int b = 0; b < 3; ++b) {
        for (int nu = 0; nu < 3; ++nu) {
            double want = dy[static_cast<std::size_t>(b)][0] * xd[static_cast<std::size_t>(nu)][1] -
                          dy[static_cast<std::size_t>(b)][1] * xd[static_cast<std::size_t>(nu)][0];
            CHECK(lift[static_cast<std::size_t>(idx)] == doctest::Approx(want).epsilon(1e-6));
            ++idx;
        }
    }
    // level-2 slots: z^{(B1 B2)} = eps^{ab} dy^B1/dt^a dy^B2/dt^b
    for (int b1 = 0; b1 < 3; ++b1) {
        for (int b2 = b1 + 1; b2 < 3; ++b2) {
            double want = dy[static_cast<std::size_t>(b1)][0] * dy[static_cast<std::size_t>(b2)][1] -
                          dy[static_cast<std::size_t>(b1)][1] * dy[static_cast<std::size_t>(b2)][0];
            CHECK(lift[static_cast<std::size_t>(idx)] == doctest::Approx(want).epsilon(1e-5));
            ++idx;
        }
    }
    (void)y0;
}

TEST_CASE("reparameterization law for the minor components") {
    auto sigma = patch2({"t1", "t2*t1", "t1^2 - t2"}, {{0.2, 1}, {0.2, 1}});
    // phi(s1, s2) = (s1^2, s2 + s1 s2/4): orientation-preserving on the box
    auto rho = patch2({"t1^2", "(t2 + t1*t2/4)*t1^2", "t1^4 - (t2 + t1*t2/4)"},
                      {{0.5, 0.9}, {0.3, 0.8}});
    auto s = demo_structure();
    for (double a : {0.6, 0.8}) {
        for (double b : {0.4, 0.7}) {
            std::vector<double> sp = {a, b};
            double phi1 = a * a, phi2 = b + a * b / 4;
            // T = det d(phi)/d(s)
            double T = (2 * a) * (1 + a / 4) - (b / 4) * 0.0;
            std::vector<double> tp = {phi1, phi2};
            auto lr = lift2_field(s, rho, sp);
            auto ls = lift2_field(s, sigma, tp);
            for (int blk = 0; blk < 3; ++blk)
                CHECK(lr[static_cast<std::size_t>(3 + blk)] ==
                      doctest::Approx(T * ls[static_cast<std::size_t>(3 + blk)]).epsilon(1e-8));
        }
    }
}

TEST_CASE("second-order homogeneity checks") {
    double lambdas[] = {0.5, 2.0, M_PI};

    auto s = demo_structure();
    auto spec = s.admissible_samples();
    spec.count = 40;
    auto rep = check_homogeneity_field2(s, spec, lambdas);
    CHECK(rep.res_scaling <= 1e-10);
    CHECK(rep.res_euler <= 1e-10);
    CHECK(rep.res_transversality <= 1e-10);

    // z-free first-order-homogeneous K passes with trivial z identities
    auto names = Areal2Structure::chart_names(2, 2);
    std::string zeros;
    for (std::size_t i = 3; i < names.size(); ++i) zeros += " + 0*" + names[i];
    Areal2Structure zfree(2, 2, LagrangianExpr::parse("y12" + zeros, names));
    SampleSpec fs;
    fs.seed = 12;
    fs.count = 30;
    fs.box.assign(names.size(), {0.5, 2.0});
    auto frep = check_homogeneity_field2(zfree, fs, lambdas);
    CHECK(frep.res_scaling <= 1e-12);
    CHECK(frep.res_euler <= 1e-12);
    CHECK(frep.res_transversality == 0.0);

    // a z-linear counterexample violates transversality
    Areal2Structure bad(2, 2,
                        LagrangianExpr::parse("z12_1 + 0*y12 + 0*x1 + 0*x2 + 0*z12_2", names));
    auto brep = check_homogeneity_field2(bad, fs, lambdas);
    CHECK(brep.res_transversality > 0.1);
}

TEST_CASE("k = 1 second-order field checks reduce to the Zermelo conditions") {
    // lifted (1/2) qddot^2 structure, renamed to the 1-based field chart
    auto L = LagrangianExpr::parse("(1/2)*qddot1^2", {"t", "q1", "qdot1", "qddot1"});
    auto mech = lift2_conventional(L, 1);
    std::map<std::string, std::string> rename = {{"x0", "x1"}, {"x1", "x2"}, {"y0", "y1"},
                                                 {"y1", "y2"}, {"z0", "z1"}, {"z1", "z2"}};
    auto names1 = Areal2Structure::chart_names(2, 1);
    auto K1 = mech.K().substitute(rename, names1);
    SampleSpec adm;
    adm.seed = 9;
    adm.count = 40;
    adm.box.assign(names1.size(), {-2.0, 2.0});
    adm.exclusion_name = "y1_nonzero";
    adm.exclusion = away_from_zero({2});
    Areal2Structure s1(2, 1, K1, {}, adm, 0);

    double lambdas[] = {0.5, 2.0, M_PI};
    double rhos[] = {-1.0, 0.0, 3.0};
    auto rep1 = check_homogeneity_field2(s1, adm, lambdas);
    auto spec2 = mech.admissible_samples();
    spec2.seed = adm.seed;
    spec2.count = 40;
    auto rep2 = check_zermelo(mech, spec2, lambdas, rhos);
    CHECK(rep1.res_scaling <= 1e-10);
    CHECK(rep1.res_euler <= doctest::Approx(rep2.res_A + 1e-12));
    CHECK(rep1.res_transversality <= 1e-10);
    CHECK(rep2.res_B <= 1e-10);

    // area agreement with the mechanics length for a curve-as-patch
    std::vector<LagrangianExpr> comps = {LagrangianExpr::parse("t1", {"t1"}),
                                         LagrangianExpr::parse("t1^3 + 1", {"t1"})};
    ExprPatchT<double> cp(std::move(comps), {{0.0, 1.0}}, 1);
    auto curve = make_expr_curve({"t", "t^3 + 1"}, {0.0, 1.0});
    QuadratureSpec q;
    auto a2 = kawaguchi2_area(s1, cp, q);
    auto a1 = fk_length(mech, curve, q);
    CHECK(a2.value == doctest::Approx(a1.value).epsilon(1e-10));
    CHECK(a2.via_form == doctest::Approx(a2.value).epsilon(1e-10));
}

TEST_CASE("second-order Kawaguchi form blocks match finite differences") {
    auto s = demo_structure();
    auto form = kawaguchi2_k_form(s);
    SampleSpec sp = s.admissible_samples();
    sp.count = 5;
    for (const auto& p : sample_points(sp)) {
        auto vals = form.coefficients_at(std::span<const double>(p));
        auto grad = s.gradient(p);
        // dx-part: coefficient at a y-block key equals dK/dy^I
        CHECK(vals.at({0, 1}) == doctest::Approx(grad[3]).epsilon(1e-11));
        // level-1 slot (y12, nu=1): stored at sorted key (x1, y12-axis)
        double c = vals.at({0, 3});
        CHECK(c == doctest::Approx(-2.0 * grad[6]).epsilon(1e-11));
        // level-2 slot (y12, y13): key (3, 4), weight 3
        double c2 = vals.at({3, 4});
        CHECK(c2 == doctest::Approx(3.0 * grad[15]).epsilon(1e-11));
    }
}

TEST_CASE("second-order area: volume, identity, and reparameterization") {
    QuadratureSpec q;

    // K = y12 on n=k=2 gives the coordinate volume
    auto names = Areal2Structure::chart_names(2, 2);
    std::string zeros;
    for (std::size_t i = 3; i < names.size(); ++i) zeros += " + 0*" + names[i];
    Areal2Structure vol(2, 2, LagrangianExpr::parse("y12" + zeros, names));
    auto id = patch2({"t1", "t2"}, {{0, 2}, {0, 1.5}});
    auto r = kawaguchi2_area(vol, id, q);
    CHECK(r.value == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(r.via_form == doctest::Approx(3.0).epsilon(1e-12));

    // genuinely second-order structure: area identity and reparam invariance
    auto s = demo_structure();
    auto sigma = patch2({"t1", "t2*t1", "t2 - t1^2"}, {{0.2, 1.0}, {0.2, 1.0}});
    auto direct = kawaguchi2_area(s, sigma, q);
    CHECK(direct.via_form == doctest::Approx(direct.value).epsilon(1e-9));

    // quadratic reparameterization phi(s1,s2) = (s1^2, s2)
    auto rho = patch2({"t1^2", "t2*t1^2", "t2 - t1^4"},
                      {{std::sqrt(0.2), 1.0}, {0.2, 1.0}});
    auto reparam = kawaguchi2_area(s, rho, q);
    CHECK(std::abs(reparam.value - direct.value) <= 1e-7 * std::abs(direct.value));
}

TEST_CASE("the second-order form is chart-dependent under curvilinear transitions") {
    // Transport the structure naively (base Jacobian acting block-wise, as in
    // the first-order tensorial pattern) through xbar = (x1, x2, x3 + x1^2)
    // and compare pullback densities along matched patches: first-order
    // transport closes, the second-order block does not.
    // phi = (x1 + x2^2/2, x2, x3): a curvilinear transition mixing x1, x2
    auto s = demo_structure(0.0);
    auto sigma = patch2({"t1", "t2*t1", "t1^2 - t2"}, {{0.2, 1.0}, {0.2, 1.0}});
    auto sigma_bar =
        patch2({"t1 + (t2*t1)^2/2", "t2*t1", "t1^2 - t2"}, {{0.2, 1.0}, {0.2, 1.0}});

    // K-bar transported with the first-order tensorial pattern only: base
    // substitution, Cauchy-Binet on the minors, and the same block pattern
    // on z, ignoring the inhomogeneous part the true transformation carries.
    auto names = Areal2Structure::chart_names(3, 2);
    names.push_back("a");
    std::map<std::string, std::string> naive = {
        {"x1", "x1 - x2^2/2"},
        {"y13", "y13 - x2*y23"},
        {"z12_1", "z12_1 - x2*z12_2"},
        {"z13_1", "z13_1 - x2*z23_1 - x2*(z13_2 - x2*z23_2)"}};
    auto Kbar = s.K().substitute(naive, names);
    Areal2Structure sbar(3, 2, Kbar, {0.0}, s.admissible_samples(), 2);

    double worst = 0.0;
    for (double a : {0.4, 0.7}) {
        std::vector<double> t = {a, 0.5};
        auto jorig = lift2_field_jets(sigma, t, 1, 3, 2);
        auto jbar = lift2_field_jets(sigma_bar, t, 1, 3, 2);
        auto f = kawaguchi2_k_form(s);
        auto fbar = kawaguchi2_k_form(sbar);
        double d1 = f.pullback_density(std::span<const Jet<double>>(jorig));
        double d2 = fbar.pullback_density(std::span<const Jet<double>>(jbar));
        worst = std::max(worst, std::abs(d1 - d2));
    }
    CHECK(worst > 1e-3);
}
