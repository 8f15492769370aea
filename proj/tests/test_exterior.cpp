#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "varik/form.hpp"
#include "varik/multi_index.hpp"
#include "varik/sample.hpp"

using namespace varik;

namespace {

// Brute-force determinant by signed permutation sum (Leibniz rule).
double leibniz_minor(const std::vector<double>& matrix, int cols, std::vector<int> rows) {
    const int k = static_cast<int>(rows.size());
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    double det = 0.0;
    do {
        std::vector<int> p = perm;
        int sign = multi_index::sort_sign(p);
        // sort_sign sorts a copy; for a permutation of 0..k-1 the sign is the parity
        double prod = 1.0;
        for (int r = 0; r < k; ++r) prod *= matrix[rows[r] * cols + perm[r]];
        det += sign * prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

FormCoeff<double> const_coeff(double v) {
    return [v](std::span<const Jet<double>> pt) {
        return Jet<double>(pt.empty() ? JetLayout::get(1, 0) : pt[0].layout_ptr(), v);
    };
}

FormCoeff<double> axis_coeff(int axis) {
    return [axis](std::span<const Jet<double>> pt) { return pt[axis]; };
}

PatchMap<double> identity_map(int dim) {
    return [dim](std::span<const double> t, int order) {
        std::vector<Jet<double>> out;
        for (int i = 0; i < dim; ++i) {
            std::vector<double> dir(t.size(), 0.0);
            if (i < static_cast<int>(t.size())) dir[i] = 1.0;
            out.push_back(Jet<double>::variable(static_cast<int>(t.size()), order,
                                                i < static_cast<int>(t.size()) ? t[i] : 0.0, dir));
        }
        return out;
    };
}

}  // namespace

TEST_CASE("multi-index rank and unrank invert each other") {
    for (int n = 1; n <= 7; ++n) {
        for (int k = 0; k <= n; ++k) {
            auto all = multi_index::all_ordered(n, k);
            CHECK(all.size() == multi_index::binomial(n, k));
            for (std::size_t r = 0; r < all.size(); ++r) {
                CHECK(multi_index::lex_rank(all[r], n) == r);
                CHECK(multi_index::lex_unrank(r, n, k) == all[r]);
            }
            CHECK(std::is_sorted(all.begin(), all.end()));
        }
    }
}

TEST_CASE("permutation sign rules") {
    std::vector<int> a = {2, 1};
    CHECK(multi_index::sort_sign(a) == -1);
    CHECK(a == std::vector<int>{1, 2});
    std::vector<int> b = {3, 1, 2};
    CHECK(multi_index::sort_sign(b) == 1);
    std::vector<int> c = {1, 1};
    CHECK(multi_index::sort_sign(c) == 0);
    // exhaustive for n<=5, k<=3: odd permutation flips the sign
    for (int n = 2; n <= 5; ++n)
        for (int k = 2; k <= std::min(3, n); ++k)
            for (const auto& idx : multi_index::all_ordered(n, k)) {
                std::vector<int> swapped = idx;
                std::swap(swapped[0], swapped[1]);
                int s = multi_index::sort_sign(swapped);
                CHECK(s == -1);
                CHECK(swapped == idx);
            }
}

TEST_CASE("minor determinants: k=1 and identity blocks") {
    std::vector<double> jac = {1, 0, 0, 1, 0, 0, 0, 0};  // 4x2, identity on top
    std::vector<int> top = {0, 1}, bottom = {2, 3};
    CHECK(minor_determinant<double>(jac, 2, top) == 1.0);
    CHECK(minor_determinant<double>(jac, 2, bottom) == 0.0);
    std::vector<double> single = {7.5};
    std::vector<int> row0 = {0};
    CHECK(minor_determinant<double>(single, 1, row0) == 7.5);
}

TEST_CASE("minor determinants match the Leibniz permutation oracle") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int n = 2; n <= 5; ++n) {
        for (int k = 1; k <= std::min(3, n); ++k) {
            for (int trial = 0; trial < 40; ++trial) {
                std::vector<double> m(n * k);
                for (auto& v : m) v = u(rng);
                for (const auto& rows : multi_index::all_ordered(n, k)) {
                    double got = minor_determinant<double>(m, k, rows);
                    double want = leibniz_minor(m, k, rows);
                    CHECK(std::abs(got - want) <= 1e-12 * (1.0 + std::abs(want)));
                }
            }
        }
    }
    // k = 4 exercises the LU path
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<double> m(5 * 4);
        for (auto& v : m) v = u(rng);
        for (const auto& rows : multi_index::all_ordered(5, 4)) {
            double got = minor_determinant<double>(m, 4, rows);
            double want = leibniz_minor(m, 4, rows);
            CHECK(std::abs(got - want) <= 1e-12 * (1.0 + std::abs(want)));
        }
    }
}

TEST_CASE("wedge products: basis rules and graded antisymmetry") {
    DifferentialForm<double> dx1(4, 1), dx2(4, 1);
    dx1.add_term({0}, const_coeff(1.0));
    dx2.add_term({1}, const_coeff(1.0));
    auto w = dx1.wedge(dx2);
    std::vector<double> pt = {0.3, -0.7, 0.2, 0.9};
    auto vals = w.coefficients_at(std::span<const double>(pt));
    CHECK(vals.size() == 1);
    CHECK(vals.at({0, 1}) == 1.0);

    auto zero = dx1.wedge(dx1);
    CHECK(zero.coefficients_at(std::span<const double>(pt)).empty());

    // (f dx1) ^ (g dx2) has coefficient f*g at (0,1)
    DifferentialForm<double> f1(4, 1), g2(4, 1);
    f1.add_term({0}, axis_coeff(2));  // f = x3
    g2.add_term({1}, axis_coeff(3));  // g = x4
    auto fg = f1.wedge(g2).coefficients_at(std::span<const double>(pt));
    CHECK(fg.at({0, 1}) == doctest::Approx(0.2 * 0.9));

    // a ^ b = (-1)^{|a||b|} b ^ a on random 1- and 2-forms
    auto ba = g2.wedge(f1).coefficients_at(std::span<const double>(pt));
    CHECK(ba.at({0, 1}) == doctest::Approx(-fg.at({0, 1})));
}

TEST_CASE("wedge associativity at sampled points") {
    SampleSpec spec;
    spec.seed = 3;
    spec.count = 10;
    spec.box = {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}};
    DifferentialForm<double> a(5, 1), b(5, 1), c(5, 1);
    a.add_term({0}, axis_coeff(1));
    a.add_term({2}, axis_coeff(4));
    b.add_term({1}, axis_coeff(0));
    b.add_term({3}, const_coeff(2.0));
    c.add_term({4}, axis_coeff(2));
    auto left = a.wedge(b).wedge(c);
    auto right = a.wedge(b.wedge(c));
    for (const auto& p : sample_points(spec)) {
        auto lv = left.coefficients_at(std::span<const double>(p));
        auto rv = right.coefficients_at(std::span<const double>(p));
        for (const auto& [key, v] : lv) {
            auto it = rv.find(key);
            double other = it == rv.end() ? 0.0 : it->second;
            CHECK(std::abs(v - other) <= 1e-12);
        }
    }
}

TEST_CASE("exterior derivative: d(x1 dx2) = dx1 ^ dx2 and d о d = 0") {
    DifferentialForm<double> form(3, 1);
    form.add_term({1}, axis_coeff(0));  // x1 dx2
    auto d = form.exterior_derivative();
    std::vector<double> pt = {0.4, 1.2, -0.3};
    auto vals = d.coefficients_at(std::span<const double>(pt));
    CHECK(vals.at({0, 1}) == doctest::Approx(1.0));
    for (const auto& [key, v] : vals)
        if (key != std::vector<int>{0, 1}) CHECK(v == 0.0);

    // f = x1*x2 + sin(x3): ddf = 0 at 50 random points
    DifferentialForm<double> f(3, 0);
    f.add_term({}, [](std::span<const Jet<double>> p) { return p[0] * p[1] + sin(p[2]); });
    auto ddf = f.exterior_derivative().exterior_derivative();
    SampleSpec spec;
    spec.seed = 9;
    spec.count = 50;
    spec.box = {{-1, 1}, {-1, 1}, {-1, 1}};
    for (const auto& p : sample_points(spec)) {
        for (const auto& [key, v] : ddf.coefficients_at(std::span<const double>(p)))
            CHECK(std::abs(v) <= 1e-12);
    }
}

TEST_CASE("pullback density: identity, orientation flip, graph map") {
    DifferentialForm<double> dx12(2, 2);
    dx12.add_term({0, 1}, const_coeff(1.0));

    auto id2 = identity_map(2);
    std::vector<double> t = {0.3, 0.8};
    auto jets = id2(t, 1);
    CHECK(dx12.pullback_density(std::span<const Jet<double>>(jets)) == doctest::Approx(1.0));

    // swap map (t,s) -> (s,t) flips the density sign
    PatchMap<double> swap_map = [](std::span<const double> tt, int order) {
        std::vector<double> d0 = {0.0, 1.0}, d1 = {1.0, 0.0};
        std::vector<Jet<double>> out;
        out.push_back(Jet<double>::variable(2, order, tt[1], d0));
        out.push_back(Jet<double>::variable(2, order, tt[0], d1));
        return out;
    };
    auto sjets = swap_map(t, 1);
    CHECK(dx12.pullback_density(std::span<const Jet<double>>(sjets)) == doctest::Approx(-1.0));
}

TEST_CASE("integrate: constant and coordinate densities on rectangles") {
    QuadratureSpec q;
    DifferentialForm<double> dx12(2, 2);
    dx12.add_term({0, 1}, const_coeff(1.0));
    std::vector<std::pair<double, double>> unit = {{0, 1}, {0, 1}};
    auto r = integrate<double>(dx12, identity_map(2), unit, q);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));

    DifferentialForm<double> xdx(1, 1);
    xdx.add_term({0}, axis_coeff(0));
    std::vector<std::pair<double, double>> seg = {{0, 2}};
    auto r2 = integrate<double>(xdx, identity_map(1), seg, q);
    CHECK(r2.value == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("integrate raises on orientation violation at the center") {
    QuadratureSpec q;
    DifferentialForm<double> dx(1, 1);
    dx.add_term({0}, const_coeff(1.0));
    PatchMap<double> reversed = [](std::span<const double> t, int order) {
        std::vector<double> dir = {-1.0};
        std::vector<Jet<double>> out;
        out.push_back(Jet<double>::variable(1, order, -t[0], dir));
        return out;
    };
    std::vector<std::pair<double, double>> seg = {{0, 1}};
    std::function<double(std::span<const double>)> orient = [&](std::span<const double> t) {
        auto jets = reversed(t, 1);
        return jets[0].coeff(1);
    };
    CHECK_THROWS_AS(integrate<double>(dx, reversed, seg, QuadratureSpec{}, orient),
                    OrientationError);
}

TEST_CASE("reparameterization invariance of exact-form integrals") {
    // integral of x2 dx1 + x1 dx2 = d(x1 x2) along two parameterizations of
    // the same curve
    DifferentialForm<double> w(2, 1);
    w.add_term({0}, axis_coeff(1));
    w.add_term({1}, axis_coeff(0));
    QuadratureSpec q;
    PatchMap<double> direct = [](std::span<const double> t, int order) {
        std::vector<double> one = {1.0};
        auto tj = Jet<double>::variable(1, order, t[0], one);
        std::vector<Jet<double>> out = {sin(tj), tj * tj};
        return out;
    };
    // t = s^3 + s (monotone), s in [0, phi^{-1}(1)]
    PatchMap<double> repar = [](std::span<const double> s, int order) {
        std::vector<double> one = {1.0};
        auto sj = Jet<double>::variable(1, order, s[0], one);
        auto tj = sj * sj * sj + sj;
        std::vector<Jet<double>> out = {sin(tj), tj * tj};
        return out;
    };
    std::vector<std::pair<double, double>> ti = {{0.0, 1.0}};
    // solve s^3 + s = 1
    double s1 = 0.6823278038280193;
    std::vector<std::pair<double, double>> si = {{0.0, s1}};
    auto a = integrate<double>(w, direct, ti, q);
    auto b = integrate<double>(w, repar, si, q);
    CHECK(a.value == doctest::Approx(b.value).epsilon(2e-9));
    // and both equal the potential difference x1*x2 at the endpoints
    CHECK(a.value == doctest::Approx(std::sin(1.0) * 1.0).epsilon(1e-10));
}

TEST_CASE("quadrature reports non-convergence on a hostile density") {
    QuadratureSpec q;
    q.gauss_order = 2;
    q.subdivisions = 1;
    q.max_levels = 2;
    q.refine_rtol = 1e-14;
    std::function<double(std::span<const double>)> rough = [](std::span<const double> t) {
        return std::abs(std::sin(200.0 / (0.3 + t[0])));
    };
    std::vector<std::pair<double, double>> seg = {{0.0, 1.0}};
    CHECK_THROWS_AS(integrate_density<double>(rough, seg, q), NonConvergent);
}

TEST_CASE("complex forms integrate componentwise") {
    using C = std::complex<double>;
    DifferentialForm<C> w(1, 1);
    w.add_term({0}, [](std::span<const Jet<C>> pt) { return pt[0] * C(0.0, 1.0); });
    PatchMap<C> line = [](std::span<const double> t, int order) {
        C one(1.0, 0.0);
        std::vector<Jet<C>> out;
        out.push_back(Jet<C>::variable(1, order, C(t[0], 0.0), std::span<const C>(&one, 1)));
        return out;
    };
    std::vector<std::pair<double, double>> seg = {{0.0, 2.0}};
    auto r = integrate<C>(w, line, seg, QuadratureSpec{});
    CHECK(std::abs(r.value - C(0.0, 2.0)) < 1e-12);
}
