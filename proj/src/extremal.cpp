#include "varik/extremal.hpp"

#include <cmath>
#include <limits>

namespace varik {

namespace {

// All second partials of F on the 2n chart at a plain point, one jet pass.
std::vector<double> full_hessian(const FinslerStructure& s, std::span<const double> pt) {
    const int m = 2 * s.n();
    std::vector<Jet<double>> jets;
    jets.reserve(pt.size());
    auto layout = JetLayout::get(m, 2);
    for (int i = 0; i < m; ++i) {
        Jet<double> j(layout, pt[static_cast<std::size_t>(i)]);
        j.coeff(1 + i) = 1.0;
        jets.push_back(std::move(j));
    }
    auto r = s.eval(jets);
    std::vector<double> h(static_cast<std::size_t>(m) * m);
    for (int a = 0; a < m; ++a) {
        for (int b = a; b < m; ++b) {
            MultiDegree alpha{};
            alpha[a] += 1;
            alpha[b] += 1;
            double v = r.derivative(alpha);
            h[static_cast<std::size_t>(a) * m + b] = v;
            h[static_cast<std::size_t>(b) * m + a] = v;
        }
    }
    return h;
}

}  // namespace

std::vector<double> reduced_acceleration(const FinslerStructure& s, const GaugeSpec& gauge,
                                         std::span<const double> x, std::span<const double> xdot) {
    const int n = s.n();
    const int g = gauge.gauge_index;
    if (g < 0 || g >= n) throw std::invalid_argument("reduced_acceleration: bad gauge index");
    if (std::abs(xdot[static_cast<std::size_t>(g)] - 1.0) > 1e-12)
        throw std::invalid_argument("reduced_acceleration: gauge velocity must be 1");
    std::vector<double> pt(static_cast<std::size_t>(2 * n));
    for (int i = 0; i < n; ++i) {
        pt[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)];
        pt[static_cast<std::size_t>(n + i)] = xdot[static_cast<std::size_t>(i)];
    }
    auto h = full_hessian(s, pt);
    const int m = 2 * n;
    auto H = [&](int a, int b) { return h[static_cast<std::size_t>(a) * m + b]; };

    // assemble the reduced system g_ij xddot^j = b_i over non-gauge indices
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
        if (i != g) idx.push_back(i);
    const int r = static_cast<int>(idx.size());
    std::vector<double> A(static_cast<std::size_t>(r) * r), b(static_cast<std::size_t>(r));
    double norm = 0.0;
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            A[static_cast<std::size_t>(i) * r + j] = H(n + idx[i], n + idx[j]);
            norm = std::max(norm, std::abs(A[static_cast<std::size_t>(i) * r + j]));
        }
    for (int i = 0; i < r; ++i) {
        double acc = 0.0;
        for (int rho = 0; rho < n; ++rho)
            acc += H(idx[i], n + rho) * xdot[static_cast<std::size_t>(rho)];
        for (int nu = 0; nu < n; ++nu)
            acc -= H(nu, n + idx[i]) * xdot[static_cast<std::size_t>(nu)];
        b[static_cast<std::size_t>(i)] = acc;
    }
    // Gaussian elimination with partial pivoting and conditioning guard
    std::vector<double> out(static_cast<std::size_t>(n), 0.0);
    for (int col = 0; col < r; ++col) {
        int piv = col;
        for (int row = col + 1; row < r; ++row)
            if (std::abs(A[static_cast<std::size_t>(row) * r + col]) >
                std::abs(A[static_cast<std::size_t>(piv) * r + col]))
                piv = row;
        double p = A[static_cast<std::size_t>(piv) * r + col];
        if (std::abs(p) <= gauge.admissible_check * (norm + 1e-300))
            throw SingularHessian("restricted fiber Hessian is singular for gauge index " +
                                  std::to_string(g));
        if (piv != col) {
            for (int c = col; c < r; ++c)
                std::swap(A[static_cast<std::size_t>(piv) * r + c],
                          A[static_cast<std::size_t>(col) * r + c]);
            std::swap(b[static_cast<std::size_t>(piv)], b[static_cast<std::size_t>(col)]);
        }
        for (int row = col + 1; row < r; ++row) {
            double f = A[static_cast<std::size_t>(row) * r + col] /
                       A[static_cast<std::size_t>(col) * r + col];
            for (int c = col; c < r; ++c)
                A[static_cast<std::size_t>(row) * r + c] -=
                    f * A[static_cast<std::size_t>(col) * r + c];
            b[static_cast<std::size_t>(row)] -= f * b[static_cast<std::size_t>(col)];
        }
    }
    for (int row = r - 1; row >= 0; --row) {
        double acc = b[static_cast<std::size_t>(row)];
        for (int c = row + 1; c < r; ++c)
            acc -= A[static_cast<std::size_t>(row) * r + c] * out[static_cast<std::size_t>(idx[c])];
        out[static_cast<std::size_t>(idx[row])] =
            acc / A[static_cast<std::size_t>(row) * r + row];
    }
    return out;
}

// ---- dense output -----------------------------------------------------------

TabulatedCurve::TabulatedCurve(int n, int gauge_index, double t0, double t1,
                               std::vector<std::vector<double>> values,
                               std::vector<std::vector<double>> derivs,
                               std::vector<std::vector<double>> second_derivs)
    : n_(n), gauge_(gauge_index), t0_(t0), t1_(t1), values_(std::move(values)),
      derivs_(std::move(derivs)), second_(std::move(second_derivs)) {}

std::vector<double> TabulatedCurve::node_state(int i) const {
    const double h = (t1_ - t0_) / (nodes() - 1);
    double t = t0_ + i * h;
    std::vector<double> out(static_cast<std::size_t>(2 * n_));
    int slot = 0;
    for (int c = 0; c < n_; ++c) {
        if (c == gauge_) {
            out[static_cast<std::size_t>(c)] = t;
            out[static_cast<std::size_t>(n_ + c)] = 1.0;
        } else {
            out[static_cast<std::size_t>(c)] = values_[static_cast<std::size_t>(i)][static_cast<std::size_t>(slot)];
            out[static_cast<std::size_t>(n_ + c)] = derivs_[static_cast<std::size_t>(i)][static_cast<std::size_t>(slot)];
            ++slot;
        }
    }
    return out;
}

std::vector<Jet<double>> TabulatedCurve::components(double t, int order) const {
    const int N = nodes() - 1;
    const double h = (t1_ - t0_) / N;
    int cell = static_cast<int>(std::floor((t - t0_) / h));
    cell = std::max(0, std::min(N - 1, cell));
    const double u = t - (t0_ + cell * h);

    double one = 1.0;
    auto tj = Jet<double>::variable(1, order, u, std::span<const double>(&one, 1));

    std::vector<Jet<double>> out;
    out.reserve(static_cast<std::size_t>(n_));
    int slot = 0;
    for (int c = 0; c < n_; ++c) {
        if (c == gauge_) {
            auto gj = Jet<double>::variable(1, order, t, std::span<const double>(&one, 1));
            out.push_back(std::move(gj));
            continue;
        }
        // quintic Hermite from (f, f', f'') at both cell ends
        const double f0 = values_[static_cast<std::size_t>(cell)][static_cast<std::size_t>(slot)];
        const double d0 = derivs_[static_cast<std::size_t>(cell)][static_cast<std::size_t>(slot)];
        const double s0 = second_[static_cast<std::size_t>(cell)][static_cast<std::size_t>(slot)];
        const double f1 = values_[static_cast<std::size_t>(cell) + 1][static_cast<std::size_t>(slot)];
        const double d1 = derivs_[static_cast<std::size_t>(cell) + 1][static_cast<std::size_t>(slot)];
        const double s1 = second_[static_cast<std::size_t>(cell) + 1][static_cast<std::size_t>(slot)];
        // coefficients of a0 + a1 u + ... + a5 u^5 on [0, h]
        const double a0 = f0, a1 = d0, a2 = 0.5 * s0;
        const double h2 = h * h;
        const double r0 = f1 - (a0 + a1 * h + a2 * h2);
        const double r1 = d1 - (a1 + 2 * a2 * h);
        const double r2 = s1 - 2 * a2;
        const double h3 = h2 * h;
        // solve for a3, a4, a5
        const double a3 = (10 * r0 - 4 * r1 * h + 0.5 * r2 * h2) / h3;
        const double a4 = (-15 * r0 + 7 * r1 * h - r2 * h2) / (h3 * h);
        const double a5 = (6 * r0 - 3 * r1 * h + 0.5 * r2 * h2) / (h3 * h2);
        auto poly = ((((tj * a5 + a4) * tj + a3) * tj + a2) * tj + a1) * tj + a0;
        out.push_back(std::move(poly));
        ++slot;
    }
    return out;
}

// ---- shooting ---------------------------------------------------------------

namespace {

struct Integration {
    bool ok = false;
    std::vector<std::vector<double>> values, derivs, seconds;  // per node, non-gauge
};

Integration integrate(const FinslerStructure& s, const GaugeSpec& gauge,
                      std::span<const double> start, double t0, double t1, int steps,
                      std::span<const double> slope) {
    const int n = s.n();
    const int g = gauge.gauge_index;
    const int r = n - 1;
    Integration out;
    out.values.reserve(static_cast<std::size_t>(steps) + 1);
    std::vector<double> q(static_cast<std::size_t>(r)), v(static_cast<std::size_t>(r));
    {
        int slot = 0;
        for (int c = 0; c < n; ++c)
            if (c != g) {
                q[static_cast<std::size_t>(slot)] = start[static_cast<std::size_t>(c)];
                v[static_cast<std::size_t>(slot)] = slope[static_cast<std::size_t>(slot)];
                ++slot;
            }
    }
    const double h = (t1 - t0) / steps;
    auto accel = [&](double t, std::span<const double> qq, std::span<const double> vv,
                     std::vector<double>& a) -> bool {
        std::vector<double> x(static_cast<std::size_t>(n)), xd(static_cast<std::size_t>(n));
        int slot = 0;
        for (int c = 0; c < n; ++c) {
            if (c == g) {
                x[static_cast<std::size_t>(c)] = t;
                xd[static_cast<std::size_t>(c)] = 1.0;
            } else {
                x[static_cast<std::size_t>(c)] = qq[static_cast<std::size_t>(slot)];
                xd[static_cast<std::size_t>(c)] = vv[static_cast<std::size_t>(slot)];
                ++slot;
            }
        }
        for (double vv2 : x)
            if (!std::isfinite(vv2)) return false;
        std::vector<double> full;
        try {
            full = reduced_acceleration(s, gauge, x, xd);
        } catch (const std::exception&) {
            return false;
        }
        a.resize(static_cast<std::size_t>(r));
        slot = 0;
        for (int c = 0; c < n; ++c)
            if (c != g) {
                a[static_cast<std::size_t>(slot)] = full[static_cast<std::size_t>(c)];
                ++slot;
            }
        for (double av : a)
            if (!std::isfinite(av)) return false;
        return true;
    };

    std::vector<double> a(static_cast<std::size_t>(r));
    if (!accel(t0, q, v, a)) return out;
    out.values.push_back(q);
    out.derivs.push_back(v);
    out.seconds.push_back(a);

    std::vector<double> k1q(r), k1v(r), k2q(r), k2v(r), k3q(r), k3v(r), k4q(r), k4v(r);
    std::vector<double> tq(r), tv(r);
    for (int step = 0; step < steps; ++step) {
        const double t = t0 + step * h;
        if (!accel(t, q, v, k1v)) return out;
        for (int i = 0; i < r; ++i) k1q[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
        for (int i = 0; i < r; ++i) {
            tq[static_cast<std::size_t>(i)] = q[static_cast<std::size_t>(i)] + 0.5 * h * k1q[static_cast<std::size_t>(i)];
            tv[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] + 0.5 * h * k1v[static_cast<std::size_t>(i)];
        }
        if (!accel(t + 0.5 * h, tq, tv, k2v)) return out;
        for (int i = 0; i < r; ++i) k2q[static_cast<std::size_t>(i)] = tv[static_cast<std::size_t>(i)];
        for (int i = 0; i < r; ++i) {
            tq[static_cast<std::size_t>(i)] = q[static_cast<std::size_t>(i)] + 0.5 * h * k2q[static_cast<std::size_t>(i)];
            tv[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] + 0.5 * h * k2v[static_cast<std::size_t>(i)];
        }
        if (!accel(t + 0.5 * h, tq, tv, k3v)) return out;
        for (int i = 0; i < r; ++i) k3q[static_cast<std::size_t>(i)] = tv[static_cast<std::size_t>(i)];
        for (int i = 0; i < r; ++i) {
            tq[static_cast<std::size_t>(i)] = q[static_cast<std::size_t>(i)] + h * k3q[static_cast<std::size_t>(i)];
            tv[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] + h * k3v[static_cast<std::size_t>(i)];
        }
        if (!accel(t + h, tq, tv, k4v)) return out;
        for (int i = 0; i < r; ++i) k4q[static_cast<std::size_t>(i)] = tv[static_cast<std::size_t>(i)];
        for (int i = 0; i < r; ++i) {
            q[static_cast<std::size_t>(i)] +=
                (h / 6.0) * (k1q[static_cast<std::size_t>(i)] + 2 * k2q[static_cast<std::size_t>(i)] +
                             2 * k3q[static_cast<std::size_t>(i)] + k4q[static_cast<std::size_t>(i)]);
            v[static_cast<std::size_t>(i)] +=
                (h / 6.0) * (k1v[static_cast<std::size_t>(i)] + 2 * k2v[static_cast<std::size_t>(i)] +
                             2 * k3v[static_cast<std::size_t>(i)] + k4v[static_cast<std::size_t>(i)]);
        }
        if (!accel(t + h, q, v, a)) return out;
        out.values.push_back(q);
        out.derivs.push_back(v);
        out.seconds.push_back(a);
    }
    out.ok = true;
    return out;
}

}  // namespace

BvpSolution solve_bvp(const BvpProblem& p) {
    if (!p.structure) throw std::invalid_argument("solve_bvp: missing structure");
    const FinslerStructure& s = *p.structure;
    const int n = s.n();
    const int g = p.gauge.gauge_index;
    if (static_cast<int>(p.start.size()) != n || static_cast<int>(p.end.size()) != n)
        throw std::invalid_argument("solve_bvp: endpoint dimension mismatch");
    const double t0 = p.start[static_cast<std::size_t>(g)];
    const double t1 = p.end[static_cast<std::size_t>(g)];
    if (!(std::abs(t1 - t0) > 0.0))
        throw std::invalid_argument("solve_bvp: endpoints must differ in the gauge coordinate");
    const int r = n - 1;

    std::vector<double> target(static_cast<std::size_t>(r));
    {
        int slot = 0;
        for (int c = 0; c < n; ++c)
            if (c != g) target[static_cast<std::size_t>(slot++)] = p.end[static_cast<std::size_t>(c)];
    }
    std::vector<double> slope(static_cast<std::size_t>(r));
    if (p.initial_slope) {
        slope = *p.initial_slope;
    } else {
        int slot = 0;
        for (int c = 0; c < n; ++c)
            if (c != g)
                slope[static_cast<std::size_t>(slot++)] =
                    (p.end[static_cast<std::size_t>(c)] - p.start[static_cast<std::size_t>(c)]) /
                    (t1 - t0);
    }

    // For trajectories that die mid-flight the miss carries the sign of the
    // last finite state (bisection needs a usable sign) but stays marked
    // non-finite through `ok`.
    struct Shot {
        std::vector<double> miss;
        bool ok = false;
    };
    auto miss_of = [&](std::span<const double> sl, Integration* keep) {
        auto run = integrate(s, p.gauge, p.start, t0, t1, p.rk4_steps, sl);
        Shot shot;
        shot.ok = run.ok;
        shot.miss.assign(static_cast<std::size_t>(r), std::numeric_limits<double>::infinity());
        if (!run.values.empty()) {
            for (int i = 0; i < r; ++i) {
                double v = run.values.back()[static_cast<std::size_t>(i)] -
                           target[static_cast<std::size_t>(i)];
                if (!std::isfinite(v)) v = std::numeric_limits<double>::infinity();
                shot.miss[static_cast<std::size_t>(i)] = v;
            }
        }
        if (keep) *keep = std::move(run);
        return shot;
    };

    Integration best;
    int iterations = 0;
    Shot shot = miss_of(slope, &best);
    auto norm_of = [](const Shot& sh) {
        if (!sh.ok) return std::numeric_limits<double>::infinity();
        double worst = 0.0;
        for (double v : sh.miss) {
            if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
            worst = std::max(worst, std::abs(v));
        }
        return worst;
    };
    double best_norm = norm_of(shot);
    std::vector<double> miss = shot.miss;

    // bracket for the 1-dimensional bisection fallback
    double lo = 0.0, hi = 0.0;
    bool have_bracket = false;
    double f_lo = 0.0;

    while (iterations < p.max_iters && best_norm > p.shoot_tol) {
        ++iterations;
        bool newton_moved = false;
        if (std::isfinite(best_norm)) {
            // damped Newton with a finite-difference Jacobian
            std::vector<double> J(static_cast<std::size_t>(r) * r);
            bool jac_ok = true;
            for (int j = 0; j < r && jac_ok; ++j) {
                double step = 1e-6 * (1.0 + std::abs(slope[static_cast<std::size_t>(j)]));
                auto pert = slope;
                pert[static_cast<std::size_t>(j)] += step;
                auto s2 = miss_of(pert, nullptr);
                if (!std::isfinite(norm_of(s2))) {
                    jac_ok = false;
                    break;
                }
                for (int i = 0; i < r; ++i)
                    J[static_cast<std::size_t>(i) * r + j] =
                        (s2.miss[static_cast<std::size_t>(i)] - miss[static_cast<std::size_t>(i)]) /
                        step;
            }
            if (jac_ok) {
                // solve J d = miss
                std::vector<double> A = J, rhs = miss, d(static_cast<std::size_t>(r), 0.0);
                bool solved = true;
                for (int col = 0; col < r && solved; ++col) {
                    int piv = col;
                    for (int row = col + 1; row < r; ++row)
                        if (std::abs(A[static_cast<std::size_t>(row) * r + col]) >
                            std::abs(A[static_cast<std::size_t>(piv) * r + col]))
                            piv = row;
                    if (std::abs(A[static_cast<std::size_t>(piv) * r + col]) < 1e-14) {
                        solved = false;
                        break;
                    }
                    if (piv != col) {
                        for (int c = col; c < r; ++c)
                            std::swap(A[static_cast<std::size_t>(piv) * r + c],
                                      A[static_cast<std::size_t>(col) * r + c]);
                        std::swap(rhs[static_cast<std::size_t>(piv)], rhs[static_cast<std::size_t>(col)]);
                    }
                    for (int row = col + 1; row < r; ++row) {
                        double f = A[static_cast<std::size_t>(row) * r + col] /
                                   A[static_cast<std::size_t>(col) * r + col];
                        for (int c = col; c < r; ++c)
                            A[static_cast<std::size_t>(row) * r + c] -=
                                f * A[static_cast<std::size_t>(col) * r + c];
                        rhs[static_cast<std::size_t>(row)] -= f * rhs[static_cast<std::size_t>(col)];
                    }
                }
                if (solved) {
                    for (int row = r - 1; row >= 0; --row) {
                        double acc = rhs[static_cast<std::size_t>(row)];
                        for (int c = row + 1; c < r; ++c)
                            acc -= A[static_cast<std::size_t>(row) * r + c] * d[static_cast<std::size_t>(c)];
                        d[static_cast<std::size_t>(row)] = acc / A[static_cast<std::size_t>(row) * r + row];
                    }
                    for (double damp = 1.0; damp >= 1.0 / 64.0; damp *= 0.5) {
                        auto trial = slope;
                        for (int i = 0; i < r; ++i)
                            trial[static_cast<std::size_t>(i)] -= damp * d[static_cast<std::size_t>(i)];
                        Integration run;
                        auto s2 = miss_of(trial, &run);
                        double nn = norm_of(s2);
                        if (nn < best_norm) {
                            slope = trial;
                            miss = s2.miss;
                            best = std::move(run);
                            best_norm = nn;
                            newton_moved = true;
                            break;
                        }
                    }
                }
            }
        }
        if (!newton_moved && r == 1) {
            // bisection fallback on the single slope; dead trajectories keep
            // the sign of their last finite state
            if (!have_bracket) {
                double base = slope[0];
                double f_base = miss[0];
                double span = 1.0 + std::abs(base);
                bool found = false;
                for (int e = 0; e < 40 && !found; ++e) {
                    for (double cand : {base + span, base - span}) {
                        std::vector<double> sl = {cand};
                        auto s2 = miss_of(sl, nullptr);
                        double v = s2.miss[0];
                        if ((v < 0) != (f_base < 0)) {
                            lo = std::min(base, cand);
                            hi = std::max(base, cand);
                            f_lo = (lo == base) ? f_base : v;
                            found = true;
                            have_bracket = true;
                            break;
                        }
                    }
                    span *= 2.0;
                }
                if (!found) break;
            }
            double mid = 0.5 * (lo + hi);
            std::vector<double> sl = {mid};
            Integration run;
            auto s2 = miss_of(sl, &run);
            double v = s2.miss[0];
            if ((v < 0) == (f_lo < 0)) {
                lo = mid;
                f_lo = v;
            } else {
                hi = mid;
            }
            double nn = norm_of(s2);
            if (nn < best_norm) {
                slope = sl;
                miss = s2.miss;
                best = std::move(run);
                best_norm = nn;
            }
        } else if (!newton_moved) {
            break;
        }
    }

    if (!(best_norm <= p.shoot_tol))
        throw NonConvergent("solve_bvp: endpoint miss " + std::to_string(best_norm) + " after " +
                            std::to_string(iterations) + " iterations");

    BvpSolution sol;
    sol.iterations = iterations;
    sol.endpoint_miss = best_norm;
    sol.curve = std::make_shared<TabulatedCurve>(n, g, t0, t1, std::move(best.values),
                                                 std::move(best.derivs), std::move(best.seconds));
    for (int i = 1; i <= 100; ++i) {
        double t = t0 + (t1 - t0) * i / 101.0;
        for (double v : el_residual(s, *sol.curve, t))
            sol.max_el_residual = std::max(sol.max_el_residual, std::abs(v));
    }
    return sol;
}

DriftReport conserved_along(const BvpSolution& sol,
                            const std::function<double(std::span<const double>)>& current) {
    DriftReport rep;
    const int N = sol.curve->nodes();
    double first = 0.0;
    for (int i = 0; i < N; ++i) {
        auto state = sol.curve->node_state(i);
        double v = current(state);
        if (i == 0)
            first = v;
        else
            rep.max_drift = std::max(rep.max_drift, std::abs(v - first));
    }
    return rep;
}

}  // namespace varik
