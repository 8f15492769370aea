#include "varik/finsler.hpp"

#include <cmath>
#include <sstream>

namespace varik {

namespace {
constexpr double kResidualGuard = 1e-300;

std::string point_to_string(std::span<const double> p) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ")";
    return os.str();
}
}  // namespace

FinslerStructure::FinslerStructure(int n, LagrangianExpr F, std::vector<double> env,
                                   SampleSpec admissible)
    : n_(n), F_(std::move(F)), env_(std::move(env)), admissible_(std::move(admissible)) {
    if (static_cast<std::size_t>(2 * n_) + env_.size() != F_.var_names().size())
        throw std::invalid_argument(
            "FinslerStructure: F must use 2n chart coordinates plus the bound constants");
    if (admissible_.box.empty()) {
        admissible_.box.assign(static_cast<std::size_t>(2 * n_), {-2.0, 2.0});
        admissible_.exclusion_name = "none";
    }
}

std::vector<Jet<double>> FinslerStructure::with_env(std::span<const Jet<double>> chart_jets) const {
    if (static_cast<int>(chart_jets.size()) != 2 * n_)
        throw std::invalid_argument("FinslerStructure: expected 2n chart jets");
    std::vector<Jet<double>> in(chart_jets.begin(), chart_jets.end());
    auto layout = chart_jets.empty() ? JetLayout::get(1, 0) : chart_jets[0].layout_ptr();
    for (double v : env_) in.emplace_back(layout, v);
    return in;
}

Jet<double> FinslerStructure::eval(std::span<const Jet<double>> chart_jets) const {
    auto in = with_env(chart_jets);
    return F_.evaluate(std::span<const Jet<double>>(in));
}

double FinslerStructure::eval_point(std::span<const double> chart_point) const {
    auto layout = JetLayout::get(1, 0);
    std::vector<Jet<double>> jets;
    jets.reserve(chart_point.size());
    for (double v : chart_point) jets.emplace_back(layout, v);
    return eval(jets).value();
}

Jet<double> FinslerStructure::partial(std::span<const Jet<double>> chart_jets,
                                      int chart_index) const {
    auto in = with_env(chart_jets);
    return expr_partial(F_, std::span<const Jet<double>>(in), chart_index);
}

Jet<double> FinslerStructure::second_partial_dir(std::span<const Jet<double>> chart_jets,
                                                 int chart_i, std::span<const double> w) const {
    auto in = with_env(chart_jets);
    std::vector<Jet<double>> extended;
    extended.reserve(in.size());
    for (std::size_t idx = 0; idx < in.size(); ++idx) {
        double seeds[2] = {idx < w.size() ? w[idx] : 0.0,
                           static_cast<int>(idx) == chart_i ? 1.0 : 0.0};
        extended.push_back(extend(in[idx], 2, 2, std::span<const double>(seeds, 2)));
    }
    auto r = F_.evaluate(std::span<const Jet<double>>(extended));
    return extract_partial(extract_partial(r));
}

std::vector<double> FinslerStructure::gradient(std::span<const double> chart_point) const {
    std::vector<double> full(chart_point.begin(), chart_point.end());
    full.insert(full.end(), env_.begin(), env_.end());
    auto g = expr_gradient<double>(F_, full);
    g.resize(static_cast<std::size_t>(2 * n_));
    return g;
}

HomogeneityReport check_homogeneity(const FinslerStructure& s, const SampleSpec& spec,
                                    std::span<const double> lambdas, bool absolute) {
    HomogeneityReport rep;
    const int n = s.n();
    for (const auto& p : sample_points(spec)) {
        try {
            const double f = s.eval_point(p);
            for (double lam : lambdas) {
                if (!(lam > 0.0) && !absolute)
                    throw std::invalid_argument("check_homogeneity: lambda must be positive");
                std::vector<double> scaled = p;
                for (int i = 0; i < n; ++i) scaled[static_cast<std::size_t>(n + i)] *= lam;
                const double want = (absolute ? std::abs(lam) : lam) * f;
                const double res = std::abs(s.eval_point(scaled) - want) /
                                   (std::abs(want) + kResidualGuard);
                rep.max_rel_residual_scaling = std::max(rep.max_rel_residual_scaling, res);
            }
            auto grad = s.gradient(p);
            double euler = 0.0;
            for (int i = 0; i < n; ++i)
                euler += grad[static_cast<std::size_t>(n + i)] * p[static_cast<std::size_t>(n + i)];
            const double res = std::abs(euler - f) / (std::abs(f) + kResidualGuard);
            rep.max_rel_residual_euler = std::max(rep.max_rel_residual_euler, res);
        } catch (const std::exception& err) {
            throw std::runtime_error(std::string("check_homogeneity failed at sample ") +
                                     point_to_string(p) + ": " + err.what());
        }
    }
    return rep;
}

DifferentialForm<double> hilbert_form(const FinslerStructure& s) {
    const int n = s.n();
    DifferentialForm<double> form(2 * n, 1);
    for (int mu = 0; mu < n; ++mu) {
        form.add_term({mu}, [&s, n, mu](std::span<const Jet<double>> pt) {
            return s.partial(pt, n + mu);
        });
    }
    return form;
}

LengthResult finsler_length(const FinslerStructure& s, const Curve& c, const QuadratureSpec& q) {
    if (c.dim() != s.n()) throw std::invalid_argument("finsler_length: curve dimension mismatch");
    auto rect = std::vector<std::pair<double, double>>{c.interval()};
    std::function<double(std::span<const double>)> density = [&](std::span<const double> t) {
        auto lift = tangent_lift_map(c)(t, 0);
        return s.eval(std::span<const Jet<double>>(lift)).value();
    };
    LengthResult out;
    auto direct = integrate_density<double>(density, rect, q);
    out.value = direct.value;
    out.levels = direct.levels;

    auto form = hilbert_form(s);
    auto lift = tangent_lift_map(c);
    auto via = integrate<double>(form, lift, rect, q);
    out.via_form = via.value;
    const double tol = 2.0 * q.refine_rtol * (std::abs(out.value) + 1.0);
    if (std::abs(out.value - out.via_form) > tol)
        throw std::runtime_error("finsler_length: density and Hilbert-form routes disagree by " +
                                 std::to_string(std::abs(out.value - out.via_form)));
    return out;
}

std::vector<double> el_residual(const FinslerStructure& s, const Curve& c, double t) {
    const int n = s.n();
    if (c.dim() != n) throw std::invalid_argument("el_residual: curve dimension mismatch");
    // chart jets of the tangent lift with one t-order retained
    std::vector<double> tt = {t};
    auto chart = tangent_lift_map(c)(tt, 1);
    std::vector<double> xdot(static_cast<std::size_t>(2 * n), 0.0);
    for (int i = 0; i < n; ++i) xdot[static_cast<std::size_t>(n + i)] = chart[n + i].value();
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int mu = 0; mu < n; ++mu) {
        // sum_rho d2F/(dx^mu dy^rho) xdot^rho at the point
        double mixed = s.second_partial_dir(chart, mu, xdot).value();
        // d/dt of dF/dy^mu along the lift
        double ddt = s.partial(chart, n + mu).coeff(1);
        out[static_cast<std::size_t>(mu)] = mixed - ddt;
    }
    return out;
}

DifferentialForm<double> el_component_form(const FinslerStructure& s, int mu) {
    const int n = s.n();
    DifferentialForm<double> form(2 * n, 1);
    for (int rho = 0; rho < n; ++rho) {
        form.add_term({rho}, [&s, n, mu, rho](std::span<const Jet<double>> pt) {
            std::vector<double> w(static_cast<std::size_t>(2 * n), 0.0);
            w[static_cast<std::size_t>(n + rho)] = 1.0;
            return s.second_partial_dir(pt, mu, w);
        });
    }
    DifferentialForm<double> dFy(2 * n, 0);
    dFy.add_term({}, [&s, n, mu](std::span<const Jet<double>> pt) { return s.partial(pt, n + mu); });
    auto d = dFy.exterior_derivative();
    for (const auto& [key, fn] : d.coefficients()) form.add_term(key, fn, -1.0);
    return form;
}

DifferentialForm<double> el_form(const FinslerStructure& s) {
    const int n = s.n();
    DifferentialForm<double> total(2 * n, 2);
    for (int mu = 0; mu < n; ++mu) {
        auto comp = el_component_form(s, mu);
        for (const auto& [key, fn] : comp.coefficients()) {
            std::vector<int> merged;
            merged.reserve(key.size() + 1);
            merged.push_back(mu);
            merged.insert(merged.end(), key.begin(), key.end());
            total.add_term(std::move(merged), fn);
        }
    }
    return total;
}

NoetherCurrent noether_current(const FinslerStructure& s, const NoetherSpec& u) {
    const int n = s.n();
    if (static_cast<int>(u.generator.size()) != n)
        throw std::invalid_argument("noether_current: generator length must equal n");
    auto gen = std::make_shared<std::vector<LagrangianExpr>>(u.generator);
    auto structure = &s;

    auto u_values = [gen, n](std::span<const double> x) {
        std::vector<double> vals(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            vals[static_cast<std::size_t>(i)] = (*gen)[static_cast<std::size_t>(i)].evaluate_real(
                x.subspan(0, static_cast<std::size_t>(n)));
        return vals;
    };

    NoetherCurrent out;
    out.value = [structure, u_values, n](std::span<const double> chart_point) {
        auto grad = structure->gradient(chart_point);
        auto uv = u_values(chart_point);
        double f = 0.0;
        for (int i = 0; i < n; ++i)
            f += grad[static_cast<std::size_t>(n + i)] * uv[static_cast<std::size_t>(i)];
        return f;
    };

    out.symmetry_test = [structure, gen, n](const SampleSpec& spec) {
        double worst = 0.0;
        for (const auto& p : sample_points(spec)) {
            // induced field on TM: Y = (u, (du/dx) y)
            std::vector<double> x(p.begin(), p.begin() + n);
            std::vector<double> w(static_cast<std::size_t>(2 * n), 0.0);
            std::vector<std::vector<double>> du(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                w[static_cast<std::size_t>(i)] =
                    (*gen)[static_cast<std::size_t>(i)].evaluate_real(x);
                du[static_cast<std::size_t>(i)] =
                    expr_gradient<double>((*gen)[static_cast<std::size_t>(i)], x);
            }
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int nu = 0; nu < n; ++nu)
                    acc += du[static_cast<std::size_t>(i)][static_cast<std::size_t>(nu)] *
                           p[static_cast<std::size_t>(n + nu)];
                w[static_cast<std::size_t>(n + i)] = acc;
            }
            // L_Y F coefficients: c_nu = Y(dF/dy^nu) + sum_rho dF/dy^rho du^rho/dx^nu
            auto layout = JetLayout::get(1, 0);
            std::vector<Jet<double>> chart;
            chart.reserve(p.size());
            for (double v : p) chart.emplace_back(layout, v);
            auto grad = structure->gradient(p);
            for (int nu = 0; nu < n; ++nu) {
                double deriv = structure->second_partial_dir(chart, n + nu, w).value();
                double transport = 0.0;
                for (int rho = 0; rho < n; ++rho)
                    transport += grad[static_cast<std::size_t>(n + rho)] *
                                 du[static_cast<std::size_t>(rho)][static_cast<std::size_t>(nu)];
                worst = std::max(worst, std::abs(deriv + transport));
            }
        }
        return worst;
    };
    return out;
}

FinslerStructure lift_conventional(const LagrangianExpr& L, int n_config, std::vector<double> env) {
    const int n = n_config;
    // L over (t, q^1.., qdot^1.., consts) -> F over (x0..xn, y0..yn, consts)
    std::vector<std::string> chart;
    for (int i = 0; i <= n; ++i) chart.push_back("x" + std::to_string(i));
    for (int i = 0; i <= n; ++i) chart.push_back("y" + std::to_string(i));
    const auto& lv = L.var_names();
    std::vector<std::string> const_names(lv.begin() + (1 + 2 * n), lv.end());
    std::vector<std::string> all = chart;
    all.insert(all.end(), const_names.begin(), const_names.end());

    std::map<std::string, std::string> repl;
    repl[lv[0]] = "x0";
    for (int i = 0; i < n; ++i) {
        repl[lv[static_cast<std::size_t>(1 + i)]] = "x" + std::to_string(i + 1);
        repl[lv[static_cast<std::size_t>(1 + n + i)]] =
            "(y" + std::to_string(i + 1) + "/y0)";
    }
    auto core = L.substitute(repl, all);
    auto F = LagrangianExpr::parse("(" + core.print() + ")*y0", all, L.kind());

    SampleSpec adm;
    adm.seed = 20130625;
    adm.box.assign(static_cast<std::size_t>(2 * (n + 1)), {-2.0, 2.0});
    adm.exclusion_name = "y0_nonzero";
    adm.exclusion = away_from_zero({n + 1});
    return FinslerStructure(n + 1, std::move(F), std::move(env), std::move(adm));
}

DifferentialForm<double> cartan_restrict(const FinslerStructure& s) {
    const int n = s.n() - 1;  // configuration dimension
    if (n < 1) throw std::invalid_argument("cartan_restrict needs a lifted structure (n >= 2)");
    const int dim = 2 * n + 1;  // (t, q^i, qdot^i)
    auto structure = &s;
    DifferentialForm<double> theta(dim, 1);
    // inclusion iota: x = (t, q), y = (1, qdot)
    auto include = [structure, n](std::span<const Jet<double>> pt) {
        auto layout = pt[0].layout_ptr();
        std::vector<Jet<double>> chart;
        chart.reserve(static_cast<std::size_t>(2 * (n + 1)));
        chart.push_back(pt[0]);                                     // x0 = t
        for (int i = 0; i < n; ++i) chart.push_back(pt[1 + i]);     // x^i = q^i
        chart.emplace_back(layout, 1.0);                            // y0 = 1
        for (int i = 0; i < n; ++i) chart.push_back(pt[1 + n + i]); // y^i = qdot^i
        (void)structure;
        return chart;
    };
    // dt coefficient: L - (dL/dqdot^i) qdot^i = F о iota - (dF/dy^i о iota) qdot^i
    theta.add_term({0}, [structure, include, n](std::span<const Jet<double>> pt) {
        auto chart = include(pt);
        auto val = structure->eval(chart);
        for (int i = 0; i < n; ++i)
            val -= structure->partial(chart, (n + 1) + 1 + i) * pt[1 + n + i];
        return val;
    });
    for (int i = 0; i < n; ++i) {
        theta.add_term({1 + i}, [structure, include, n, i](std::span<const Jet<double>> pt) {
            auto chart = include(pt);
            return structure->partial(chart, (n + 1) + 1 + i);
        });
    }
    return theta;
}

double chart_transition_test(const FinslerStructure& s, const std::vector<LagrangianExpr>& phi,
                             const Curve& c, int time_samples) {
    const int n = s.n();
    if (static_cast<int>(phi.size()) != n)
        throw std::invalid_argument("chart_transition_test: phi must have n components");
    auto [t0, t1] = c.interval();
    double worst = 0.0;
    for (int k = 0; k < time_samples; ++k) {
        double t = t0 + (t1 - t0) * (k + 0.5) / time_samples;
        std::vector<double> tt = {t};
        auto chart = tangent_lift_map(c)(tt, 1);
        // original density: dF/dy^mu xdot^mu
        auto grad_t = [&](std::span<const Jet<double>> ch) {
            double d = 0.0;
            for (int mu = 0; mu < n; ++mu) d += s.partial(ch, n + mu).value() * ch[mu].coeff(1);
            return d;
        };
        double density_old = grad_t(chart);

        // transformed curve: xbar(t) = phi(x(t)), ybar = d/dt xbar
        std::vector<Jet<double>> xjets(chart.begin(), chart.begin() + n);
        std::vector<Jet<double>> xbar;
        xbar.reserve(static_cast<std::size_t>(n));
        for (int mu = 0; mu < n; ++mu)
            xbar.push_back(phi[static_cast<std::size_t>(mu)].evaluate(
                std::span<const Jet<double>>(xjets)));
        // Jacobian dphi/dx at the point and its inverse (for dFbar/dybar)
        std::vector<double> x(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = chart[i].value();
        std::vector<double> J(static_cast<std::size_t>(n) * n);
        for (int mu = 0; mu < n; ++mu) {
            auto g = expr_gradient<double>(phi[static_cast<std::size_t>(mu)], x);
            for (int nu = 0; nu < n; ++nu) J[static_cast<std::size_t>(mu) * n + nu] = g[nu];
        }
        // invert J by Gauss-Jordan
        std::vector<double> inv(static_cast<std::size_t>(n) * n, 0.0);
        {
            std::vector<double> a = J;
            for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i) * n + i] = 1.0;
            for (int col = 0; col < n; ++col) {
                int pivot = col;
                for (int r = col + 1; r < n; ++r)
                    if (std::abs(a[static_cast<std::size_t>(r) * n + col]) >
                        std::abs(a[static_cast<std::size_t>(pivot) * n + col]))
                        pivot = r;
                if (std::abs(a[static_cast<std::size_t>(pivot) * n + col]) < 1e-13)
                    throw std::runtime_error(
                        "chart_transition_test: singular Jacobian at sample t=" +
                        std::to_string(t));
                if (pivot != col)
                    for (int cc = 0; cc < n; ++cc) {
                        std::swap(a[static_cast<std::size_t>(pivot) * n + cc],
                                  a[static_cast<std::size_t>(col) * n + cc]);
                        std::swap(inv[static_cast<std::size_t>(pivot) * n + cc],
                                  inv[static_cast<std::size_t>(col) * n + cc]);
                    }
                double d = a[static_cast<std::size_t>(col) * n + col];
                for (int cc = 0; cc < n; ++cc) {
                    a[static_cast<std::size_t>(col) * n + cc] /= d;
                    inv[static_cast<std::size_t>(col) * n + cc] /= d;
                }
                for (int r = 0; r < n; ++r) {
                    if (r == col) continue;
                    double f = a[static_cast<std::size_t>(r) * n + col];
                    for (int cc = 0; cc < n; ++cc) {
                        a[static_cast<std::size_t>(r) * n + cc] -=
                            f * a[static_cast<std::size_t>(col) * n + cc];
                        inv[static_cast<std::size_t>(r) * n + cc] -=
                            f * inv[static_cast<std::size_t>(col) * n + cc];
                    }
                }
            }
        }
        // dFbar/dybar^mu = (J^-1)^nu_mu dF/dy^nu; density = sum dFbar/dybar d(xbar)/dt
        auto grad = s.gradient([&] {
            std::vector<double> pt(static_cast<std::size_t>(2 * n));
            for (int i = 0; i < n; ++i) {
                pt[static_cast<std::size_t>(i)] = chart[i].value();
                pt[static_cast<std::size_t>(n + i)] = chart[n + i].value();
            }
            return pt;
        }());
        double density_new = 0.0;
        for (int mu = 0; mu < n; ++mu) {
            double co = 0.0;
            for (int nu = 0; nu < n; ++nu)
                co += inv[static_cast<std::size_t>(nu) * n + mu] *
                      grad[static_cast<std::size_t>(n + nu)];
            density_new += co * xbar[static_cast<std::size_t>(mu)].coeff(1);
        }
        worst = std::max(worst, std::abs(density_new - density_old));
    }
    return worst;
}

double first_variation(const FinslerStructure& s, const Curve& c,
                       const std::vector<LagrangianExpr>& xi, const QuadratureSpec& q) {
    const int n = s.n();
    if (static_cast<int>(xi.size()) != n)
        throw std::invalid_argument("first_variation: xi must have n components");
    auto rect = std::vector<std::pair<double, double>>{c.interval()};
    std::function<double(std::span<const double>)> density = [&](std::span<const double> t) {
        // two jet parameters: t (order for y) and the flow parameter s
        auto base = c.components(t[0], 2);  // 1-param jets in t, order 2
        std::vector<Jet<double>> x2;        // 2-param jets (t, s), order 2
        x2.reserve(static_cast<std::size_t>(n));
        for (const auto& xj : base) x2.push_back(extend(xj, 1, 0));
        std::vector<Jet<double>> xvals(x2.begin(), x2.end());
        std::vector<Jet<double>> deformed;
        deformed.reserve(static_cast<std::size_t>(n));
        // s as a jet
        auto layout = x2[0].layout_ptr();
        Jet<double> sj(layout, 0.0);
        MultiDegree es{};
        es[1] = 1;
        sj.coeff(layout->rank_of(es)) = 1.0;
        for (int i = 0; i < n; ++i) {
            auto xiv = xi[static_cast<std::size_t>(i)].evaluate(
                std::span<const Jet<double>>(xvals));
            deformed.push_back(x2[static_cast<std::size_t>(i)] + sj * xiv);
        }
        // chart jets: (x, dx/dt) at fixed s
        std::vector<Jet<double>> chart;
        chart.reserve(static_cast<std::size_t>(2 * n));
        for (const auto& xj : deformed) chart.push_back(truncate(xj, 1));
        for (const auto& xj : deformed) chart.push_back(param_shift(xj, 0));
        auto f = s.eval(chart);
        // d/ds at s = 0: coefficient of the pure s-degree-1 term
        MultiDegree ds{};
        ds[1] = 1;
        return f.derivative(ds);
    };
    return integrate_density<double>(density, rect, q).value;
}

}  // namespace varik
