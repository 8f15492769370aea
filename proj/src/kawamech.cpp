#include "varik/kawamech.hpp"

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

KawaMechStructure::KawaMechStructure(int n, LagrangianExpr K, std::vector<double> env,
                                     SampleSpec admissible)
    : n_(n), K_(std::move(K)), env_(std::move(env)), admissible_(std::move(admissible)) {
    if (static_cast<std::size_t>(3 * n_) + env_.size() != K_.var_names().size())
        throw std::invalid_argument(
            "KawaMechStructure: K must use 3n chart coordinates plus the bound constants");
    if (admissible_.box.empty()) {
        admissible_.box.assign(static_cast<std::size_t>(3 * n_), {-2.0, 2.0});
        admissible_.exclusion_name = "none";
    }
}

std::vector<Jet<double>> KawaMechStructure::with_env(
    std::span<const Jet<double>> chart_jets) const {
    if (static_cast<int>(chart_jets.size()) != 3 * n_)
        throw std::invalid_argument("KawaMechStructure: expected 3n chart jets");
    std::vector<Jet<double>> in(chart_jets.begin(), chart_jets.end());
    auto layout = chart_jets[0].layout_ptr();
    for (double v : env_) in.emplace_back(layout, v);
    return in;
}

Jet<double> KawaMechStructure::eval(std::span<const Jet<double>> chart_jets) const {
    auto in = with_env(chart_jets);
    return K_.evaluate(std::span<const Jet<double>>(in));
}

double KawaMechStructure::eval_point(std::span<const double> chart_point) const {
    auto layout = JetLayout::get(1, 0);
    std::vector<Jet<double>> jets;
    jets.reserve(chart_point.size());
    for (double v : chart_point) jets.emplace_back(layout, v);
    return eval(jets).value();
}

Jet<double> KawaMechStructure::partial(std::span<const Jet<double>> chart_jets,
                                       int chart_index) const {
    auto in = with_env(chart_jets);
    return expr_partial(K_, std::span<const Jet<double>>(in), chart_index);
}

Jet<double> KawaMechStructure::second_partial_dir(std::span<const Jet<double>> chart_jets,
                                                  int chart_i, std::span<const double> w) const {
    auto in = with_env(chart_jets);
    std::vector<Jet<double>> extended;
    extended.reserve(in.size());
    for (std::size_t idx = 0; idx < in.size(); ++idx) {
        double seeds[2] = {idx < w.size() ? w[idx] : 0.0,
                           static_cast<int>(idx) == chart_i ? 1.0 : 0.0};
        extended.push_back(extend(in[idx], 2, 2, std::span<const double>(seeds, 2)));
    }
    auto r = K_.evaluate(std::span<const Jet<double>>(extended));
    return extract_partial(extract_partial(r));
}

std::vector<double> KawaMechStructure::gradient(std::span<const double> chart_point) const {
    std::vector<double> full(chart_point.begin(), chart_point.end());
    full.insert(full.end(), env_.begin(), env_.end());
    auto g = expr_gradient<double>(K_, full);
    g.resize(static_cast<std::size_t>(3 * n_));
    return g;
}

ZermeloReport check_zermelo(const KawaMechStructure& s, const SampleSpec& spec,
                            std::span<const double> lambdas, std::span<const double> rhos) {
    ZermeloReport rep;
    const int n = s.n();
    for (const auto& p : sample_points(spec)) {
        try {
            const double k = s.eval_point(p);
            for (double lam : lambdas) {
                if (!(lam > 0.0))
                    throw std::invalid_argument("check_zermelo: lambda must be positive");
                for (double rho : rhos) {
                    std::vector<double> scaled = p;
                    for (int i = 0; i < n; ++i) {
                        scaled[static_cast<std::size_t>(n + i)] = lam * p[static_cast<std::size_t>(n + i)];
                        scaled[static_cast<std::size_t>(2 * n + i)] =
                            lam * lam * p[static_cast<std::size_t>(2 * n + i)] +
                            rho * p[static_cast<std::size_t>(n + i)];
                    }
                    const double want = lam * k;
                    const double res = std::abs(s.eval_point(scaled) - want) /
                                       (std::abs(want) + kResidualGuard);
                    rep.res_scaling = std::max(rep.res_scaling, res);
                }
            }
            auto grad = s.gradient(p);
            double a = 0.0, b = 0.0;
            for (int i = 0; i < n; ++i) {
                a += grad[static_cast<std::size_t>(n + i)] * p[static_cast<std::size_t>(n + i)] +
                     2.0 * grad[static_cast<std::size_t>(2 * n + i)] *
                         p[static_cast<std::size_t>(2 * n + i)];
                b += grad[static_cast<std::size_t>(2 * n + i)] * p[static_cast<std::size_t>(n + i)];
            }
            rep.res_A = std::max(rep.res_A, std::abs(a - k) / (std::abs(k) + kResidualGuard));
            rep.res_B = std::max(rep.res_B, std::abs(b) / (std::abs(k) + kResidualGuard));
        } catch (const std::exception& err) {
            throw std::runtime_error(std::string("check_zermelo failed at sample ") +
                                     point_to_string(p) + ": " + err.what());
        }
    }
    return rep;
}

double zermelo_derived_residual(const KawaMechStructure& s, const SampleSpec& spec) {
    const int n = s.n();
    double worst = 0.0;
    auto layout = JetLayout::get(1, 0);
    for (const auto& p : sample_points(spec)) {
        std::vector<Jet<double>> chart;
        chart.reserve(p.size());
        for (double v : p) chart.emplace_back(layout, v);
        auto grad = s.gradient(p);
        const double scale = std::abs(s.eval_point(p)) + 1.0;
        std::vector<double> wz(static_cast<std::size_t>(3 * n), 0.0);   // y-values in z slots
        std::vector<double> wyz(static_cast<std::size_t>(3 * n), 0.0);  // (0, y, 2z)
        for (int i = 0; i < n; ++i) {
            wz[static_cast<std::size_t>(2 * n + i)] = p[static_cast<std::size_t>(n + i)];
            wyz[static_cast<std::size_t>(n + i)] = p[static_cast<std::size_t>(n + i)];
            wyz[static_cast<std::size_t>(2 * n + i)] = 2.0 * p[static_cast<std::size_t>(2 * n + i)];
        }
        for (int rho = 0; rho < n; ++rho) {
            // d/dx^rho of A:  K_xy y + 2 K_xz z = K_x
            double lhs = s.second_partial_dir(chart, rho, wyz).value();
            worst = std::max(worst, std::abs(lhs - grad[static_cast<std::size_t>(rho)]) / scale);
            // d/dy^rho of A:  K_yy y + 2 K_yz z = 0
            double lhs2 = s.second_partial_dir(chart, n + rho, wyz).value();
            worst = std::max(worst, std::abs(lhs2) / scale);
            // d/dy^rho of B:  K_yz y + K_z^rho = 0
            double lhs3 = s.second_partial_dir(chart, n + rho, wz).value();
            worst = std::max(
                worst, std::abs(lhs3 + grad[static_cast<std::size_t>(2 * n + rho)]) / scale);
            // d/dz^rho of B:  K_zz y = 0
            double lhs4 = s.second_partial_dir(chart, 2 * n + rho, wz).value();
            worst = std::max(worst, std::abs(lhs4) / scale);
        }
    }
    return worst;
}

DifferentialForm<double> fk_form(const KawaMechStructure& s) {
    const int n = s.n();
    DifferentialForm<double> form(3 * n, 1);
    for (int mu = 0; mu < n; ++mu) {
        form.add_term({mu}, [&s, n, mu](std::span<const Jet<double>> pt) {
            return s.partial(pt, n + mu);
        });
        form.add_term({n + mu}, [&s, n, mu](std::span<const Jet<double>> pt) {
            return s.partial(pt, 2 * n + mu) * 2.0;
        });
    }
    return form;
}

LengthResult2 fk_length(const KawaMechStructure& s, const Curve& c, const QuadratureSpec& q) {
    if (c.dim() != s.n()) throw std::invalid_argument("fk_length: curve dimension mismatch");
    auto rect = std::vector<std::pair<double, double>>{c.interval()};
    std::function<double(std::span<const double>)> density = [&](std::span<const double> t) {
        auto lift = second_lift_map(c)(t, 0);
        return s.eval(std::span<const Jet<double>>(lift)).value();
    };
    LengthResult2 out;
    auto direct = integrate_density<double>(density, rect, q);
    out.value = direct.value;
    out.levels = direct.levels;

    auto form = fk_form(s);
    auto lift = second_lift_map(c);
    auto via = integrate<double>(form, lift, rect, q);
    out.via_form = via.value;
    const double tol = 2.0 * q.refine_rtol * (std::abs(out.value) + 1.0);
    if (std::abs(out.value - out.via_form) > tol)
        throw std::runtime_error("fk_length: density and Kawaguchi-form routes disagree by " +
                                 std::to_string(std::abs(out.value - out.via_form)));
    return out;
}

std::vector<double> el2_residual(const KawaMechStructure& s, const Curve& c, double t) {
    const int n = s.n();
    if (c.dim() != n) throw std::invalid_argument("el2_residual: curve dimension mismatch");
    std::vector<double> tt = {t};
    auto chart = second_lift_map(c)(tt, 2);  // 3n jets, t-order 2
    std::vector<double> w(static_cast<std::size_t>(3 * n), 0.0);
    for (int i = 0; i < n; ++i) {
        w[static_cast<std::size_t>(n + i)] = chart[n + i].value();           // xdot
        w[static_cast<std::size_t>(2 * n + i)] = 2.0 * chart[2 * n + i].value();  // 2 xddot
    }
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int mu = 0; mu < n; ++mu) {
        double mixed = s.second_partial_dir(chart, mu, w).value();
        double ddt_y = s.partial(chart, n + mu).coeff(1);
        auto pz = s.partial(chart, 2 * n + mu);
        double d2dt2_z = 2.0 * pz.coeff(2);
        out[static_cast<std::size_t>(mu)] = mixed - ddt_y + d2dt2_z;
    }
    return out;
}

Noether2Current noether2_current(const KawaMechStructure& s,
                                 const std::vector<LagrangianExpr>& u) {
    const int n = s.n();
    if (static_cast<int>(u.size()) != n)
        throw std::invalid_argument("noether2_current: generator length must equal n");
    auto gen = std::make_shared<std::vector<LagrangianExpr>>(u);
    auto structure = &s;
    Noether2Current out;
    out.along = [structure, gen, n](const Curve& c, double t) {
        std::vector<double> tt = {t};
        auto chart = second_lift_map(c)(tt, 1);  // 3n jets, t-order 1
        // u^mu and du^mu/dt along the curve as t-jets
        std::vector<Jet<double>> xjets(chart.begin(), chart.begin() + n);
        double f = 0.0;
        for (int mu = 0; mu < n; ++mu) {
            auto uj = (*gen)[static_cast<std::size_t>(mu)].evaluate(
                std::span<const Jet<double>>(xjets));
            auto py = structure->partial(chart, n + mu);
            auto pz = structure->partial(chart, 2 * n + mu);
            // u dK/dy + 2 (Du) dK/dz - D3(u dK/dz), pulled back to d/dt
            f += uj.value() * py.value() + 2.0 * uj.coeff(1) * pz.value() -
                 (uj * pz).coeff(1);
        }
        return f;
    };
    return out;
}

KawaMechStructure lift2_conventional(const LagrangianExpr& L, int n_config,
                                     std::vector<double> env) {
    const int n = n_config;
    std::vector<std::string> chart;
    for (int i = 0; i <= n; ++i) chart.push_back("x" + std::to_string(i));
    for (int i = 0; i <= n; ++i) chart.push_back("y" + std::to_string(i));
    for (int i = 0; i <= n; ++i) chart.push_back("z" + std::to_string(i));
    const auto& lv = L.var_names();
    std::vector<std::string> const_names(lv.begin() + (1 + 3 * n), lv.end());
    std::vector<std::string> all = chart;
    all.insert(all.end(), const_names.begin(), const_names.end());

    std::map<std::string, std::string> repl;
    repl[lv[0]] = "x0";
    for (int i = 0; i < n; ++i) {
        const std::string xi = std::to_string(i + 1);
        repl[lv[static_cast<std::size_t>(1 + i)]] = "x" + xi;
        repl[lv[static_cast<std::size_t>(1 + n + i)]] = "(y" + xi + "/y0)";
        repl[lv[static_cast<std::size_t>(1 + 2 * n + i)]] =
            "((z" + xi + "*y0 - z0*y" + xi + ")/y0^3)";
    }
    auto core = L.substitute(repl, all);
    auto K = LagrangianExpr::parse("(" + core.print() + ")*y0", all, L.kind());

    SampleSpec adm;
    adm.seed = 20130625;
    adm.box.assign(static_cast<std::size_t>(3 * (n + 1)), {-2.0, 2.0});
    adm.exclusion_name = "y0_nonzero";
    adm.exclusion = away_from_zero({n + 1});
    return KawaMechStructure(n + 1, std::move(K), std::move(env), std::move(adm));
}

DifferentialForm<double> theta_k_restrict(const KawaMechStructure& s) {
    const int n = s.n() - 1;
    if (n < 1) throw std::invalid_argument("theta_k_restrict needs a lifted structure (n >= 2)");
    const int dim = 3 * n + 1;  // (t, q^i, qdot^i, qddot^i)
    auto structure = &s;
    auto include = [structure, n](std::span<const Jet<double>> pt) {
        auto layout = pt[0].layout_ptr();
        std::vector<Jet<double>> chart;
        chart.reserve(static_cast<std::size_t>(3 * (n + 1)));
        chart.push_back(pt[0]);                                          // x0 = t
        for (int i = 0; i < n; ++i) chart.push_back(pt[1 + i]);          // x^i = q^i
        chart.emplace_back(layout, 1.0);                                 // y0 = 1
        for (int i = 0; i < n; ++i) chart.push_back(pt[1 + n + i]);      // y^i = qdot^i
        chart.emplace_back(layout, 0.0);                                 // z0 = 0
        for (int i = 0; i < n; ++i) chart.push_back(pt[1 + 2 * n + i]);  // z^i = qddot^i
        (void)structure;
        return chart;
    };
    DifferentialForm<double> theta(dim, 1);
    theta.add_term({0}, [structure, include, n](std::span<const Jet<double>> pt) {
        auto chart = include(pt);
        auto val = structure->eval(chart);
        for (int i = 0; i < n; ++i) {
            val -= structure->partial(chart, (n + 1) + 1 + i) * pt[1 + n + i];
            val -= structure->partial(chart, 2 * (n + 1) + 1 + i) * pt[1 + 2 * n + i] * 2.0;
        }
        return val;
    });
    for (int i = 0; i < n; ++i) {
        theta.add_term({1 + i}, [structure, include, n, i](std::span<const Jet<double>> pt) {
            auto chart = include(pt);
            return structure->partial(chart, (n + 1) + 1 + i);
        });
        theta.add_term({1 + n + i}, [structure, include, n, i](std::span<const Jet<double>> pt) {
            auto chart = include(pt);
            return structure->partial(chart, 2 * (n + 1) + 1 + i) * 2.0;
        });
    }
    return theta;
}

double first_variation2(const KawaMechStructure& s, const Curve& c,
                        const std::vector<LagrangianExpr>& xi, const QuadratureSpec& q) {
    const int n = s.n();
    if (static_cast<int>(xi.size()) != n)
        throw std::invalid_argument("first_variation2: xi must have n components");
    auto rect = std::vector<std::pair<double, double>>{c.interval()};
    std::function<double(std::span<const double>)> density = [&](std::span<const double> t) {
        auto base = c.components(t[0], 3);  // t-jets of order 3
        std::vector<Jet<double>> x2;
        x2.reserve(static_cast<std::size_t>(n));
        for (const auto& xj : base) x2.push_back(extend(xj, 1, 0));  // (t, s) order 3
        std::vector<Jet<double>> xvals(x2.begin(), x2.end());
        auto layout = x2[0].layout_ptr();
        Jet<double> sj(layout, 0.0);
        MultiDegree es{};
        es[1] = 1;
        sj.coeff(layout->rank_of(es)) = 1.0;
        std::vector<Jet<double>> deformed;
        deformed.reserve(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            auto xiv = xi[static_cast<std::size_t>(i)].evaluate(
                std::span<const Jet<double>>(xvals));
            deformed.push_back(x2[static_cast<std::size_t>(i)] + sj * xiv);
        }
        std::vector<Jet<double>> chart;
        chart.reserve(static_cast<std::size_t>(3 * n));
        for (const auto& xj : deformed) chart.push_back(truncate(xj, 1));
        for (const auto& xj : deformed) chart.push_back(truncate(param_shift(xj, 0), 1));
        for (const auto& xj : deformed) chart.push_back(param_shift(param_shift(xj, 0), 0));
        auto f = s.eval(chart);
        MultiDegree ds{};
        ds[1] = 1;
        return f.derivative(ds);
    };
    return integrate_density<double>(density, rect, q).value;
}

}  // namespace varik
