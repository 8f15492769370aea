#include "varik/kawafield.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace varik {

namespace {
constexpr double kResidualGuard = 1e-300;

template <typename S>
Jet<S> jet_det(const std::vector<std::vector<Jet<S>>>& m) {
    const int k = static_cast<int>(m.size());
    if (k == 1) return m[0][0];
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    Jet<S> det = Jet<S>::constant(m[0][0].params(), m[0][0].order(), S(0));
    do {
        auto sorted = perm;
        int sign = multi_index::sort_sign(sorted);
        Jet<S> prod = m[0][static_cast<std::size_t>(perm[0])];
        for (int r = 1; r < k; ++r) prod = prod * m[static_cast<std::size_t>(r)][static_cast<std::size_t>(perm[r])];
        if (sign > 0)
            det += prod;
        else
            det -= prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

template <typename S>
std::vector<S> to_scalar_point(const std::vector<double>& raw, int chart_dim) {
    std::vector<S> out(static_cast<std::size_t>(chart_dim));
    if constexpr (detail::is_complex<S>::value) {
        if (static_cast<int>(raw.size()) == 2 * chart_dim) {
            for (int i = 0; i < chart_dim; ++i)
                out[static_cast<std::size_t>(i)] =
                    S(raw[static_cast<std::size_t>(i)], raw[static_cast<std::size_t>(chart_dim + i)]);
            return out;
        }
    }
    if (static_cast<int>(raw.size()) != chart_dim)
        throw std::invalid_argument("sample box size must match the chart dimension");
    for (int i = 0; i < chart_dim; ++i) out[static_cast<std::size_t>(i)] = S(raw[static_cast<std::size_t>(i)]);
    return out;
}

}  // namespace

template <typename S>
ArealStructureT<S>::ArealStructureT(int n, int k, LagrangianExpr K, std::vector<S> env,
                                    SampleSpec admissible, int gauge_block)
    : n_(n), k_(k), blocks_(multi_index::all_ordered(n, k)), K_(std::move(K)),
      env_(std::move(env)), admissible_(std::move(admissible)), gauge_block_(gauge_block) {
    if (k_ < 1 || k_ > n_) throw std::invalid_argument("ArealStructure: need 1 <= k <= n");
    if (static_cast<std::size_t>(chart_dim()) + env_.size() != K_.var_names().size())
        throw std::invalid_argument(
            "ArealStructure: K must use n + C(n,k) chart coordinates plus bound constants");
    if (gauge_block_ < 0 || gauge_block_ >= blocks())
        throw std::invalid_argument("ArealStructure: gauge block out of range");
    if (admissible_.box.empty()) {
        admissible_.box.assign(static_cast<std::size_t>(chart_dim()), {-2.0, 2.0});
        admissible_.exclusion_name = "ygauge_nonzero";
        admissible_.exclusion = away_from_zero({n_ + gauge_block_});
    }
}

template <typename S>
std::vector<std::string> ArealStructureT<S>::chart_names(int n, int k) {
    std::vector<std::string> names;
    for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
    for (const auto& I : multi_index::all_ordered(n, k)) {
        std::string y = "y";
        for (int v : I) y += std::to_string(v + 1);
        names.push_back(y);
    }
    return names;
}

template <typename S>
std::vector<Jet<S>> ArealStructureT<S>::with_env(std::span<const Jet<S>> chart_jets) const {
    if (static_cast<int>(chart_jets.size()) != chart_dim())
        throw std::invalid_argument("ArealStructure: chart jet count mismatch");
    std::vector<Jet<S>> in(chart_jets.begin(), chart_jets.end());
    auto layout = chart_jets[0].layout_ptr();
    for (const S& v : env_) in.emplace_back(layout, v);
    return in;
}

template <typename S>
Jet<S> ArealStructureT<S>::eval(std::span<const Jet<S>> chart_jets) const {
    auto in = with_env(chart_jets);
    return K_.evaluate(std::span<const Jet<S>>(in));
}

template <typename S>
S ArealStructureT<S>::eval_point(std::span<const S> chart_point) const {
    auto layout = JetLayout::get(1, 0);
    std::vector<Jet<S>> jets;
    jets.reserve(chart_point.size());
    for (const S& v : chart_point) jets.emplace_back(layout, v);
    return eval(jets).value();
}

template <typename S>
Jet<S> ArealStructureT<S>::partial(std::span<const Jet<S>> chart_jets, int chart_index) const {
    auto in = with_env(chart_jets);
    return expr_partial(K_, std::span<const Jet<S>>(in), chart_index);
}

template <typename S>
Jet<S> ArealStructureT<S>::second_partial_dir(std::span<const Jet<S>> chart_jets, int chart_i,
                                              std::span<const S> w) const {
    auto in = with_env(chart_jets);
    std::vector<Jet<S>> extended;
    extended.reserve(in.size());
    for (std::size_t idx = 0; idx < in.size(); ++idx) {
        S seeds[2] = {idx < w.size() ? w[idx] : S(0), static_cast<int>(idx) == chart_i ? S(1) : S(0)};
        extended.push_back(extend(in[idx], 2, 2, std::span<const S>(seeds, 2)));
    }
    auto r = K_.evaluate(std::span<const Jet<S>>(extended));
    return extract_partial(extract_partial(r));
}

template <typename S>
std::vector<S> ArealStructureT<S>::gradient(std::span<const S> chart_point) const {
    std::vector<S> full(chart_point.begin(), chart_point.end());
    full.insert(full.end(), env_.begin(), env_.end());
    auto g = expr_gradient<S>(K_, full);
    g.resize(static_cast<std::size_t>(chart_dim()));
    return g;
}

template class ArealStructureT<double>;
template class ArealStructureT<std::complex<double>>;

template <typename S>
std::vector<Jet<S>> lift_field_jets(const PatchT<S>& p, std::span<const double> t, int order) {
    const int n = p.dim();
    const int k = p.params();
    auto xj = p.components(t, order + 1);
    std::vector<Jet<S>> out;
    out.reserve(static_cast<std::size_t>(n) + multi_index::binomial(n, k));
    for (const auto& x : xj) out.push_back(truncate(x, order));
    // d(x^mu)/dt^a as jets of the retained order
    std::vector<std::vector<Jet<S>>> d(static_cast<std::size_t>(n));
    for (int mu = 0; mu < n; ++mu) {
        d[static_cast<std::size_t>(mu)].reserve(static_cast<std::size_t>(k));
        for (int a = 0; a < k; ++a)
            d[static_cast<std::size_t>(mu)].push_back(param_shift(xj[static_cast<std::size_t>(mu)], a));
    }
    for (const auto& I : multi_index::all_ordered(n, k)) {
        std::vector<std::vector<Jet<S>>> rows;
        rows.reserve(static_cast<std::size_t>(k));
        for (int r = 0; r < k; ++r) rows.push_back(d[static_cast<std::size_t>(I[static_cast<std::size_t>(r)])]);
        out.push_back(jet_det(rows));
    }
    return out;
}

template std::vector<Jet<double>> lift_field_jets<double>(const PatchT<double>&,
                                                          std::span<const double>, int);
template std::vector<Jet<std::complex<double>>> lift_field_jets<std::complex<double>>(
    const PatchT<std::complex<double>>&, std::span<const double>, int);

template <typename S>
std::vector<S> lift_field(const PatchT<S>& p, std::span<const double> t) {
    auto jets = lift_field_jets(p, t, 0);
    std::vector<S> out(jets.size());
    for (std::size_t i = 0; i < jets.size(); ++i) out[i] = jets[i].value();
    return out;
}

template std::vector<double> lift_field<double>(const PatchT<double>&, std::span<const double>);
template std::vector<std::complex<double>> lift_field<std::complex<double>>(
    const PatchT<std::complex<double>>&, std::span<const double>);

template <typename S>
PatchMap<S> field_lift_map(const PatchT<S>& p) {
    return [&p](std::span<const double> t, int order) { return lift_field_jets(p, t, order); };
}

template PatchMap<double> field_lift_map<double>(const PatchT<double>&);
template PatchMap<std::complex<double>> field_lift_map<std::complex<double>>(
    const PatchT<std::complex<double>>&);

template <typename S>
FieldHomogeneityReport check_homogeneity_field(const ArealStructureT<S>& s,
                                               const SampleSpec& spec,
                                               std::span<const double> lambdas) {
    FieldHomogeneityReport rep;
    const int m = s.chart_dim();
    const int n = s.n();
    for (const auto& raw : sample_points(spec)) {
        auto pt = to_scalar_point<S>(raw, m);
        const S f = s.eval_point(pt);
        for (double lam : lambdas) {
            if (!(lam > 0.0))
                throw std::invalid_argument("check_homogeneity_field: lambda must be positive");
            std::vector<S> scaled = pt;
            for (int b = 0; b < s.blocks(); ++b)
                scaled[static_cast<std::size_t>(n + b)] *= S(lam);
            const S want = S(lam) * f;
            const double res =
                std::abs(s.eval_point(scaled) - want) / (std::abs(want) + kResidualGuard);
            rep.max_rel_residual_scaling = std::max(rep.max_rel_residual_scaling, res);
        }
        auto grad = s.gradient(pt);
        S euler(0);
        for (int b = 0; b < s.blocks(); ++b)
            euler += grad[static_cast<std::size_t>(n + b)] * pt[static_cast<std::size_t>(n + b)];
        const double res = std::abs(euler - f) / (std::abs(f) + kResidualGuard);
        rep.max_rel_residual_euler = std::max(rep.max_rel_residual_euler, res);
    }
    return rep;
}

template FieldHomogeneityReport check_homogeneity_field<double>(const ArealStructureT<double>&,
                                                                const SampleSpec&,
                                                                std::span<const double>);
template FieldHomogeneityReport check_homogeneity_field<std::complex<double>>(
    const ArealStructureT<std::complex<double>>&, const SampleSpec&, std::span<const double>);

template <typename S>
DifferentialForm<S> kawaguchi_k_form(const ArealStructureT<S>& s) {
    DifferentialForm<S> form(s.chart_dim(), s.k());
    for (int b = 0; b < s.blocks(); ++b) {
        form.add_term(s.block(b), [&s, b](std::span<const Jet<S>> pt) {
            return s.partial(pt, s.block_axis(b));
        });
    }
    return form;
}

template DifferentialForm<double> kawaguchi_k_form<double>(const ArealStructureT<double>&);
template DifferentialForm<std::complex<double>> kawaguchi_k_form<std::complex<double>>(
    const ArealStructureT<std::complex<double>>&);

template <typename S>
AreaResult<S> kawaguchi_area(const ArealStructureT<S>& s, const PatchT<S>& p,
                             const QuadratureSpec& q) {
    if (p.dim() != s.n() || p.params() != s.k())
        throw std::invalid_argument("kawaguchi_area: patch signature mismatch");
    auto rect = p.rect();
    std::function<S(std::span<const double>)> density = [&](std::span<const double> t) {
        auto lift = lift_field_jets(p, t, 0);
        return s.eval(std::span<const Jet<S>>(lift)).value();
    };
    AreaResult<S> out;
    auto direct = integrate_density<S>(density, rect, q);
    out.value = direct.value;
    out.levels = direct.levels;

    std::function<double(std::span<const double>)> orientation;
    if constexpr (!detail::is_complex<S>::value) {
        orientation = [&s, &p](std::span<const double> t) {
            auto lift = lift_field_jets(p, t, 0);
            return lift[static_cast<std::size_t>(s.n() + s.gauge_block())].value();
        };
    }
    auto form = kawaguchi_k_form(s);
    auto via = integrate<S>(form, field_lift_map(p), rect, q, orientation);
    out.via_form = via.value;
    const double tol = 2.0 * q.refine_rtol * (std::abs(out.value) + 1.0);
    if (std::abs(out.value - out.via_form) > tol)
        throw std::runtime_error("kawaguchi_area: density and k-form routes disagree");
    return out;
}

template AreaResult<double> kawaguchi_area<double>(const ArealStructureT<double>&,
                                                   const PatchT<double>&, const QuadratureSpec&);
template AreaResult<std::complex<double>> kawaguchi_area<std::complex<double>>(
    const ArealStructureT<std::complex<double>>&, const PatchT<std::complex<double>>&,
    const QuadratureSpec&);

template <typename S>
DifferentialForm<S> el_field_component_form(const ArealStructureT<S>& s, int mu) {
    const int n = s.n();
    const int k = s.k();
    const int m = s.chart_dim();
    DifferentialForm<S> form(m, k);
    // sum over ordered I: (d2K/dx^mu dy^I) dx^I
    for (int b = 0; b < s.blocks(); ++b) {
        const int axis = s.block_axis(b);
        form.add_term(s.block(b), [&s, mu, axis](std::span<const Jet<S>> pt) {
            std::vector<S> w(static_cast<std::size_t>(s.chart_dim()), S(0));
            w[static_cast<std::size_t>(axis)] = S(1);
            return s.second_partial_dir(pt, mu, w);
        });
    }
    // minus sum over ordered (k-1)-subsets J not containing mu:
    //   sign(mu into J) d(dK/dy^{mu u J}) ^ dx^J
    for (const auto& J : multi_index::all_ordered(n, k - 1)) {
        if (std::find(J.begin(), J.end(), mu) != J.end()) continue;
        std::vector<int> full;
        int sign = multi_index::insert_sign(mu, J, full);
        if (sign == 0) continue;
        const int axis = n + static_cast<int>(multi_index::lex_rank(full, n));
        DifferentialForm<S> g(m, 0);
        g.add_term({}, [&s, axis](std::span<const Jet<S>> pt) { return s.partial(pt, axis); });
        DifferentialForm<S> dxJ(m, k - 1);
        if (k - 1 == 0) {
            dxJ.add_term({}, [](std::span<const Jet<S>> pt) {
                return Jet<S>(pt[0].layout_ptr(), S(1));
            });
        } else {
            dxJ.add_term(J, [](std::span<const Jet<S>> pt) {
                return Jet<S>(pt[0].layout_ptr(), S(1));
            });
        }
        auto piece = g.exterior_derivative().wedge(dxJ);
        for (const auto& [key, fn] : piece.coefficients()) form.add_term(key, fn, -double(sign));
    }
    return form;
}

template DifferentialForm<double> el_field_component_form<double>(const ArealStructureT<double>&,
                                                                  int);
template DifferentialForm<std::complex<double>> el_field_component_form<std::complex<double>>(
    const ArealStructureT<std::complex<double>>&, int);

template <typename S>
std::vector<S> el_field_residual(const ArealStructureT<S>& s, const PatchT<S>& p,
                                 std::span<const double> t) {
    if (p.dim() != s.n() || p.params() != s.k())
        throw std::invalid_argument("el_field_residual: patch signature mismatch");
    auto chart = lift_field_jets(p, t, 1);
    std::vector<S> out(static_cast<std::size_t>(s.n()));
    for (int mu = 0; mu < s.n(); ++mu) {
        auto form = el_field_component_form(s, mu);
        out[static_cast<std::size_t>(mu)] =
            form.pullback_density(std::span<const Jet<S>>(chart));
    }
    return out;
}

template std::vector<double> el_field_residual<double>(const ArealStructureT<double>&,
                                                       const PatchT<double>&,
                                                       std::span<const double>);
template std::vector<std::complex<double>> el_field_residual<std::complex<double>>(
    const ArealStructureT<std::complex<double>>&, const PatchT<std::complex<double>>&,
    std::span<const double>);

// The global (k+1)-form, built from its displayed coordinate expression
//   sum over ordered I of [ (d2K/dx^mu dy^I) dx^mu + d(dK/dy^I) ] ^ dx^I ;
// this is the version entering the dK relation. (Contracting dx^mu with the
// per-equation forms EL_mu reproduces the exact part with an extra factor k,
// so it is not used here.)
template <typename S>
DifferentialForm<S> el_field_form(const ArealStructureT<S>& s) {
    const int m = s.chart_dim();
    DifferentialForm<S> total(m, s.k() + 1);
    for (int b = 0; b < s.blocks(); ++b) {
        const int axis = s.block_axis(b);
        for (int mu = 0; mu < s.n(); ++mu) {
            std::vector<int> merged;
            merged.push_back(mu);
            merged.insert(merged.end(), s.block(b).begin(), s.block(b).end());
            total.add_term(std::move(merged), [&s, mu, axis](std::span<const Jet<S>> pt) {
                std::vector<S> w(static_cast<std::size_t>(s.chart_dim()), S(0));
                w[static_cast<std::size_t>(axis)] = S(1);
                return s.second_partial_dir(pt, mu, w);
            });
        }
        DifferentialForm<S> g(m, 0);
        g.add_term({}, [&s, axis](std::span<const Jet<S>> pt) { return s.partial(pt, axis); });
        DifferentialForm<S> dxI(m, s.k());
        dxI.add_term(s.block(b), [](std::span<const Jet<S>> pt) {
            return Jet<S>(pt[0].layout_ptr(), S(1));
        });
        auto piece = g.exterior_derivative().wedge(dxI);
        for (const auto& [key, fn] : piece.coefficients()) total.add_term(key, fn);
    }
    return total;
}

template DifferentialForm<double> el_field_form<double>(const ArealStructureT<double>&);
template DifferentialForm<std::complex<double>> el_field_form<std::complex<double>>(
    const ArealStructureT<std::complex<double>>&);

template <typename S>
DifferentialForm<S> noether_field_current(const ArealStructureT<S>& s,
                                          const std::vector<LagrangianExpr>& u) {
    const int n = s.n();
    const int k = s.k();
    if (static_cast<int>(u.size()) != n)
        throw std::invalid_argument("noether_field_current: generator length must equal n");
    auto gen = std::make_shared<std::vector<LagrangianExpr>>(u);
    DifferentialForm<S> form(s.chart_dim(), k - 1);
    for (const auto& J : multi_index::all_ordered(n, k - 1)) {
        auto coeff = [&s, gen, J, n](std::span<const Jet<S>> pt) {
            std::vector<Jet<S>> xjets(pt.begin(), pt.begin() + n);
            Jet<S> acc(pt[0].layout_ptr(), S(0));
            for (int rho = 0; rho < n; ++rho) {
                std::vector<int> full;
                int sign = multi_index::insert_sign(rho, J, full);
                if (sign == 0) continue;
                const int axis = n + static_cast<int>(multi_index::lex_rank(full, n));
                auto uval = (*gen)[static_cast<std::size_t>(rho)].evaluate(
                    std::span<const Jet<S>>(xjets));
                acc += s.partial(pt, axis) * uval * S(double(sign));
            }
            return acc;
        };
        if (k - 1 == 0)
            form.add_term({}, coeff);
        else
            form.add_term(J, coeff);
    }
    return form;
}

template DifferentialForm<double> noether_field_current<double>(
    const ArealStructureT<double>&, const std::vector<LagrangianExpr>&);
template DifferentialForm<std::complex<double>> noether_field_current<std::complex<double>>(
    const ArealStructureT<std::complex<double>>&, const std::vector<LagrangianExpr>&);

template <typename S>
ArealStructureT<S> lift_field_conventional(const LagrangianExpr& L, int k, int m_fields,
                                           std::vector<S> env) {
    const int n = k + m_fields;
    auto chart = ArealStructureT<S>::chart_names(n, k);
    const auto& lv = L.var_names();
    const std::size_t expected = static_cast<std::size_t>(k + m_fields + m_fields * k);
    if (lv.size() < expected)
        throw std::invalid_argument("lift_field_conventional: L has too few variables");
    std::vector<std::string> const_names(lv.begin() + expected, lv.end());
    std::vector<std::string> all = chart;
    all.insert(all.end(), const_names.begin(), const_names.end());

    std::string gauge = "y";
    for (int a = 1; a <= k; ++a) gauge += std::to_string(a);

    std::map<std::string, std::string> repl;
    for (int a = 0; a < k; ++a) repl[lv[static_cast<std::size_t>(a)]] = "x" + std::to_string(a + 1);
    for (int i = 0; i < m_fields; ++i)
        repl[lv[static_cast<std::size_t>(k + i)]] = "x" + std::to_string(k + 1 + i);
    // q^i_a -> sign * y^{(1..a-1, a+1..k, i) sorted} / gauge, sign = (-1)^(k-a)
    for (int i = 0; i < m_fields; ++i) {
        for (int a = 1; a <= k; ++a) {
            std::vector<int> tuple;
            for (int b = 1; b <= k; ++b)
                if (b != a) tuple.push_back(b - 1);
            tuple.push_back(k + i);  // 0-based axis of x^{k+1+i}
            std::sort(tuple.begin(), tuple.end());
            std::string y = "y";
            for (int v : tuple) y += std::to_string(v + 1);
            const bool negative = ((k - a) % 2) == 1;
            std::string expr = std::string(negative ? "(0 - " : "(") + y + "/" + gauge + ")";
            repl[lv[static_cast<std::size_t>(k + m_fields + i * k + (a - 1))]] = expr;
        }
    }
    auto core = L.substitute(repl, all);
    auto K = LagrangianExpr::parse("(" + core.print() + ")*" + gauge, all, L.kind());

    SampleSpec adm;
    adm.seed = 20130625;
    const int gauge_block = 0;  // (1,...,k) is lexicographically first
    const int chart_dim = n + static_cast<int>(multi_index::binomial(n, k));
    if constexpr (detail::is_complex<S>::value) {
        adm.box.assign(static_cast<std::size_t>(2 * chart_dim), {-2.0, 2.0});
        adm.exclusion_name = "ygauge_nonzero";
        adm.exclusion = [n, chart_dim](const std::vector<double>& p) {
            double re = p[static_cast<std::size_t>(n)];
            double im = p[static_cast<std::size_t>(chart_dim + n)];
            return std::sqrt(re * re + im * im) >= 1e-3;
        };
    } else {
        adm.box.assign(static_cast<std::size_t>(chart_dim), {-2.0, 2.0});
        adm.exclusion_name = "ygauge_nonzero";
        adm.exclusion = away_from_zero({n});
    }
    return ArealStructureT<S>(n, k, std::move(K), std::move(env), std::move(adm), gauge_block);
}

template ArealStructureT<double> lift_field_conventional<double>(const LagrangianExpr&, int, int,
                                                                 std::vector<double>);
template ArealStructureT<std::complex<double>> lift_field_conventional<std::complex<double>>(
    const LagrangianExpr&, int, int, std::vector<std::complex<double>>);

}  // namespace varik
