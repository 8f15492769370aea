#include "varik/kawafield2.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace varik {

namespace {
constexpr double kResidualGuard = 1e-300;

Jet<double> jet_det(const std::vector<std::vector<Jet<double>>>& m) {
    const int k = static_cast<int>(m.size());
    if (k == 1) return m[0][0];
    std::vector<int> perm(static_cast<std::size_t>(k));
    std::iota(perm.begin(), perm.end(), 0);
    Jet<double> det = Jet<double>::constant(m[0][0].params(), m[0][0].order(), 0.0);
    do {
        auto sorted = perm;
        int sign = multi_index::sort_sign(sorted);
        Jet<double> prod = m[0][static_cast<std::size_t>(perm[0])];
        for (int r = 1; r < k; ++r)
            prod = prod * m[static_cast<std::size_t>(r)][static_cast<std::size_t>(perm[r])];
        if (sign > 0)
            det += prod;
        else
            det -= prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return det;
}

// sign of inserting block id b back into the sorted list `rest`
int block_insert_sign(int b, std::span<const int> rest) {
    std::vector<int> merged;
    return multi_index::insert_sign(b, rest, merged);
}

}  // namespace

std::vector<ZSlot> Areal2Structure::enumerate_slots(int n, int k) {
    const int nb = static_cast<int>(multi_index::binomial(n, k));
    std::vector<ZSlot> out;
    for (int level = 1; level <= k; ++level) {
        auto block_sets = multi_index::all_ordered(nb, level);
        auto residuals = multi_index::all_ordered(n, k - level);
        for (const auto& bs : block_sets) {
            for (const auto& r : residuals) {
                ZSlot s;
                s.blocks = bs;
                s.residual = r;
                out.push_back(std::move(s));
            }
        }
    }
    return out;
}

std::vector<std::string> Areal2Structure::chart_names(int n, int k) {
    std::vector<std::string> names;
    for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
    auto blocks = multi_index::all_ordered(n, k);
    auto block_name = [&](int b) {
        std::string s;
        for (int v : blocks[static_cast<std::size_t>(b)]) s += std::to_string(v + 1);
        return s;
    };
    for (int b = 0; b < static_cast<int>(blocks.size()); ++b) names.push_back("y" + block_name(b));
    for (const auto& slot : enumerate_slots(n, k)) {
        std::string s = "z";
        for (std::size_t j = 0; j < slot.blocks.size(); ++j)
            s += (j ? "_" : "") + block_name(slot.blocks[j]);
        if (!slot.residual.empty()) {
            s += "_";
            for (int v : slot.residual) s += std::to_string(v + 1);
        }
        names.push_back(s);
    }
    return names;
}

Areal2Structure::Areal2Structure(int n, int k, LagrangianExpr K, std::vector<double> env,
                                 SampleSpec admissible, int gauge_block)
    : n_(n), k_(k), y_blocks_(multi_index::all_ordered(n, k)), slots_(enumerate_slots(n, k)),
      K_(std::move(K)), env_(std::move(env)), admissible_(std::move(admissible)),
      gauge_block_(gauge_block) {
    if (k_ < 1 || k_ > n_) throw std::invalid_argument("Areal2Structure: need 1 <= k <= n");
    if (static_cast<std::size_t>(chart_dim()) + env_.size() != K_.var_names().size())
        throw std::invalid_argument(
            "Areal2Structure: K variable count does not match the chart plus constants");
    if (admissible_.box.empty()) {
        admissible_.box.assign(static_cast<std::size_t>(chart_dim()), {-2.0, 2.0});
        admissible_.exclusion_name = "ygauge_nonzero";
        admissible_.exclusion = away_from_zero({n_ + gauge_block_});
    }
}

std::vector<Jet<double>> Areal2Structure::with_env(std::span<const Jet<double>> chart_jets) const {
    if (static_cast<int>(chart_jets.size()) != chart_dim())
        throw std::invalid_argument("Areal2Structure: chart jet count mismatch");
    std::vector<Jet<double>> in(chart_jets.begin(), chart_jets.end());
    auto layout = chart_jets[0].layout_ptr();
    for (double v : env_) in.emplace_back(layout, v);
    return in;
}

Jet<double> Areal2Structure::eval(std::span<const Jet<double>> chart_jets) const {
    auto in = with_env(chart_jets);
    return K_.evaluate(std::span<const Jet<double>>(in));
}

double Areal2Structure::eval_point(std::span<const double> chart_point) const {
    auto layout = JetLayout::get(1, 0);
    std::vector<Jet<double>> jets;
    jets.reserve(chart_point.size());
    for (double v : chart_point) jets.emplace_back(layout, v);
    return eval(jets).value();
}

Jet<double> Areal2Structure::partial(std::span<const Jet<double>> chart_jets,
                                     int chart_index) const {
    auto in = with_env(chart_jets);
    return expr_partial(K_, std::span<const Jet<double>>(in), chart_index);
}

std::vector<double> Areal2Structure::gradient(std::span<const double> chart_point) const {
    std::vector<double> full(chart_point.begin(), chart_point.end());
    full.insert(full.end(), env_.begin(), env_.end());
    auto g = expr_gradient<double>(K_, full);
    g.resize(static_cast<std::size_t>(chart_dim()));
    return g;
}

std::vector<Jet<double>> lift2_field_jets(const Patch& p, std::span<const double> t, int order,
                                          int n, int k) {
    if (p.dim() != n || p.params() != k)
        throw std::invalid_argument("lift2_field_jets: patch signature mismatch");
    auto xj = p.components(t, order + 2);
    std::vector<Jet<double>> out;
    // x components
    for (const auto& x : xj) out.push_back(truncate(x, order));
    // first derivatives d(x^mu)/dt^a at order+1
    std::vector<std::vector<Jet<double>>> dx(static_cast<std::size_t>(n));
    for (int mu = 0; mu < n; ++mu)
        for (int a = 0; a < k; ++a)
            dx[static_cast<std::size_t>(mu)].push_back(param_shift(xj[static_cast<std::size_t>(mu)], a));
    // minor fields y^I as jets of order+1
    auto blocks = multi_index::all_ordered(n, k);
    std::vector<Jet<double>> minors;
    minors.reserve(blocks.size());
    for (const auto& I : blocks) {
        std::vector<std::vector<Jet<double>>> rows;
        for (int r = 0; r < k; ++r) rows.push_back(dx[static_cast<std::size_t>(I[static_cast<std::size_t>(r)])]);
        minors.push_back(jet_det(rows));
    }
    for (const auto& mj : minors) out.push_back(truncate(mj, order));
    // z slots: dets over rows of t-derivatives of (minor fields | x fields)
    for (const auto& slot : Areal2Structure::enumerate_slots(n, k)) {
        std::vector<std::vector<Jet<double>>> rows;
        for (int b : slot.blocks) {
            std::vector<Jet<double>> row;
            for (int a = 0; a < k; ++a)
                row.push_back(truncate(param_shift(minors[static_cast<std::size_t>(b)], a), order));
            rows.push_back(std::move(row));
        }
        for (int nu : slot.residual) {
            std::vector<Jet<double>> row;
            for (int a = 0; a < k; ++a)
                row.push_back(truncate(dx[static_cast<std::size_t>(nu)][static_cast<std::size_t>(a)], order));
            rows.push_back(std::move(row));
        }
        out.push_back(jet_det(rows));
    }
    return out;
}

std::vector<double> lift2_field(const Areal2Structure& s, const Patch& p,
                                std::span<const double> t) {
    auto jets = lift2_field_jets(p, t, 0, s.n(), s.k());
    std::vector<double> out(jets.size());
    for (std::size_t i = 0; i < jets.size(); ++i) out[i] = jets[i].value();
    return out;
}

PatchMap<double> field2_lift_map(const Areal2Structure& s, const Patch& p) {
    const int n = s.n(), k = s.k();
    return [&p, n, k](std::span<const double> t, int order) {
        return lift2_field_jets(p, t, order, n, k);
    };
}

Homogeneity2Report check_homogeneity_field2(const Areal2Structure& s, const SampleSpec& spec,
                                            std::span<const double> lambdas, int constant_draws,
                                            double constant_scale) {
    Homogeneity2Report rep;
    const int n = s.n();
    const int nb = s.blocks();
    // index of each slot's residual key for the constant assignment: key =
    // (blocks minus one, residual); enumerate keys on the fly via a map
    std::map<std::pair<std::vector<int>, std::vector<int>>, int> residual_keys;
    for (int si = 0; si < s.zslots(); ++si) {
        const auto& slot = s.zslot(si);
        for (std::size_t j = 0; j < slot.blocks.size(); ++j) {
            std::vector<int> rest = slot.blocks;
            rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(j));
            auto key = std::make_pair(rest, slot.residual);
            if (!residual_keys.count(key))
                residual_keys.emplace(key, static_cast<int>(residual_keys.size()));
        }
    }
    std::mt19937_64 rng(spec.seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> unif(-constant_scale, constant_scale);

    for (const auto& p : sample_points(spec)) {
        const double kval = s.eval_point(p);
        for (double lam : lambdas) {
            if (!(lam > 0.0))
                throw std::invalid_argument("check_homogeneity_field2: lambda must be positive");
            for (int draw = 0; draw < constant_draws; ++draw) {
                std::vector<double> c(residual_keys.size());
                for (auto& v : c) v = (draw == 0) ? 0.0 : unif(rng);
                std::vector<double> scaled = p;
                for (int b = 0; b < nb; ++b) scaled[static_cast<std::size_t>(n + b)] *= lam;
                for (int si = 0; si < s.zslots(); ++si) {
                    const auto& slot = s.zslot(si);
                    const int l = slot.level();
                    double v = std::pow(lam, l + 1) * p[static_cast<std::size_t>(s.z_axis(si))];
                    for (std::size_t j = 0; j < slot.blocks.size(); ++j) {
                        std::vector<int> rest = slot.blocks;
                        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(j));
                        int sign = block_insert_sign(slot.blocks[j], rest);
                        int key = residual_keys.at(std::make_pair(rest, slot.residual));
                        v += sign * c[static_cast<std::size_t>(key)] *
                             p[static_cast<std::size_t>(n + slot.blocks[j])];
                    }
                    scaled[static_cast<std::size_t>(s.z_axis(si))] = v;
                }
                const double want = lam * kval;
                const double res =
                    std::abs(s.eval_point(scaled) - want) / (std::abs(want) + kResidualGuard);
                rep.res_scaling = std::max(rep.res_scaling, res);
            }
        }
        auto grad = s.gradient(p);
        double euler = 0.0;
        for (int b = 0; b < nb; ++b)
            euler += grad[static_cast<std::size_t>(n + b)] * p[static_cast<std::size_t>(n + b)];
        for (int si = 0; si < s.zslots(); ++si)
            euler += (s.zslot(si).level() + 1) * grad[static_cast<std::size_t>(s.z_axis(si))] *
                     p[static_cast<std::size_t>(s.z_axis(si))];
        rep.res_euler = std::max(rep.res_euler,
                                 std::abs(euler - kval) / (std::abs(kval) + kResidualGuard));
        // transversality families: for each residual key r,
        //   sum over blocks B not in r of sign * y^B * dK/dz^{B u r} = 0
        const double scale = std::abs(kval) + 1.0;
        for (const auto& [key, idx] : residual_keys) {
            (void)idx;
            const auto& [rest, residual] = key;
            double acc = 0.0;
            for (int b = 0; b < nb; ++b) {
                if (std::find(rest.begin(), rest.end(), b) != rest.end()) continue;
                std::vector<int> merged;
                int sign = multi_index::insert_sign(b, rest, merged);
                if (sign == 0) continue;
                // find the slot with these blocks and residual
                int slot_index = -1;
                for (int si = 0; si < s.zslots(); ++si)
                    if (s.zslot(si).blocks == merged && s.zslot(si).residual == residual) {
                        slot_index = si;
                        break;
                    }
                if (slot_index < 0) continue;
                acc += sign * p[static_cast<std::size_t>(n + b)] *
                       grad[static_cast<std::size_t>(s.z_axis(slot_index))];
            }
            rep.res_transversality = std::max(rep.res_transversality, std::abs(acc) / scale);
        }
    }
    return rep;
}

DifferentialForm<double> kawaguchi2_k_form(const Areal2Structure& s) {
    const int m = s.chart_dim();
    DifferentialForm<double> form(m, s.k());
    for (int b = 0; b < s.blocks(); ++b) {
        const int axis = s.y_axis(b);
        form.add_term(s.y_block(b), [&s, axis](std::span<const Jet<double>> pt) {
            return s.partial(pt, axis);
        });
    }
    for (int si = 0; si < s.zslots(); ++si) {
        const auto& slot = s.zslot(si);
        const int axis = s.z_axis(si);
        const double weight = slot.level() + 1;
        std::vector<int> key;
        for (int b : slot.blocks) key.push_back(s.y_axis(b));
        for (int nu : slot.residual) key.push_back(nu);
        form.add_term(std::move(key), [&s, axis, weight](std::span<const Jet<double>> pt) {
            return s.partial(pt, axis) * weight;
        });
    }
    return form;
}

Area2Result kawaguchi2_area(const Areal2Structure& s, const Patch& p, const QuadratureSpec& q) {
    auto rect = p.rect();
    std::function<double(std::span<const double>)> density = [&](std::span<const double> t) {
        auto lift = lift2_field_jets(p, t, 0, s.n(), s.k());
        return s.eval(std::span<const Jet<double>>(lift)).value();
    };
    Area2Result out;
    auto direct = integrate_density<double>(density, rect, q);
    out.value = direct.value;
    out.levels = direct.levels;

    std::function<double(std::span<const double>)> orientation = [&](std::span<const double> t) {
        auto lift = lift2_field_jets(p, t, 0, s.n(), s.k());
        return lift[static_cast<std::size_t>(s.n() + s.gauge_block())].value();
    };
    auto form = kawaguchi2_k_form(s);
    auto via = integrate<double>(form, field2_lift_map(s, p), rect, q, orientation);
    out.via_form = via.value;
    const double tol = 2.0 * q.refine_rtol * (std::abs(out.value) + 1.0);
    if (std::abs(out.value - out.via_form) > tol)
        throw std::runtime_error("kawaguchi2_area: density and k-form routes disagree");
    return out;
}

}  // namespace varik
