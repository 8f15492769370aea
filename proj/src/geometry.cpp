#include "varik/geometry.hpp"

namespace varik {

ExprCurve::ExprCurve(std::vector<LagrangianExpr> components, std::pair<double, double> interval,
                     std::vector<double> env)
    : components_(std::move(components)), interval_(interval), env_(std::move(env)) {}

std::vector<Jet<double>> ExprCurve::components(double t, int order) const {
    auto layout = JetLayout::get(1, order);
    std::vector<Jet<double>> inputs;
    inputs.reserve(1 + env_.size());
    double one = 1.0;
    inputs.push_back(Jet<double>::variable(1, order, t, std::span<const double>(&one, 1)));
    for (double v : env_) inputs.emplace_back(layout, v);
    std::vector<Jet<double>> out;
    out.reserve(components_.size());
    for (const auto& e : components_)
        out.push_back(e.evaluate(std::span<const Jet<double>>(inputs)));
    return out;
}

ExprCurve make_expr_curve(const std::vector<std::string>& sources,
                          std::pair<double, double> interval,
                          const std::vector<std::string>& const_names,
                          const std::vector<double>& const_values, ScalarKind kind) {
    std::vector<std::string> vars = {"t"};
    vars.insert(vars.end(), const_names.begin(), const_names.end());
    std::vector<LagrangianExpr> comps;
    comps.reserve(sources.size());
    for (const auto& s : sources) comps.push_back(LagrangianExpr::parse(s, vars, kind));
    return ExprCurve(std::move(comps), interval, const_values);
}

WarpedCurve::WarpedCurve(std::shared_ptr<const Curve> base, LagrangianExpr phi,
                         std::pair<double, double> interval)
    : base_(std::move(base)), phi_(std::move(phi)), interval_(interval) {
    if (phi_.var_names().size() != 1)
        throw std::invalid_argument("WarpedCurve: phi must be a function of one variable");
}

std::vector<Jet<double>> WarpedCurve::components(double s, int order) const {
    double one = 1.0;
    std::vector<Jet<double>> sj = {
        Jet<double>::variable(1, order, s, std::span<const double>(&one, 1))};
    auto phi = phi_.evaluate(std::span<const Jet<double>>(sj));
    auto base = base_->components(phi.value(), order);
    std::vector<Jet<double>> out;
    out.reserve(base.size());
    for (const auto& g : base) {
        std::vector<double> derivs(static_cast<std::size_t>(order) + 1);
        double fact = 1.0;
        for (int m = 0; m <= order; ++m) {
            if (m > 0) fact *= m;
            derivs[static_cast<std::size_t>(m)] = g.coeff(m) * fact;
        }
        out.push_back(phi.compose(derivs));
    }
    return out;
}

PatchMap<double> tangent_lift_map(const Curve& c) {
    return [&c](std::span<const double> t, int order) {
        auto xj = c.components(t[0], order + 1);
        std::vector<Jet<double>> out;
        out.reserve(2 * xj.size());
        for (const auto& x : xj) out.push_back(truncate(x, order));
        for (const auto& x : xj) out.push_back(time_shift(x));
        return out;
    };
}

PatchMap<double> second_lift_map(const Curve& c) {
    return [&c](std::span<const double> t, int order) {
        auto xj = c.components(t[0], order + 2);
        std::vector<Jet<double>> out;
        out.reserve(3 * xj.size());
        for (const auto& x : xj) out.push_back(truncate(x, order));
        for (const auto& x : xj) out.push_back(truncate(time_shift(x), order));
        for (const auto& x : xj) out.push_back(time_shift(time_shift(x)));
        return out;
    };
}

std::vector<double> lift2_point(const Curve& c, double t) {
    auto xj = c.components(t, 2);
    const std::size_t n = xj.size();
    std::vector<double> out(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = xj[i].value();
        out[n + i] = xj[i].coeff(1);
        out[2 * n + i] = 2.0 * xj[i].coeff(2);
    }
    return out;
}

}  // namespace varik
