#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "varik/expr.hpp"
#include "varik/form.hpp"

namespace varik {

/// A parameterised arc segment on an n-coordinate chart, jet-evaluable to
/// order 4 in its single parameter.
class Curve {
public:
    virtual ~Curve() = default;
    virtual int dim() const = 0;
    virtual std::pair<double, double> interval() const = 0;
    virtual std::vector<Jet<double>> components(double t, int order) const = 0;

    std::vector<double> point(double t) const {
        auto jets = components(t, 0);
        std::vector<double> out(jets.size());
        for (std::size_t i = 0; i < jets.size(); ++i) out[i] = jets[i].value();
        return out;
    }
};

/// Curve whose components are expressions in the parameter t (plus bound
/// constants).
class ExprCurve : public Curve {
public:
    ExprCurve(std::vector<LagrangianExpr> components, std::pair<double, double> interval,
              std::vector<double> env = {});

    int dim() const override { return static_cast<int>(components_.size()); }
    std::pair<double, double> interval() const override { return interval_; }
    std::vector<Jet<double>> components(double t, int order) const override;

private:
    std::vector<LagrangianExpr> components_;
    std::pair<double, double> interval_;
    std::vector<double> env_;
};

/// Builds an ExprCurve from component sources over the variable "t" followed
/// by the given constant names.
ExprCurve make_expr_curve(const std::vector<std::string>& sources,
                          std::pair<double, double> interval,
                          const std::vector<std::string>& const_names = {},
                          const std::vector<double>& const_values = {},
                          ScalarKind kind = ScalarKind::Real);

/// A parameterised k-patch on an n-coordinate chart over scalar S.
template <typename S>
class PatchT {
public:
    virtual ~PatchT() = default;
    virtual int dim() const = 0;
    virtual int params() const = 0;
    virtual std::vector<std::pair<double, double>> rect() const = 0;
    virtual std::vector<Jet<S>> components(std::span<const double> t, int order) const = 0;
};

template <typename S>
class ExprPatchT : public PatchT<S> {
public:
    ExprPatchT(std::vector<LagrangianExpr> components, std::vector<std::pair<double, double>> rect,
               int params, std::vector<S> env = {})
        : components_(std::move(components)), rect_(std::move(rect)), params_(params),
          env_(std::move(env)) {}

    int dim() const override { return static_cast<int>(components_.size()); }
    int params() const override { return params_; }
    std::vector<std::pair<double, double>> rect() const override { return rect_; }

    std::vector<Jet<S>> components(std::span<const double> t, int order) const override {
        auto layout = JetLayout::get(params_, order);
        std::vector<Jet<S>> inputs;
        inputs.reserve(static_cast<std::size_t>(params_) + env_.size());
        for (int a = 0; a < params_; ++a) {
            std::vector<S> dir(static_cast<std::size_t>(params_), S(0));
            dir[static_cast<std::size_t>(a)] = S(1);
            inputs.push_back(Jet<S>::variable(params_, order, S(t[a]), dir));
        }
        for (const S& v : env_) inputs.emplace_back(layout, v);
        std::vector<Jet<S>> out;
        out.reserve(components_.size());
        for (const auto& e : components_) out.push_back(e.evaluate(std::span<const Jet<S>>(inputs)));
        return out;
    }

private:
    std::vector<LagrangianExpr> components_;
    std::vector<std::pair<double, double>> rect_;
    int params_;
    std::vector<S> env_;
};

using Patch = PatchT<double>;
using CPatch = PatchT<std::complex<double>>;

/// A curve precomposed with a monotone parameter map phi (an expression in
/// one variable); used to flatten integrable boundary layers before
/// quadrature.
class WarpedCurve : public Curve {
public:
    WarpedCurve(std::shared_ptr<const Curve> base, LagrangianExpr phi,
                std::pair<double, double> interval);

    int dim() const override { return base_->dim(); }
    std::pair<double, double> interval() const override { return interval_; }
    std::vector<Jet<double>> components(double s, int order) const override;

private:
    std::shared_ptr<const Curve> base_;
    LagrangianExpr phi_;
    std::pair<double, double> interval_;
};

/// Tangent-lift map of a curve: (x, y=dx/dt) as jets for pullback machinery.
PatchMap<double> tangent_lift_map(const Curve& c);

/// Second-order lift map of a curve: (x, dx/dt, d2x/dt2).
PatchMap<double> second_lift_map(const Curve& c);

/// Point of the T^2 chart (x, xdot, xddot) at t.
std::vector<double> lift2_point(const Curve& c, double t);

}  // namespace varik
