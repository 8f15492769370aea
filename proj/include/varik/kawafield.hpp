#pragma once

#include "varik/geometry.hpp"
#include "varik/sample.hpp"

namespace varik {

/// First-order k-areal structure: a density K over the induced chart
/// (x^mu, y^I) of the k-multivector bundle, I running over the C(n,k)
/// ordered multi-indices in lexicographic order. Scalars are double for
/// real field content and std::complex<double> when fields like psi and
/// psi-bar are treated as independent complex coordinates.
template <typename S>
class ArealStructureT {
public:
    ArealStructureT(int n, int k, LagrangianExpr K, std::vector<S> env = {},
                    SampleSpec admissible = {}, int gauge_block = 0);

    int n() const { return n_; }
    int k() const { return k_; }
    int blocks() const { return static_cast<int>(blocks_.size()); }
    int chart_dim() const { return n_ + blocks(); }
    const LagrangianExpr& K() const { return K_; }
    const std::vector<S>& env() const { return env_; }
    const SampleSpec& admissible_samples() const { return admissible_; }
    void set_admissible_samples(SampleSpec s) { admissible_ = std::move(s); }
    int gauge_block() const { return gauge_block_; }

    /// The ordered multi-index of a y-block (0-based axis indices).
    const std::vector<int>& block(int b) const { return blocks_[static_cast<std::size_t>(b)]; }
    /// Chart axis of the b-th y-block.
    int block_axis(int b) const { return n_ + b; }

    /// Coordinate names: x names then y block names ("y" + 1-based digits).
    static std::vector<std::string> chart_names(int n, int k);

    Jet<S> eval(std::span<const Jet<S>> chart_jets) const;
    S eval_point(std::span<const S> chart_point) const;
    Jet<S> partial(std::span<const Jet<S>> chart_jets, int chart_index) const;
    Jet<S> second_partial_dir(std::span<const Jet<S>> chart_jets, int chart_i,
                              std::span<const S> w) const;
    std::vector<S> gradient(std::span<const S> chart_point) const;

private:
    std::vector<Jet<S>> with_env(std::span<const Jet<S>> chart_jets) const;

    int n_;
    int k_;
    std::vector<std::vector<int>> blocks_;
    LagrangianExpr K_;
    std::vector<S> env_;
    SampleSpec admissible_;
    int gauge_block_;
};

using ArealStructure = ArealStructureT<double>;
using CArealStructure = ArealStructureT<std::complex<double>>;

/// Multi-tangent lift: chart jets (x, all ordered Jacobian minors) along a
/// patch, with t-derivatives retained to `order`.
template <typename S>
std::vector<Jet<S>> lift_field_jets(const PatchT<S>& p, std::span<const double> t, int order);

/// Values of the lift at one parameter point.
template <typename S>
std::vector<S> lift_field(const PatchT<S>& p, std::span<const double> t);

template <typename S>
PatchMap<S> field_lift_map(const PatchT<S>& p);

struct FieldHomogeneityReport {
    double max_rel_residual_scaling = 0.0;
    double max_rel_residual_euler = 0.0;
};

/// Scaling law K(x, lambda y) = lambda K plus the ordered-index Euler
/// relation over samples. For complex structures the box samples real and
/// imaginary parts independently and residuals use the modulus.
template <typename S>
FieldHomogeneityReport check_homogeneity_field(const ArealStructureT<S>& s, const SampleSpec& spec,
                                               std::span<const double> lambdas);

/// Kawaguchi k-form: sum over ordered I of (dK/dy^I) dx^I.
template <typename S>
DifferentialForm<S> kawaguchi_k_form(const ArealStructureT<S>& s);

template <typename S>
struct AreaResult {
    S value{};
    S via_form{};
    int levels = 0;
};

/// Kawaguchi k-area with the k-form route as a self-test.
template <typename S>
AreaResult<S> kawaguchi_area(const ArealStructureT<S>& s, const PatchT<S>& p,
                             const QuadratureSpec& q);

/// The mu-th field Euler-Lagrange k-form on the full chart.
template <typename S>
DifferentialForm<S> el_field_component_form(const ArealStructureT<S>& s, int mu);

/// Field EL residual densities R_mu(t) pulled back along the lift.
template <typename S>
std::vector<S> el_field_residual(const ArealStructureT<S>& s, const PatchT<S>& p,
                                 std::span<const double> t);

/// Global EL (k+1)-form dx^mu ^ EL_mu.
template <typename S>
DifferentialForm<S> el_field_form(const ArealStructureT<S>& s);

/// Noether (k-1)-form for a generator u over the base coordinates.
template <typename S>
DifferentialForm<S> noether_field_current(const ArealStructureT<S>& s,
                                          const std::vector<LagrangianExpr>& u);

/// Conventional field-Lagrangian lift: K = L(x^a, x^i, y-ratios) y^(1..k)
/// with the a-th gauge index replaced by i (signs from re-ordering).
/// L is over (t^1..t^k, q^(k+1)..q^n, q^i_a ordered by i then a) + constants.
template <typename S>
ArealStructureT<S> lift_field_conventional(const LagrangianExpr& L, int k, int m_fields,
                                           std::vector<S> env = {});

}  // namespace varik
