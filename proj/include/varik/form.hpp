#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "varik/jet.hpp"
#include "varik/multi_index.hpp"

namespace varik {

class NonConvergent : public std::runtime_error {
public:
    explicit NonConvergent(const std::string& what) : std::runtime_error(what) {}
};

class OrientationError : public std::runtime_error {
public:
    explicit OrientationError(const std::string& what) : std::runtime_error(what) {}
};

/// Coefficient of a differential form: evaluable on chart coordinates given
/// as jets of any shared layout, so exterior derivatives stay exact.
template <typename S>
using FormCoeff = std::function<Jet<S>(std::span<const Jet<S>>)>;

/// Jet-evaluable parameterisation: chart coordinates as jets in the k patch
/// parameters at t, carrying derivatives up to `order`.
template <typename S>
using PatchMap = std::function<std::vector<Jet<S>>(std::span<const double>, int)>;

struct QuadratureSpec {
    int gauss_order = 8;
    int subdivisions = 8;
    double refine_rtol = 1e-9;
    int max_levels = 6;
    /// Absolute floor below which level-to-level changes count as converged;
    /// keeps zero integrals (conservation checks) from refining forever.
    double abs_floor = 1e-14;
};

template <typename S>
struct IntegrateResult {
    S value{};
    int levels = 0;
    bool orientation_flip = false;
};

/// Degree-r form on an m-coordinate chart with jet-evaluable coefficients.
/// Only ordered keys are stored; a missing key is a zero coefficient.
template <typename S>
class DifferentialForm {
public:
    DifferentialForm(int chart_dim, int degree) : chart_dim_(chart_dim), degree_(degree) {
        if (degree < 0 || degree > chart_dim)
            throw std::invalid_argument("form degree out of range for chart dimension");
    }

    int chart_dim() const { return chart_dim_; }
    int degree() const { return degree_; }
    const std::map<std::vector<int>, FormCoeff<S>>& coefficients() const { return coeffs_; }

    /// Adds sign * coeff * dx^key; the key may be unsorted (the permutation
    /// sign is absorbed) and repeated axes drop the term.
    void add_term(std::vector<int> key, FormCoeff<S> coeff, double sign = 1.0);

    bool empty() const { return coeffs_.empty(); }

    /// Evaluates every coefficient at one chart point (plain values).
    std::map<std::vector<int>, S> coefficients_at(std::span<const S> point) const;

    DifferentialForm wedge(const DifferentialForm& other) const;
    DifferentialForm exterior_derivative() const;

    /// Coefficient of dt^1 ^ ... ^ dt^k of the pullback at one parameter
    /// point; chart_jets must carry first derivatives in the k parameters.
    S pullback_density(std::span<const Jet<S>> chart_jets) const;

private:
    int chart_dim_;
    int degree_;
    std::map<std::vector<int>, FormCoeff<S>> coeffs_;
};

/// Integrates a degree-k form over a closed k-rectangle along `map` by
/// tensor-product Gauss-Legendre quadrature with subdivision refinement.
/// `orientation_minor`, when provided, is sampled to assert orientation.
template <typename S>
IntegrateResult<S> integrate(const DifferentialForm<S>& form, const PatchMap<S>& map,
                             std::span<const std::pair<double, double>> rect,
                             const QuadratureSpec& q,
                             const std::function<double(std::span<const double>)>&
                                 orientation_minor = nullptr);

/// Same quadrature driver for a plain scalar density on the rectangle.
template <typename S>
IntegrateResult<S> integrate_density(const std::function<S(std::span<const double>)>& density,
                                     std::span<const std::pair<double, double>> rect,
                                     const QuadratureSpec& q);

/// Gauss-Legendre nodes and weights on [-1, 1], cached per order.
const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order);

/// Worker count for quadrature cells: VARIK_THREADS, clamped to >= 1.
int quadrature_threads();

}  // namespace varik
