#pragma once

#include <memory>
#include <optional>

#include "varik/finsler.hpp"

namespace varik {

class SingularHessian : public std::runtime_error {
public:
    explicit SingularHessian(const std::string& what) : std::runtime_error(what) {}
};

/// Gauge choice for reducing the parameter-free EL system to an ODE: the
/// gauge coordinate becomes the curve parameter (its lift velocity is 1).
struct GaugeSpec {
    int gauge_index = 0;
    double admissible_check = 1e-10;  // Hessian pivot threshold (relative)
};

/// Accelerations of the non-gauge coordinates from the gauge-restricted
/// fiber Hessian; xdot must have 1 in the gauge slot. The returned vector
/// has n entries with 0 in the gauge slot.
std::vector<double> reduced_acceleration(const FinslerStructure& s, const GaugeSpec& gauge,
                                         std::span<const double> x, std::span<const double> xdot);

struct BvpProblem {
    const FinslerStructure* structure = nullptr;
    GaugeSpec gauge;
    std::vector<double> start;
    std::vector<double> end;
    int rk4_steps = 2000;
    double shoot_tol = 1e-10;
    int max_iters = 60;
    std::optional<std::vector<double>> initial_slope;  // non-gauge components
};

/// Dense output of a gauge-parameterised solve: quintic Hermite pieces over
/// a uniform tabulation (position, velocity, acceleration at the nodes).
class TabulatedCurve : public Curve {
public:
    TabulatedCurve(int n, int gauge_index, double t0, double t1,
                   std::vector<std::vector<double>> values,
                   std::vector<std::vector<double>> derivs,
                   std::vector<std::vector<double>> second_derivs);

    int dim() const override { return n_; }
    std::pair<double, double> interval() const override { return {t0_, t1_}; }
    std::vector<Jet<double>> components(double t, int order) const override;

    int gauge_index() const { return gauge_; }
    int nodes() const { return static_cast<int>(values_.size()); }
    std::vector<double> node_state(int i) const;  // (x..., xdot...) on the TM chart

private:
    int n_;
    int gauge_;
    double t0_, t1_;
    // per node: non-gauge components only, gauge filled analytically
    std::vector<std::vector<double>> values_, derivs_, second_;
};

struct BvpSolution {
    std::shared_ptr<TabulatedCurve> curve;
    int iterations = 0;
    double endpoint_miss = 0.0;
    double max_el_residual = 0.0;  // over 100 interior samples, post-verified
};

BvpSolution solve_bvp(const BvpProblem& p);

struct DriftReport {
    double max_drift = 0.0;
};

/// Max drift of a Noether current along the solved tabulation.
DriftReport conserved_along(const BvpSolution& sol,
                            const std::function<double(std::span<const double>)>& current);

}  // namespace varik
