#pragma once

#include "varik/geometry.hpp"
#include "varik/sample.hpp"

namespace varik {

/// One second-order coordinate of the (Lambda^k T)^2 chart: `blocks` lists
/// l >= 1 distinct ordered k-multi-indices (as block ids, strictly
/// increasing), `residual` the remaining k-l base axes (strictly
/// increasing). The coordinate carries the antisymmetrised iterated-minor
/// derivative of the lift.
struct ZSlot {
    std::vector<int> blocks;
    std::vector<int> residual;
    int level() const { return static_cast<int>(blocks.size()); }
};

/// Local second-order k-areal structure on R^n: a density K over
/// (x^mu, y^I, z^{I_1 nu...}, ..., z^{I_1...I_k}) with ordered-index storage.
class Areal2Structure {
public:
    Areal2Structure(int n, int k, LagrangianExpr K, std::vector<double> env = {},
                    SampleSpec admissible = {}, int gauge_block = 0);

    int n() const { return n_; }
    int k() const { return k_; }
    int blocks() const { return static_cast<int>(y_blocks_.size()); }
    int zslots() const { return static_cast<int>(slots_.size()); }
    int chart_dim() const { return n_ + blocks() + zslots(); }
    const LagrangianExpr& K() const { return K_; }
    const SampleSpec& admissible_samples() const { return admissible_; }
    void set_admissible_samples(SampleSpec s) { admissible_ = std::move(s); }
    int gauge_block() const { return gauge_block_; }

    const std::vector<int>& y_block(int b) const { return y_blocks_[static_cast<std::size_t>(b)]; }
    const ZSlot& zslot(int s) const { return slots_[static_cast<std::size_t>(s)]; }
    int y_axis(int b) const { return n_ + b; }
    int z_axis(int s) const { return n_ + blocks() + s; }

    /// Canonical chart-coordinate names: x1.., y blocks, z slots with blocks
    /// and the residual group separated by underscores.
    static std::vector<std::string> chart_names(int n, int k);

    /// Enumerates the z-slots in the canonical order (level, then block ids
    /// lexicographically, then residual lexicographically).
    static std::vector<ZSlot> enumerate_slots(int n, int k);

    Jet<double> eval(std::span<const Jet<double>> chart_jets) const;
    double eval_point(std::span<const double> chart_point) const;
    Jet<double> partial(std::span<const Jet<double>> chart_jets, int chart_index) const;
    std::vector<double> gradient(std::span<const double> chart_point) const;

private:
    std::vector<Jet<double>> with_env(std::span<const Jet<double>> chart_jets) const;

    int n_;
    int k_;
    std::vector<std::vector<int>> y_blocks_;
    std::vector<ZSlot> slots_;
    LagrangianExpr K_;
    std::vector<double> env_;
    SampleSpec admissible_;
    int gauge_block_;
};

/// Second-order lift: chart jets (x, minors, iterated z minors) at t with
/// derivatives retained to `order`.
std::vector<Jet<double>> lift2_field_jets(const Patch& p, std::span<const double> t, int order,
                                          int n, int k);

std::vector<double> lift2_field(const Areal2Structure& s, const Patch& p,
                                std::span<const double> t);

PatchMap<double> field2_lift_map(const Areal2Structure& s, const Patch& p);

struct Homogeneity2Report {
    double res_scaling = 0.0;        // full second-order scaling law
    double res_euler = 0.0;          // weighted Euler identity
    double res_transversality = 0.0; // dK/dz . y families
};

/// Scaling law with per-residual random constants, the weighted Euler
/// identity (weights l+1 on level-l slots), and the transversality family.
Homogeneity2Report check_homogeneity_field2(const Areal2Structure& s, const SampleSpec& spec,
                                            std::span<const double> lambdas,
                                            int constant_draws = 3,
                                            double constant_scale = 1.0);

/// Second-order Kawaguchi k-form with ordered-index weights (l+1).
DifferentialForm<double> kawaguchi2_k_form(const Areal2Structure& s);

struct Area2Result {
    double value = 0.0;
    double via_form = 0.0;
    int levels = 0;
};

Area2Result kawaguchi2_area(const Areal2Structure& s, const Patch& p, const QuadratureSpec& q);

}  // namespace varik
