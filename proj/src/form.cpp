#include "varik/form.hpp"

#include <atomic>
#include <cstdlib>
#include <numeric>
#include <thread>

namespace varik {

namespace {

template <typename S>
FormCoeff<S> sum_coeffs(FormCoeff<S> a, FormCoeff<S> b) {
    return [a = std::move(a), b = std::move(b)](std::span<const Jet<S>> pt) {
        return a(pt) + b(pt);
    };
}

template <typename S>
FormCoeff<S> scale_coeff(FormCoeff<S> a, double s) {
    return [a = std::move(a), s](std::span<const Jet<S>> pt) { return a(pt) * S(s); };
}

}  // namespace

template <typename S>
void DifferentialForm<S>::add_term(std::vector<int> key, FormCoeff<S> coeff, double sign) {
    if (static_cast<int>(key.size()) != degree_)
        throw std::invalid_argument("form term key size does not match the form degree");
    for (int i : key)
        if (i < 0 || i >= chart_dim_) throw std::invalid_argument("form term axis out of range");
    int s = multi_index::sort_sign(key);
    if (s == 0) return;
    double total = sign * s;
    if (total != 1.0) coeff = scale_coeff<S>(std::move(coeff), total);
    auto it = coeffs_.find(key);
    if (it == coeffs_.end())
        coeffs_.emplace(std::move(key), std::move(coeff));
    else
        it->second = sum_coeffs<S>(std::move(it->second), std::move(coeff));
}

template <typename S>
std::map<std::vector<int>, S> DifferentialForm<S>::coefficients_at(std::span<const S> point) const {
    if (static_cast<int>(point.size()) != chart_dim_)
        throw std::invalid_argument("coefficients_at: point dimension mismatch");
    auto layout = JetLayout::get(1, 0);
    std::vector<Jet<S>> jets;
    jets.reserve(point.size());
    for (const S& v : point) jets.emplace_back(layout, v);
    std::map<std::vector<int>, S> out;
    for (const auto& [key, fn] : coeffs_) out[key] = fn(std::span<const Jet<S>>(jets)).value();
    return out;
}

template <typename S>
DifferentialForm<S> DifferentialForm<S>::wedge(const DifferentialForm& other) const {
    if (chart_dim_ != other.chart_dim_)
        throw std::invalid_argument("wedge: chart dimensions differ");
    if (degree_ + other.degree_ > chart_dim_)
        throw std::invalid_argument("wedge: degree overflow for the chart dimension");
    DifferentialForm out(chart_dim_, degree_ + other.degree_);
    for (const auto& [ka, fa] : coeffs_) {
        for (const auto& [kb, fb] : other.coeffs_) {
            std::vector<int> merged = ka;
            merged.insert(merged.end(), kb.begin(), kb.end());
            FormCoeff<S> prod = [fa = fa, fb = fb](std::span<const Jet<S>> pt) {
                return fa(pt) * fb(pt);
            };
            out.add_term(std::move(merged), std::move(prod));
        }
    }
    return out;
}

template <typename S>
DifferentialForm<S> DifferentialForm<S>::exterior_derivative() const {
    DifferentialForm out(chart_dim_, degree_ + 1);
    for (const auto& [key, fn] : coeffs_) {
        for (int axis = 0; axis < chart_dim_; ++axis) {
            bool in_key = std::find(key.begin(), key.end(), axis) != key.end();
            if (in_key) continue;
            FormCoeff<S> dfn = [fn = fn, axis](std::span<const Jet<S>> pt) {
                std::vector<Jet<S>> extended;
                extended.reserve(pt.size());
                for (std::size_t i = 0; i < pt.size(); ++i) {
                    S seed = (static_cast<int>(i) == axis) ? S(1) : S(0);
                    extended.push_back(extend(pt[i], 1, 1, std::span<const S>(&seed, 1)));
                }
                return extract_partial(fn(std::span<const Jet<S>>(extended)));
            };
            std::vector<int> merged;
            merged.reserve(key.size() + 1);
            merged.push_back(axis);
            merged.insert(merged.end(), key.begin(), key.end());
            out.add_term(std::move(merged), std::move(dfn));
        }
    }
    return out;
}

template <typename S>
S DifferentialForm<S>::pullback_density(std::span<const Jet<S>> chart_jets) const {
    if (static_cast<int>(chart_jets.size()) != chart_dim_)
        throw std::invalid_argument("pullback_density: chart dimension mismatch");
    if (coeffs_.empty()) return S(0);
    const int k = chart_jets[0].params();
    if (degree_ != k)
        throw std::invalid_argument("pullback_density: form degree must equal parameter count");
    // Jacobian of the map: rows = chart coordinates, columns = parameters.
    std::vector<S> jac(static_cast<std::size_t>(chart_dim_) * k);
    for (int r = 0; r < chart_dim_; ++r)
        for (int c = 0; c < k; ++c) jac[static_cast<std::size_t>(r) * k + c] = chart_jets[r].coeff(1 + c);
    S acc(0);
    for (const auto& [key, fn] : coeffs_) {
        S minor = minor_determinant<S>(jac, k, key);
        if (minor == S(0)) continue;
        acc += fn(chart_jets).value() * minor;
    }
    return acc;
}

template class DifferentialForm<double>;
template class DifferentialForm<std::complex<double>>;

const std::pair<std::vector<double>, std::vector<double>>& gauss_legendre(int order) {
    static std::mutex mu;
    static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    if (order < 2) throw std::invalid_argument("gauss_legendre: order must be >= 2");
    std::vector<double> x(order), w(order);
    const int m = (order + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (order + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < order; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1);
            }
            pp = order * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[order - 1 - i] = w[i];
    }
    return cache.emplace(order, std::make_pair(std::move(x), std::move(w))).first->second;
}

int quadrature_threads() {
    static int n = [] {
        const char* env = std::getenv("VARIK_THREADS");
        if (!env) return 1;
        int v = std::atoi(env);
        return v < 1 ? 1 : v;
    }();
    return n;
}

namespace {

/// One refinement level: sum of per-cell Gauss-Legendre sums, cells in a
/// fixed order so the reduction is deterministic regardless of thread count.
template <typename S>
S level_value(const std::function<S(std::span<const double>)>& density,
              std::span<const std::pair<double, double>> rect, int gauss_order, int cells_per_axis) {
    const int k = static_cast<int>(rect.size());
    const auto& [nodes, weights] = gauss_legendre(gauss_order);
    const int g = gauss_order;
    long long total_cells = 1;
    for (int a = 0; a < k; ++a) total_cells *= cells_per_axis;
    long long points_per_cell = 1;
    for (int a = 0; a < k; ++a) points_per_cell *= g;

    std::vector<S> cell_values(static_cast<std::size_t>(total_cells), S(0));
    auto eval_cell = [&](long long cell) {
        // decode the cell index per axis
        std::vector<int> ci(k);
        long long rem = cell;
        for (int a = k - 1; a >= 0; --a) {
            ci[a] = static_cast<int>(rem % cells_per_axis);
            rem /= cells_per_axis;
        }
        std::vector<double> lo(k), half(k);
        double jac = 1.0;
        for (int a = 0; a < k; ++a) {
            double width = (rect[a].second - rect[a].first) / cells_per_axis;
            lo[a] = rect[a].first + ci[a] * width;
            half[a] = 0.5 * width;
            jac *= half[a];
        }
        S sum(0);
        std::vector<double> t(k);
        for (long long pt = 0; pt < points_per_cell; ++pt) {
            long long q = pt;
            double wprod = 1.0;
            for (int a = k - 1; a >= 0; --a) {
                int ni = static_cast<int>(q % g);
                q /= g;
                t[a] = lo[a] + half[a] * (1.0 + nodes[ni]);
                wprod *= weights[ni];
            }
            sum += density(t) * S(wprod);
        }
        cell_values[static_cast<std::size_t>(cell)] = sum * S(jac);
    };

    const int threads = quadrature_threads();
    if (threads <= 1 || total_cells < 4) {
        for (long long c = 0; c < total_cells; ++c) eval_cell(c);
    } else {
        std::vector<std::thread> pool;
        std::atomic<long long> next{0};
        std::exception_ptr failure;
        std::mutex failure_mu;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                long long c;
                while ((c = next.fetch_add(1)) < total_cells) {
                    try {
                        eval_cell(c);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_mu);
                        if (!failure) failure = std::current_exception();
                        next.store(total_cells);
                        return;
                    }
                }
            });
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }
    S acc(0);
    for (const S& v : cell_values) acc += v;  // fixed order
    return acc;
}

template <typename S>
IntegrateResult<S> refine(const std::function<S(std::span<const double>)>& density,
                          std::span<const std::pair<double, double>> rect,
                          const QuadratureSpec& q) {
    for (const auto& [lo, hi] : rect)
        if (!(lo < hi)) throw std::invalid_argument("integrate: degenerate rectangle");
    IntegrateResult<S> out;
    S prev(0);
    int cells = q.subdivisions;
    for (int level = 0; level <= q.max_levels; ++level) {
        S cur = level_value<S>(density, rect, q.gauss_order, cells);
        out.value = cur;
        out.levels = level + 1;
        if (level > 0) {
            double change = std::abs(cur - prev);
            double bound = q.refine_rtol * std::abs(cur) + q.abs_floor;
            if (change <= bound) return out;
            if (level == q.max_levels && change > 10.0 * bound)
                throw NonConvergent("quadrature did not converge: change " +
                                    std::to_string(change) + " after " +
                                    std::to_string(level + 1) + " levels");
        }
        prev = cur;
        cells *= 2;
    }
    return out;
}

}  // namespace

template <typename S>
IntegrateResult<S> integrate(const DifferentialForm<S>& form, const PatchMap<S>& map,
                             std::span<const std::pair<double, double>> rect,
                             const QuadratureSpec& q,
                             const std::function<double(std::span<const double>)>& orientation_minor) {
    const int k = static_cast<int>(rect.size());
    if (form.degree() != k)
        throw std::invalid_argument("integrate: form degree must match rectangle dimension");
    std::atomic<bool> flip{false};
    if (orientation_minor) {
        std::vector<double> center(k);
        for (int a = 0; a < k; ++a) center[a] = 0.5 * (rect[a].first + rect[a].second);
        if (!(orientation_minor(center) > 0.0))
            throw OrientationError("orientation minor is not positive at the rectangle center");
    }
    std::function<S(std::span<const double>)> density = [&](std::span<const double> t) {
        if (orientation_minor && orientation_minor(t) < 0.0)
            flip.store(true, std::memory_order_relaxed);
        auto jets = map(t, 1);
        return form.pullback_density(std::span<const Jet<S>>(jets));
    };
    auto out = refine<S>(density, rect, q);
    out.orientation_flip = flip.load();
    return out;
}

template IntegrateResult<double> integrate<double>(
    const DifferentialForm<double>&, const PatchMap<double>&,
    std::span<const std::pair<double, double>>, const QuadratureSpec&,
    const std::function<double(std::span<const double>)>&);
template IntegrateResult<std::complex<double>> integrate<std::complex<double>>(
    const DifferentialForm<std::complex<double>>&, const PatchMap<std::complex<double>>&,
    std::span<const std::pair<double, double>>, const QuadratureSpec&,
    const std::function<double(std::span<const double>)>&);

template <typename S>
IntegrateResult<S> integrate_density(const std::function<S(std::span<const double>)>& density,
                                     std::span<const std::pair<double, double>> rect,
                                     const QuadratureSpec& q) {
    return refine<S>(density, rect, q);
}

template IntegrateResult<double> integrate_density<double>(
    const std::function<double(std::span<const double>)>&,
    std::span<const std::pair<double, double>>, const QuadratureSpec&);
template IntegrateResult<std::complex<double>> integrate_density<std::complex<double>>(
    const std::function<std::complex<double>(std::span<const double>)>&,
    std::span<const std::pair<double, double>>, const QuadratureSpec&);

}  // namespace varik
