#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace varik {

class JetError : public std::runtime_error {
public:
    explicit JetError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline constexpr int kMaxJetParams = 16;
inline constexpr int kMaxJetOrder = 4;

template <typename S>
struct is_complex : std::false_type {};
template <typename T>
struct is_complex<std::complex<T>> : std::true_type {};
}  // namespace detail

using MultiDegree = std::array<std::uint8_t, detail::kMaxJetParams>;

/// Shared index tables for all jets with a given (params, order) signature.
/// Terms are stored in graded-lexicographic order: the constant term first,
/// then the p degree-1 terms in parameter order, and so on.
class JetLayout {
public:
    static std::shared_ptr<const JetLayout> get(int params, int order);

    int params() const { return params_; }
    int order() const { return order_; }
    int size() const { return static_cast<int>(degrees_.size()); }

    const MultiDegree& degree(int rank) const { return degrees_[rank]; }
    int total_degree(int rank) const { return total_degree_[rank]; }

    /// Rank of a multi-degree, or -1 if it exceeds the truncation order.
    int rank_of(const MultiDegree& alpha) const;

    /// Rank of alpha_i + alpha_j, or -1 when truncated away.
    int product_rank(int i, int j) const { return product_rank_[i * size() + j]; }

    /// alpha! as a double (orders <= 4 keep this exact).
    double factorial(int rank) const { return factorial_[rank]; }

private:
    JetLayout(int params, int order);

    int params_;
    int order_;
    std::vector<MultiDegree> degrees_;
    std::vector<int> total_degree_;
    std::vector<int> product_rank_;
    std::vector<double> factorial_;
    std::unordered_map<std::uint64_t, int> rank_index_;
};

/// Truncated multivariate Taylor expansion over a scalar algebra S
/// (double or std::complex<double>). Coefficients are Taylor coefficients,
/// i.e. mixed partials divided by alpha!.
template <typename S>
class Jet {
public:
    Jet() : layout_(JetLayout::get(1, 1)), c_(layout_->size(), S(0)) {}

    Jet(std::shared_ptr<const JetLayout> layout, S value)
        : layout_(std::move(layout)), c_(layout_->size(), S(0)) {
        c_[0] = value;
    }

    static Jet constant(int params, int order, S value) {
        return Jet(JetLayout::get(params, order), value);
    }

    /// Jet of the seed value + sum_i directions[i] * eps_i.
    static Jet variable(int params, int order, S value, std::span<const S> directions) {
        Jet j(JetLayout::get(params, order), value);
        if (static_cast<int>(directions.size()) != params)
            throw JetError("jet seed direction count does not match parameter count");
        if (order >= 1)
            for (int i = 0; i < params; ++i) j.c_[1 + i] = directions[i];
        return j;
    }

    const JetLayout& layout() const { return *layout_; }
    std::shared_ptr<const JetLayout> layout_ptr() const { return layout_; }
    int params() const { return layout_->params(); }
    int order() const { return layout_->order(); }
    int size() const { return layout_->size(); }

    S value() const { return c_[0]; }
    const S& coeff(int rank) const { return c_[rank]; }
    S& coeff(int rank) { return c_[rank]; }

    S coeff(const MultiDegree& alpha) const {
        int r = layout_->rank_of(alpha);
        if (r < 0) throw JetError("multi-degree exceeds jet order");
        return c_[r];
    }

    /// Mixed partial derivative alpha! * coeff(alpha).
    S derivative(const MultiDegree& alpha) const {
        int r = layout_->rank_of(alpha);
        if (r < 0) throw JetError("multi-degree exceeds jet order");
        return c_[r] * S(layout_->factorial(r));
    }

    Jet operator-() const {
        Jet r = *this;
        for (auto& v : r.c_) v = -v;
        return r;
    }

    Jet& operator+=(const Jet& o) {
        check_same(o);
        for (int i = 0; i < size(); ++i) c_[i] += o.c_[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        check_same(o);
        for (int i = 0; i < size(); ++i) c_[i] -= o.c_[i];
        return *this;
    }
    Jet& operator+=(S s) {
        c_[0] += s;
        return *this;
    }
    Jet& operator-=(S s) {
        c_[0] -= s;
        return *this;
    }
    Jet& operator*=(S s) {
        for (auto& v : c_) v *= s;
        return *this;
    }

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, S b) { return a += b; }
    friend Jet operator+(S a, Jet b) { return b += a; }
    friend Jet operator-(Jet a, S b) { return a -= b; }
    friend Jet operator-(S a, const Jet& b) { return (-b) += a; }
    friend Jet operator*(Jet a, S b) { return a *= b; }
    friend Jet operator*(S a, Jet b) { return b *= a; }

    friend Jet operator*(const Jet& a, const Jet& b) {
        a.check_same(b);
        const JetLayout& L = a.layout();
        Jet r(a.layout_, S(0));
        const int n = L.size();
        for (int i = 0; i < n; ++i) {
            if (a.c_[i] == S(0)) continue;
            for (int j = 0; j < n; ++j) {
                int k = L.product_rank(i, j);
                if (k >= 0) r.c_[k] += a.c_[i] * b.c_[j];
            }
        }
        return r;
    }

    friend Jet operator/(const Jet& a, const Jet& b) { return a * b.reciprocal(); }
    friend Jet operator/(Jet a, S b) {
        for (auto& v : a.c_) v /= b;
        return a;
    }
    friend Jet operator/(S a, const Jet& b) { return b.reciprocal() *= a; }

    /// 1/this by graded series inversion.
    Jet reciprocal() const;

    /// Composition with a univariate analytic function given the derivative
    /// list f(u0), f'(u0), ..., f^(order)(u0).
    Jet compose(std::span<const S> derivs) const;

    bool same_layout(const Jet& o) const { return layout_ == o.layout_; }

private:
    void check_same(const Jet& o) const {
        if (layout_ != o.layout_ &&
            (layout_->params() != o.layout_->params() || layout_->order() != o.layout_->order()))
            throw JetError("jet arithmetic requires matching parameter count and order");
    }

    std::shared_ptr<const JetLayout> layout_;
    std::vector<S> c_;
};

template <typename S>
Jet<S> Jet<S>::reciprocal() const {
    if (c_[0] == S(0)) throw JetError("division by a jet with zero constant term");
    const JetLayout& L = *layout_;
    Jet<S> r(layout_, S(1) / c_[0]);
    // Solve (this * r) = 1 degree by degree in graded order.
    for (int k = 1; k < L.size(); ++k) {
        S acc(0);
        for (int i = 1; i < L.size(); ++i) {
            if (c_[i] == S(0)) continue;
            // find j with alpha_i + alpha_j == alpha_k and total_degree(j) < total_degree(k)
            MultiDegree diff{};
            bool ok = true;
            for (int p = 0; p < L.params(); ++p) {
                int d = int(L.degree(k)[p]) - int(L.degree(i)[p]);
                if (d < 0) {
                    ok = false;
                    break;
                }
                diff[p] = static_cast<std::uint8_t>(d);
            }
            if (!ok) continue;
            int j = L.rank_of(diff);
            if (j >= 0) acc += c_[i] * r.c_[j];
        }
        r.c_[k] = -acc / c_[0];
    }
    return r;
}

template <typename S>
Jet<S> Jet<S>::compose(std::span<const S> derivs) const {
    const int d = order();
    if (static_cast<int>(derivs.size()) < d + 1)
        throw JetError("compose needs order+1 derivative values");
    Jet<S> h = *this;
    h.c_[0] = S(0);  // nilpotent part
    Jet<S> result(layout_, derivs[0]);
    Jet<S> hpow(layout_, S(1));
    double fact = 1.0;
    for (int m = 1; m <= d; ++m) {
        hpow = hpow * h;
        fact *= m;
        result += hpow * (derivs[m] / S(fact));
    }
    return result;
}

// ---- elementary functions -------------------------------------------------

namespace detail {
inline void require_positive_real(double v, const char* fn) {
    if (!(v > 0.0)) throw JetError(std::string(fn) + " of a nonpositive real value");
}
inline void require_positive_real(const std::complex<double>& v, const char* fn) {
    if (v == std::complex<double>(0.0)) throw JetError(std::string(fn) + " of zero");
}
}  // namespace detail

template <typename S>
Jet<S> sqrt(const Jet<S>& u) {
    detail::require_positive_real(u.value(), "sqrt");
    const int d = u.order();
    std::vector<S> der(d + 1);
    using std::sqrt;
    S s = sqrt(u.value());
    der[0] = s;
    // f^(m) = (1/2)(1/2-1)...(1/2-m+1) u^(1/2-m)
    S c(1);
    S upow = s;
    for (int m = 1; m <= d; ++m) {
        c *= S(0.5 - (m - 1));
        upow = upow / u.value();
        der[m] = c * upow;
    }
    return u.compose(der);
}

template <typename S>
Jet<S> exp(const Jet<S>& u) {
    const int d = u.order();
    using std::exp;
    std::vector<S> der(d + 1, exp(u.value()));
    return u.compose(der);
}

template <typename S>
Jet<S> log(const Jet<S>& u) {
    if constexpr (!detail::is_complex<S>::value) {
        if (!(u.value() > 0.0)) throw JetError("log of a nonpositive real value");
    } else {
        if (u.value() == S(0)) throw JetError("log of zero");
    }
    const int d = u.order();
    std::vector<S> der(d + 1);
    using std::log;
    der[0] = log(u.value());
    S upow(1);
    double sign = 1.0, fact = 1.0;
    for (int m = 1; m <= d; ++m) {
        upow = upow / u.value();
        if (m > 1) {
            fact *= (m - 1);
        }
        der[m] = S(sign * fact) * upow;
        sign = -sign;
    }
    return u.compose(der);
}

template <typename S>
Jet<S> sin(const Jet<S>& u) {
    const int d = u.order();
    using std::cos;
    using std::sin;
    S s = sin(u.value()), c = cos(u.value());
    std::vector<S> der(d + 1);
    const S cycle[4] = {s, c, -s, -c};
    for (int m = 0; m <= d; ++m) der[m] = cycle[m % 4];
    return u.compose(der);
}

template <typename S>
Jet<S> cos(const Jet<S>& u) {
    const int d = u.order();
    using std::cos;
    using std::sin;
    S s = sin(u.value()), c = cos(u.value());
    std::vector<S> der(d + 1);
    const S cycle[4] = {c, -s, -c, s};
    for (int m = 0; m <= d; ++m) der[m] = cycle[m % 4];
    return u.compose(der);
}

/// u^e with a constant exponent. Integer exponents work for any base
/// (including negative reals); fractional exponents need a positive real
/// or nonzero complex base.
template <typename S>
Jet<S> pow(const Jet<S>& u, double e) {
    const double er = std::round(e);
    if (e == er && std::abs(e) <= 64) {
        int n = static_cast<int>(er);
        if (n == 0) return Jet<S>::constant(u.params(), u.order(), S(1));
        Jet<S> acc = Jet<S>::constant(u.params(), u.order(), S(1));
        Jet<S> base = n > 0 ? u : u.reciprocal();
        for (int i = 0; i < std::abs(n); ++i) acc = acc * base;
        return acc;
    }
    if constexpr (!detail::is_complex<S>::value) {
        if (!(u.value() > 0.0)) throw JetError("pow with fractional exponent needs a positive base");
    } else {
        if (u.value() == S(0)) throw JetError("pow with fractional exponent needs a nonzero base");
    }
    const int d = u.order();
    std::vector<S> der(d + 1);
    using std::pow;
    S c(1);
    for (int m = 0; m <= d; ++m) {
        der[m] = c * pow(u.value(), S(e - m));
        c *= S(e - m);
    }
    return u.compose(der);
}

inline Jet<double> abs(const Jet<double>& u) {
    if (u.value() < 0.0) return -u;
    return u;
}

inline Jet<std::complex<double>> abs(const Jet<std::complex<double>>&) {
    throw JetError("abs is not differentiable over complex scalars");
}

// ---- seeding and partial extraction ---------------------------------------

/// Seed jets at a chart point: m jets with values point[i] and degree-1
/// coefficients directions[:, i] (directions is params x m, row-major).
template <typename S>
std::vector<Jet<S>> jet_lift(std::span<const S> point, int params, std::span<const S> directions,
                             int order) {
    const int m = static_cast<int>(point.size());
    if (static_cast<int>(directions.size()) != params * m)
        throw JetError("jet_lift: directions matrix must be params x point-size");
    std::vector<Jet<S>> out;
    out.reserve(m);
    for (int i = 0; i < m; ++i) {
        std::vector<S> dir(params);
        for (int p = 0; p < params; ++p) dir[p] = directions[p * m + i];
        out.push_back(Jet<S>::variable(params, order, point[i], dir));
    }
    return out;
}

/// Embed a (p, d) jet into a (p + extra_params, d + extra_order) layout,
/// optionally seeding the new trailing parameters at degree one.
template <typename S>
Jet<S> extend(const Jet<S>& j, int extra_params, int extra_order, std::span<const S> seeds = {}) {
    const JetLayout& L = j.layout();
    auto bigger = JetLayout::get(L.params() + extra_params, L.order() + extra_order);
    Jet<S> out(bigger, S(0));
    for (int r = 0; r < L.size(); ++r) {
        MultiDegree alpha = L.degree(r);
        int rr = bigger->rank_of(alpha);
        out.coeff(rr) = j.coeff(r);
    }
    if (!seeds.empty()) {
        if (static_cast<int>(seeds.size()) != extra_params)
            throw JetError("extend: one seed per extra parameter required");
        for (int e = 0; e < extra_params; ++e) {
            MultiDegree alpha{};
            alpha[L.params() + e] = 1;
            out.coeff(bigger->rank_of(alpha)) += seeds[e];
        }
    }
    return out;
}

/// Extract the sub-jet whose trailing parameter appears at exactly degree one,
/// reducing (p+1, d+1) back to (p, d): this is d/d(eps) of the input.
template <typename S>
Jet<S> extract_partial(const Jet<S>& j) {
    const JetLayout& L = j.layout();
    if (L.params() < 1 || L.order() < 1) throw JetError("extract_partial needs params>=1, order>=1");
    auto smaller = JetLayout::get(L.params() - 1, L.order() - 1);
    Jet<S> out(smaller, S(0));
    const int last = L.params() - 1;
    for (int r = 0; r < L.size(); ++r) {
        const MultiDegree& alpha = L.degree(r);
        if (alpha[last] != 1) continue;
        MultiDegree beta = alpha;
        beta[last] = 0;
        bool fits = true;
        for (int p = smaller->params(); p < detail::kMaxJetParams && fits; ++p)
            if (beta[p] != 0) fits = false;
        int rr = fits ? smaller->rank_of(beta) : -1;
        if (rr >= 0) out.coeff(rr) = j.coeff(r);
    }
    return out;
}

/// First t-derivative of a 1-parameter jet, one order lower.
template <typename S>
Jet<S> time_shift(const Jet<S>& j) {
    const JetLayout& L = j.layout();
    if (L.params() != 1 || L.order() < 1) throw JetError("time_shift needs a 1-parameter jet");
    auto smaller = JetLayout::get(1, L.order() - 1);
    Jet<S> out(smaller, S(0));
    for (int m = 0; m < L.order(); ++m) out.coeff(m) = j.coeff(m + 1) * S(double(m + 1));
    return out;
}

/// Partial derivative with respect to one jet parameter, one order lower.
template <typename S>
Jet<S> param_shift(const Jet<S>& j, int which) {
    const JetLayout& L = j.layout();
    if (which < 0 || which >= L.params()) throw JetError("param_shift: parameter out of range");
    if (L.order() < 1) throw JetError("param_shift needs order >= 1");
    auto smaller = JetLayout::get(L.params(), L.order() - 1);
    Jet<S> out(smaller, S(0));
    for (int r = 0; r < smaller->size(); ++r) {
        MultiDegree alpha = smaller->degree(r);
        alpha[which] = static_cast<std::uint8_t>(alpha[which] + 1);
        int rr = L.rank_of(alpha);
        out.coeff(r) = j.coeff(rr) * S(double(alpha[which]));
    }
    return out;
}

/// Copy of the jet truncated to a lower order.
template <typename S>
Jet<S> truncate(const Jet<S>& j, int order) {
    const JetLayout& L = j.layout();
    if (order > L.order()) throw JetError("truncate cannot raise the order");
    if (order == L.order()) return j;
    auto smaller = JetLayout::get(L.params(), order);
    Jet<S> out(smaller, S(0));
    for (int r = 0; r < smaller->size(); ++r) out.coeff(r) = j.coeff(L.rank_of(smaller->degree(r)));
    return out;
}

}  // namespace varik
