#include "varik/jet.hpp"

#include <functional>
#include <map>
#include <unordered_map>

namespace varik {

namespace {

void enumerate_degrees(int params, int order, std::vector<MultiDegree>& out) {
    // graded-lexicographic: total degree ascending, then lexicographic with
    // the first parameter most significant.
    for (int total = 0; total <= order; ++total) {
        std::vector<int> stack(params, 0);
        std::function<void(int, int)> rec = [&](int idx, int remaining) {
            if (idx == params - 1) {
                stack[idx] = remaining;
                MultiDegree d{};
                for (int p = 0; p < params; ++p) d[p] = static_cast<std::uint8_t>(stack[p]);
                out.push_back(d);
                return;
            }
            for (int v = remaining; v >= 0; --v) {
                stack[idx] = v;
                rec(idx + 1, remaining - v);
            }
        };
        rec(0, total);
    }
}

std::uint64_t pack_degree(const MultiDegree& alpha) {
    std::uint64_t key = 0;
    for (int p = 0; p < detail::kMaxJetParams; ++p)
        key |= static_cast<std::uint64_t>(alpha[p] & 0xF) << (4 * p);
    return key;
}

}  // namespace

JetLayout::JetLayout(int params, int order) : params_(params), order_(order) {
    if (params < 1 || params > detail::kMaxJetParams)
        throw JetError("jet parameter count out of range");
    if (order < 0 || order > detail::kMaxJetOrder + 4)
        throw JetError("jet order out of range");
    enumerate_degrees(params, order, degrees_);
    total_degree_.resize(degrees_.size());
    factorial_.resize(degrees_.size());
    for (std::size_t r = 0; r < degrees_.size(); ++r) {
        int td = 0;
        double f = 1.0;
        for (int p = 0; p < params; ++p) {
            td += degrees_[r][p];
            for (int v = 2; v <= degrees_[r][p]; ++v) f *= v;
        }
        total_degree_[r] = td;
        factorial_[r] = f;
    }
    for (std::size_t r = 0; r < degrees_.size(); ++r)
        rank_index_.emplace(pack_degree(degrees_[r]), static_cast<int>(r));

    const int n = size();
    product_rank_.assign(static_cast<std::size_t>(n) * n, -1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (total_degree_[i] + total_degree_[j] > order) continue;
            MultiDegree sum{};
            for (int p = 0; p < params; ++p)
                sum[p] = static_cast<std::uint8_t>(degrees_[i][p] + degrees_[j][p]);
            product_rank_[static_cast<std::size_t>(i) * n + j] = rank_of(sum);
        }
    }
}

int JetLayout::rank_of(const MultiDegree& alpha) const {
    int td = 0;
    for (int p = 0; p < params_; ++p) td += alpha[p];
    for (int p = params_; p < detail::kMaxJetParams; ++p)
        if (alpha[p] != 0) return -1;
    if (td > order_) return -1;
    auto it = rank_index_.find(pack_degree(alpha));
    return it == rank_index_.end() ? -1 : it->second;
}

std::shared_ptr<const JetLayout> JetLayout::get(int params, int order) {
    static std::mutex mu;
    static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(params, order);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    auto layout = std::shared_ptr<const JetLayout>(new JetLayout(params, order));
    cache.emplace(key, layout);
    return layout;
}

}  // namespace varik
