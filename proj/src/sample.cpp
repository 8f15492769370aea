#include "varik/sample.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace varik {

std::vector<std::vector<double>> sample_points(const SampleSpec& spec) {
    if (spec.count < 1) throw std::invalid_argument("sample_points: count must be >= 1");
    for (const auto& [lo, hi] : spec.box)
        if (!(lo <= hi)) throw std::invalid_argument("sample_points: empty box interval");
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> out;
    out.reserve(spec.count);
    const long long max_draws = 1000LL * spec.count;
    long long draws = 0;
    std::vector<double> p(spec.box.size());
    while (static_cast<int>(out.size()) < spec.count) {
        if (draws++ >= max_draws)
            throw std::runtime_error("sample_points: exclusion \"" + spec.exclusion_name +
                                     "\" unsatisfiable after " + std::to_string(max_draws) +
                                     " draws");
        for (std::size_t i = 0; i < spec.box.size(); ++i)
            p[i] = spec.box[i].first + (spec.box[i].second - spec.box[i].first) * unit(rng);
        if (spec.exclusion && !spec.exclusion(p)) continue;
        out.push_back(p);
    }
    return out;
}

std::function<bool(const std::vector<double>&)> away_from_zero(std::vector<int> indices,
                                                               double floor) {
    return [indices = std::move(indices), floor](const std::vector<double>& p) {
        for (int i : indices)
            if (std::abs(p[static_cast<std::size_t>(i)]) < floor) return false;
        return true;
    };
}

}  // namespace varik
