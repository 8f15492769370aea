#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace varik {

/// Seeded rejection sampler over a coordinate box. Deterministic for a fixed
/// seed; the exclusion predicate (when set) must accept every returned point.
struct SampleSpec {
    std::uint64_t seed = 1;
    int count = 1;
    std::vector<std::pair<double, double>> box;
    std::string exclusion_name;  // informational, e.g. "y0_nonzero"
    std::function<bool(const std::vector<double>&)> exclusion;
};

std::vector<std::vector<double>> sample_points(const SampleSpec& spec);

/// Predicate requiring |point[index]| >= floor for each listed coordinate.
std::function<bool(const std::vector<double>&)> away_from_zero(std::vector<int> indices,
                                                               double floor = 1e-3);

}  // namespace varik
