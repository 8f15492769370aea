#include "varik/multi_index.hpp"

#include <algorithm>

namespace varik::multi_index {

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / i;
    return r;
}

std::uint64_t lex_rank(std::span<const int> indices, int n) {
    const int k = static_cast<int>(indices.size());
    std::uint64_t rank = 0;
    int prev = -1;
    for (int j = 0; j < k; ++j) {
        if (indices[j] <= prev || indices[j] >= n)
            throw std::invalid_argument("lex_rank: tuple must be strictly increasing within range");
        for (int v = prev + 1; v < indices[j]; ++v) rank += binomial(n - 1 - v, k - 1 - j);
        prev = indices[j];
    }
    return rank;
}

std::vector<int> lex_unrank(std::uint64_t rank, int n, int k) {
    std::vector<int> out(static_cast<std::size_t>(k));
    int prev = -1;
    for (int j = 0; j < k; ++j) {
        int v = prev + 1;
        while (true) {
            std::uint64_t block = binomial(n - 1 - v, k - 1 - j);
            if (rank < block) break;
            rank -= block;
            ++v;
            if (v >= n) throw std::out_of_range("lex_unrank: rank too large");
        }
        out[static_cast<std::size_t>(j)] = v;
        prev = v;
    }
    return out;
}

std::vector<std::vector<int>> all_ordered(int n, int k) {
    std::vector<std::vector<int>> out;
    const std::uint64_t total = binomial(n, k);
    out.reserve(total);
    for (std::uint64_t r = 0; r < total; ++r) out.push_back(lex_unrank(r, n, k));
    return out;
}

int sort_sign(std::vector<int>& indices) {
    int sign = 1;
    // insertion sort, counting transpositions
    for (std::size_t i = 1; i < indices.size(); ++i) {
        int v = indices[i];
        std::size_t j = i;
        while (j > 0 && indices[j - 1] > v) {
            indices[j] = indices[j - 1];
            --j;
            sign = -sign;
        }
        indices[j] = v;
    }
    for (std::size_t i = 1; i < indices.size(); ++i)
        if (indices[i] == indices[i - 1]) return 0;
    return sign;
}

int insert_sign(int value, std::span<const int> sorted, std::vector<int>& out) {
    out.clear();
    out.reserve(sorted.size() + 1);
    int sign = 1;
    bool placed = false;
    for (int v : sorted) {
        if (v == value) return 0;
        if (!placed && v > value) {
            out.push_back(value);
            placed = true;
        }
        if (!placed) sign = -sign;
        out.push_back(v);
    }
    if (!placed) out.push_back(value);
    // sign = (-1)^(position of value) with position counted from the front
    return sign;
}

}  // namespace varik::multi_index
