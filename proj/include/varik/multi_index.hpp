#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace varik {

/// Ordered multi-index machinery for Lambda^k coordinates. Indices are
/// 0-based positions into a chart axis list; keys stored by the form and
/// multivector code are strictly increasing tuples.
namespace multi_index {

std::uint64_t binomial(int n, int k);

/// Lexicographic rank of a strictly increasing tuple among all k-subsets of
/// {0,...,n-1}; rank(unrank(r)) == r.
std::uint64_t lex_rank(std::span<const int> indices, int n);

std::vector<int> lex_unrank(std::uint64_t rank, int n, int k);

/// All strictly increasing k-tuples over {0,...,n-1} in lexicographic order.
std::vector<std::vector<int>> all_ordered(int n, int k);

/// Sorts a tuple in place and returns the permutation sign; 0 on repeats.
int sort_sign(std::vector<int>& indices);

/// Sign of inserting `value` into the sorted tuple `sorted` (which must not
/// contain it): (-1)^(number of entries smaller than value... counted from
/// the front insertion position). Returns the merged tuple through `out`.
int insert_sign(int value, std::span<const int> sorted, std::vector<int>& out);

}  // namespace multi_index

/// Determinant of the k x k submatrix of a row-major (m x k) matrix selecting
/// `rows`; cofactor expansion for k <= 3, partially pivoted LU for k >= 4.
template <typename S>
S minor_determinant(std::span<const S> matrix, int cols, std::span<const int> rows) {
    const int k = static_cast<int>(rows.size());
    if (cols < k) throw std::invalid_argument("minor_determinant: need at least k columns");
    auto at = [&](int r, int c) -> S { return matrix[static_cast<std::size_t>(rows[r]) * cols + c]; };
    if (k == 0) return S(1);
    if (k == 1) return at(0, 0);
    if (k == 2) return at(0, 0) * at(1, 1) - at(0, 1) * at(1, 0);
    if (k == 3)
        return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
               at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
               at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
    // LU with partial pivoting by modulus
    std::vector<S> a(static_cast<std::size_t>(k) * k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < k; ++c) a[static_cast<std::size_t>(r) * k + c] = at(r, c);
    S det(1);
    for (int col = 0; col < k; ++col) {
        int pivot = col;
        double best = std::abs(a[static_cast<std::size_t>(col) * k + col]);
        for (int r = col + 1; r < k; ++r) {
            double m = std::abs(a[static_cast<std::size_t>(r) * k + col]);
            if (m > best) {
                best = m;
                pivot = r;
            }
        }
        if (best == 0.0) return S(0);
        if (pivot != col) {
            for (int c = 0; c < k; ++c)
                std::swap(a[static_cast<std::size_t>(pivot) * k + c],
                          a[static_cast<std::size_t>(col) * k + c]);
            det = -det;
        }
        const S d = a[static_cast<std::size_t>(col) * k + col];
        det *= d;
        for (int r = col + 1; r < k; ++r) {
            const S f = a[static_cast<std::size_t>(r) * k + col] / d;
            for (int c = col; c < k; ++c)
                a[static_cast<std::size_t>(r) * k + c] -= f * a[static_cast<std::size_t>(col) * k + c];
        }
    }
    return det;
}

}  // namespace varik
