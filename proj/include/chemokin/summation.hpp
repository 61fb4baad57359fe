#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace chemokin {

/// Pairwise (cascade) summation with a fixed recursion tree.
///
/// The split points depend only on the length of the input, never on the
/// thread count, so repeated calls on the same data are bitwise identical.
/// Error grows like O(eps * log n) rather than O(eps * n).
double pairwise_sum(std::span<const double> values);

/// Pairwise sum of f(i) for i in [0, n), same fixed tree as pairwise_sum.
template <class F>
double pairwise_sum_of(std::size_t n, F&& f) {
    constexpr std::size_t kBlock = 16;
    if (n <= kBlock) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += f(i);
        return s;
    }
    struct Rec {
        F& f;
        double operator()(std::size_t lo, std::size_t hi) const {
            if (hi - lo <= kBlock) {
                double s = 0.0;
                for (std::size_t i = lo; i < hi; ++i) s += f(i);
                return s;
            }
            const std::size_t mid = lo + (hi - lo) / 2;
            return (*this)(lo, mid) + (*this)(mid, hi);
        }
    };
    return Rec{f}(0, n);
}

/// 64-bit FNV-1a, used for scenario and field fingerprints.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t fnv1a(std::span<const double> values, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace chemokin
