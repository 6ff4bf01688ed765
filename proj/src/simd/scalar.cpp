#include "hd/simd.hpp"

namespace hd::simd::scalar {

std::size_t argmax(const double* v, std::size_t n) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

std::size_t mismatch(const std::uint32_t* a, const std::uint32_t* b, std::size_t n) {
    std::size_t i = 0;
    while (i < n && a[i] == b[i]) ++i;
    return i;
}

void fill(double* v, std::size_t n, double value) {
    for (std::size_t i = 0; i < n; ++i) v[i] = value;
}

std::size_t count_equal(const std::uint32_t* v, std::size_t n, std::uint32_t value) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) count += v[i] == value;
    return count;
}

}  // namespace hd::simd::scalar
