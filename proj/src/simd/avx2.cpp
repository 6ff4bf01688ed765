// Compiled with -mavx2; only entered after a runtime CPU check.
#include "hd/simd.hpp"

#include <immintrin.h>

#include <bit>

namespace hd::simd::avx2 {

std::size_t argmax(const double* v, std::size_t n) {
    if (n < 8) return scalar::argmax(v, n);

    // Pass 1: the maximum value. max is exact, so lane order does not matter.
    __m256d acc0 = _mm256_loadu_pd(v);
    __m256d acc1 = _mm256_loadu_pd(v + 4);
    std::size_t i = 8;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_max_pd(acc0, _mm256_loadu_pd(v + i));
        acc1 = _mm256_max_pd(acc1, _mm256_loadu_pd(v + i + 4));
    }
    acc0 = _mm256_max_pd(acc0, acc1);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc0);
    double best = lanes[0];
    for (int k = 1; k < 4; ++k) best = lanes[k] > best ? lanes[k] : best;
    for (; i < n; ++i) best = v[i] > best ? v[i] : best;

    // Pass 2: first index holding it.
    const __m256d target = _mm256_set1_pd(best);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(v + j), target, _CMP_EQ_OQ));
        if (mask != 0) return j + static_cast<std::size_t>(std::countr_zero(static_cast<unsigned>(mask)));
    }
    for (; j < n; ++j) {
        if (v[j] == best) return j;
    }
    return 0;
}

std::size_t mismatch(const std::uint32_t* a, const std::uint32_t* b, std::size_t n) {
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
        const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
        const unsigned eq = static_cast<unsigned>(_mm256_movemask_ps(_mm256_castsi256_ps(_mm256_cmpeq_epi32(va, vb))));
        if (eq != 0xFFu) return i + static_cast<std::size_t>(std::countr_one(eq));
    }
    return i + scalar::mismatch(a + i, b + i, n - i);
}

void fill(double* v, std::size_t n, double value) {
    const __m256d x = _mm256_set1_pd(value);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(v + i, x);
    for (; i < n; ++i) v[i] = value;
}

std::size_t count_equal(const std::uint32_t* v, std::size_t n, std::uint32_t value) {
    const __m256i x = _mm256_set1_epi32(static_cast<int>(value));
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    // Lane counters hold at most 2^31 - 1 subtractions of -1 before wrapping.
    std::size_t total = 0;
    std::size_t block = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256i eq = _mm256_cmpeq_epi32(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(v + i)), x);
        acc = _mm256_sub_epi32(acc, eq);
        if (++block == (1u << 30)) {
            alignas(32) std::uint32_t lanes[8];
            _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
            for (auto lane : lanes) total += lane;
            acc = _mm256_setzero_si256();
            block = 0;
        }
    }
    alignas(32) std::uint32_t lanes[8];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
    for (auto lane : lanes) total += lane;
    return total + scalar::count_equal(v + i, n - i, value);
}

}  // namespace hd::simd::avx2
