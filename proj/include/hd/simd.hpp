#pragma once

// Data-parallel inner loops used by the model and the suffix array.
//
// Every kernel has a portable scalar reference in hd::simd::scalar. On x86-64
// an AVX2 variant is compiled separately and picked at first use when the CPU
// supports it. Setting HD_SIMD=scalar in the environment forces the reference
// path. Variants must return bit-identical results.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace hd::simd {

enum class Isa { scalar, avx2 };

struct Kernels {
    // Index of the first maximum element. Empty input returns 0.
    std::size_t (*argmax)(const double* v, std::size_t n);
    // Index of the first position where a and b differ, or n.
    std::size_t (*mismatch)(const std::uint32_t* a, const std::uint32_t* b, std::size_t n);
    void (*fill)(double* v, std::size_t n, double value);
    // Number of elements equal to value.
    std::size_t (*count_equal)(const std::uint32_t* v, std::size_t n, std::uint32_t value);
};

namespace scalar {
std::size_t argmax(const double* v, std::size_t n);
std::size_t mismatch(const std::uint32_t* a, const std::uint32_t* b, std::size_t n);
void fill(double* v, std::size_t n, double value);
std::size_t count_equal(const std::uint32_t* v, std::size_t n, std::uint32_t value);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define HD_HAVE_AVX2_KERNELS 1
namespace avx2 {
std::size_t argmax(const double* v, std::size_t n);
std::size_t mismatch(const std::uint32_t* a, const std::uint32_t* b, std::size_t n);
void fill(double* v, std::size_t n, double value);
std::size_t count_equal(const std::uint32_t* v, std::size_t n, std::uint32_t value);
}  // namespace avx2
#endif

bool cpu_supports(Isa isa);
const Kernels& kernels_for(Isa isa);

// Kernels selected for this process.
const Kernels& active();
Isa active_isa();
std::string_view isa_name(Isa isa);

inline std::size_t argmax(std::span<const double> v) { return active().argmax(v.data(), v.size()); }

inline std::size_t mismatch(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
    const std::size_t n = a.size() < b.size() ? a.size() : b.size();
    return active().mismatch(a.data(), b.data(), n);
}

inline void fill(std::span<double> v, double value) { active().fill(v.data(), v.size(), value); }

inline std::size_t count_equal(std::span<const std::uint32_t> v, std::uint32_t value) {
    return active().count_equal(v.data(), v.size(), value);
}

}  // namespace hd::simd
