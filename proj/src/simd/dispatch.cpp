#include "hd/simd.hpp"

#include <cstdlib>
#include <cstring>

namespace hd::simd {

namespace {

constexpr Kernels kScalar{&scalar::argmax, &scalar::mismatch, &scalar::fill, &scalar::count_equal};

#ifdef HD_HAVE_AVX2_KERNELS
constexpr Kernels kAvx2{&avx2::argmax, &avx2::mismatch, &avx2::fill, &avx2::count_equal};
#endif

Isa pick_isa() {
    const char* forced = std::getenv("HD_SIMD");
    if (forced != nullptr && std::strcmp(forced, "scalar") == 0) return Isa::scalar;
    if (cpu_supports(Isa::avx2)) return Isa::avx2;
    return Isa::scalar;
}

}  // namespace

bool cpu_supports(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2:
#if defined(HD_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

const Kernels& kernels_for(Isa isa) {
#ifdef HD_HAVE_AVX2_KERNELS
    if (isa == Isa::avx2 && cpu_supports(Isa::avx2)) return kAvx2;
#endif
    (void)isa;
    return kScalar;
}

Isa active_isa() {
    static const Isa isa = pick_isa();
    return isa;
}

const Kernels& active() {
    static const Kernels& k = kernels_for(active_isa());
    return k;
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

}  // namespace hd::simd
