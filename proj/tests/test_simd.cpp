#include <doctest.h>

#include <random>
#include <vector>

#include "hd/simd.hpp"

using namespace hd::simd;

namespace {

std::vector<const Kernels*> available() {
    std::vector<const Kernels*> out{&kernels_for(Isa::scalar)};
    if (cpu_supports(Isa::avx2)) out.push_back(&kernels_for(Isa::avx2));
    return out;
}

}  // namespace

TEST_CASE("active kernels are one of the available variants") {
    MESSAGE("active isa: " << isa_name(active_isa()));
    CHECK((active_isa() == Isa::scalar || cpu_supports(active_isa())));
}

TEST_CASE("argmax picks the first maximum") {
    for (const auto* k : available()) {
        std::vector<double> v{0.2, 0.5, 0.3};
        CHECK(k->argmax(v.data(), v.size()) == 1);
        std::vector<double> tie(37, 0.25);
        CHECK(k->argmax(tie.data(), tie.size()) == 0);
        tie[20] = 0.5;
        tie[33] = 0.5;
        CHECK(k->argmax(tie.data(), tie.size()) == 20);
        CHECK(k->argmax(nullptr, 0) == 0);
    }
}

TEST_CASE("variants agree with the scalar reference on random inputs") {
    std::mt19937_64 rng(11);
    const auto& ref = kernels_for(Isa::scalar);
    for (const auto* k : available()) {
        for (int trial = 0; trial < 2000; ++trial) {
            const std::size_t n = rng() % 300;
            std::vector<double> v(n);
            // Few distinct values so ties are frequent.
            for (auto& x : v) x = static_cast<double>(rng() % 7) * 0.125;
            CHECK(k->argmax(v.data(), n) == ref.argmax(v.data(), n));

            std::vector<std::uint32_t> a(n), b(n);
            for (std::size_t i = 0; i < n; ++i) a[i] = b[i] = static_cast<std::uint32_t>(rng() % 5);
            if (n > 0 && rng() % 3 != 0) b[rng() % n] ^= 1u + static_cast<std::uint32_t>(rng() % 3);
            CHECK(k->mismatch(a.data(), b.data(), n) == ref.mismatch(a.data(), b.data(), n));
            CHECK(k->count_equal(a.data(), n, 2) == ref.count_equal(a.data(), n, 2));

            std::vector<double> f1(n, -1.0), f2(n, -1.0);
            k->fill(f1.data(), n, 0.375);
            ref.fill(f2.data(), n, 0.375);
            CHECK(f1 == f2);
        }
    }
}

TEST_CASE("mismatch of identical spans is their length") {
    std::vector<std::uint32_t> a(1000, 9);
    for (const auto* k : available()) CHECK(k->mismatch(a.data(), a.data(), a.size()) == 1000);
    CHECK(mismatch(std::span<const std::uint32_t>(a).first(10), std::span<const std::uint32_t>(a)) == 10);
}
