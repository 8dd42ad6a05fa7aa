#include "tpms/kernels.hpp"
#include "tpms/weierstrass.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

using namespace tpms;

namespace {

const kernels::KernelTable* simd_or_skip()
{
    const kernels::KernelTable* t = kernels::avx2_table();
    if (t == nullptr)
        SKIP("AVX2 kernels not compiled in");
    if (!kernels::cpu_supports_avx2())
        SKIP("CPU lacks AVX2/FMA");
    return t;
}

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& e : v)
        e = uni(rng);
    return v;
}

}  // namespace

TEST_CASE("scalar table is always available")
{
    CHECK(std::string(kernels::scalar_table().name) == "scalar");
    CHECK(kernels::active().gemm_n4 != nullptr);
}

TEST_CASE("scalar gemm_n4 is a plain product")
{
    const double a[] = {1, 2, 3, 4, 5, 6};                       // 2 x 3
    const double x[] = {1, 0, 0, 1, 0, 1, 0, 1, 0, 0, 1, 1};      // 3 x 4
    double y[8];
    kernels::scalar_table().gemm_n4(a, 2, 3, x, y);
    const double want[] = {1, 2, 3, 6, 4, 5, 6, 15};
    for (int k = 0; k < 8; ++k)
        CHECK(y[k] == want[k]);
}

TEST_CASE("scalar offset kernel matches the closed form")
{
    const double re[] = {0.1, -0.2, 0.0};
    const double im[] = {0.05, 0.3, 0.0};
    double out[9];
    kernels::scalar_table().offset_d2(re, im, 3, out);
    for (int k = 0; k < 3; ++k) {
        const Vec3 want = weierstrass::offset_second_derivatives(weierstrass::frame_jet({re[k], im[k]}));
        for (int c = 0; c < 3; ++c)
            CHECK(out[3 * k + c] == want[c]);
    }
}

TEST_CASE("AVX2 gemm_n4 matches scalar for all row/inner shapes")
{
    const auto* simd = simd_or_skip();
    std::mt19937_64 rng(1);
    for (std::size_t rows : {1u, 2u, 3u, 7u, 64u, 65u}) {
        for (std::size_t inner : {1u, 3u, 16u, 49u}) {
            const auto a = random_vec(rows * inner, rng);
            const auto x = random_vec(inner * 4, rng);
            std::vector<double> y1(rows * 4), y2(rows * 4);
            kernels::scalar_table().gemm_n4(a.data(), rows, inner, x.data(), y1.data());
            simd->gemm_n4(a.data(), rows, inner, x.data(), y2.data());
            for (std::size_t k = 0; k < y1.size(); ++k)
                CHECK(std::abs(y1[k] - y2[k]) <= 1e-13 * (1.0 + std::abs(y1[k])));
        }
    }
}

TEST_CASE("AVX2 gemv matches scalar including tails")
{
    const auto* simd = simd_or_skip();
    std::mt19937_64 rng(2);
    for (std::size_t rows : {1u, 5u, 64u}) {
        for (std::size_t cols : {1u, 3u, 4u, 7u, 8u, 9u, 15u, 128u, 131u}) {
            const auto a = random_vec(rows * cols, rng);
            const auto x = random_vec(cols, rng);
            std::vector<double> y1(rows), y2(rows);
            kernels::scalar_table().gemv(a.data(), rows, cols, x.data(), y1.data());
            simd->gemv(a.data(), rows, cols, x.data(), y2.data());
            for (std::size_t k = 0; k < rows; ++k)
                CHECK(std::abs(y1[k] - y2[k]) <= 1e-13 * (1.0 + std::abs(y1[k])));
        }
    }
}

TEST_CASE("AVX2 offset kernel matches scalar across the safe disk")
{
    const auto* simd = simd_or_skip();
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (std::size_t count : {1u, 3u, 4u, 5u, 17u, 1000u}) {
        std::vector<double> re(count), im(count);
        for (std::size_t k = 0; k < count; ++k) {
            const auto t = std::polar(weierstrass::kSafeRadius * std::sqrt(uni(rng)), 2.0 * std::numbers::pi * uni(rng));
            re[k] = t.real();
            im[k] = t.imag();
        }
        std::vector<double> o1(count * 3), o2(count * 3);
        kernels::scalar_table().offset_d2(re.data(), im.data(), count, o1.data());
        simd->offset_d2(re.data(), im.data(), count, o2.data());
        for (std::size_t k = 0; k < o1.size(); ++k)
            CHECK(std::abs(o1[k] - o2[k]) <= 1e-10 * (1.0 + std::abs(o1[k])));
    }
}

TEST_CASE("AVX2 square root follows the principal branch on the cut")
{
    const auto* simd = simd_or_skip();
    // Points with tau^8 - 14 tau^4 + 1 on or near the negative real axis.
    const double re[] = {0.0, 0.3, 0.0, -0.3, 0.45, 0.31};
    const double im[] = {0.3, 0.0, -0.3, 0.0, 0.45, 0.31};
    double o1[18], o2[18];
    kernels::scalar_table().offset_d2(re, im, 6, o1);
    simd->offset_d2(re, im, 6, o2);
    for (int k = 0; k < 18; ++k)
        CHECK(std::abs(o1[k] - o2[k]) <= 1e-10 * (1.0 + std::abs(o1[k])));
}
