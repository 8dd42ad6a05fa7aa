#pragma once

// Data-parallel inner loops. Each kernel exists as a scalar reference and,
// on x86-64 builds, as an AVX2+FMA variant chosen at runtime. This header is
// included by the AVX2 translation unit, so it must stay free of Eigen and of
// inline library templates.

#include <cstddef>

namespace tpms::kernels {

struct KernelTable {
    const char* name;

    /// y[rows x 4] = a[rows x inner] * x[inner x 4]; all row-major.
    void (*gemm_n4)(const double* a, std::size_t rows, std::size_t inner, const double* x, double* y);

    /// y[rows] = a[rows x cols] * x[cols]; a row-major.
    void (*gemv)(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y);

    /// Second derivatives (x'', y'', z'') of the signed unit normal of the
    /// Weierstrass frame at each tau = re[k] + i im[k]; out is count x 3.
    /// Callers must keep tau inside the branch-free region.
    void (*offset_d2)(const double* re, const double* im, std::size_t count, double* out);
};

const KernelTable& scalar_table();

/// nullptr when the AVX2 variants were not compiled in.
const KernelTable* avx2_table();

bool cpu_supports_avx2();

/// The table used by the library. TPMS_CPIA_SIMD=scalar forces the reference
/// kernels; otherwise AVX2 is used when compiled in and supported by the CPU.
const KernelTable& active();

}  // namespace tpms::kernels
