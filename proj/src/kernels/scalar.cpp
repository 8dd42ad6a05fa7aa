#include "tpms/kernels.hpp"

#include "tpms/weierstrass.hpp"

namespace tpms::kernels {

namespace {

void gemm_n4_scalar(const double* a, std::size_t rows, std::size_t inner, const double* x, double* y)
{
    for (std::size_t i = 0; i < rows; ++i) {
        double acc[4] = {0.0, 0.0, 0.0, 0.0};
        const double* arow = a + i * inner;
        for (std::size_t j = 0; j < inner; ++j) {
            const double s = arow[j];
            const double* xr = x + 4 * j;
            acc[0] += s * xr[0];
            acc[1] += s * xr[1];
            acc[2] += s * xr[2];
            acc[3] += s * xr[3];
        }
        for (int c = 0; c < 4; ++c)
            y[4 * i + c] = acc[c];
    }
}

void gemv_scalar(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y)
{
    for (std::size_t i = 0; i < rows; ++i) {
        const double* arow = a + i * cols;
        double acc = 0.0;
        for (std::size_t j = 0; j < cols; ++j)
            acc += arow[j] * x[j];
        y[i] = acc;
    }
}

void offset_d2_scalar(const double* re, const double* im, std::size_t count, double* out)
{
    for (std::size_t k = 0; k < count; ++k) {
        const auto jet = weierstrass::frame_jet({re[k], im[k]}, 0.0);
        const Vec3 d2 = weierstrass::offset_second_derivatives(jet, 0.0);
        out[3 * k + 0] = d2[0];
        out[3 * k + 1] = d2[1];
        out[3 * k + 2] = d2[2];
    }
}

}  // namespace

const KernelTable& scalar_table()
{
    static const KernelTable table{"scalar", gemm_n4_scalar, gemv_scalar, offset_d2_scalar};
    return table;
}

}  // namespace tpms::kernels
