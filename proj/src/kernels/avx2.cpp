// AVX2 + FMA variants of the kernels in tpms/kernels.hpp. This translation unit
// is compiled with -mavx2 -mfma and is only entered after a CPUID check, so it
// uses intrinsics and file-local helpers only.

#include "tpms/kernels.hpp"

#include <immintrin.h>

namespace tpms::kernels {

namespace {

void gemm_n4_avx2(const double* a, std::size_t rows, std::size_t inner, const double* x, double* y)
{
    std::size_t i = 0;
    for (; i + 2 <= rows; i += 2) {
        const double* a0 = a + i * inner;
        const double* a1 = a0 + inner;
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        for (std::size_t j = 0; j < inner; ++j) {
            const __m256d xr = _mm256_loadu_pd(x + 4 * j);
            acc0 = _mm256_fmadd_pd(_mm256_broadcast_sd(a0 + j), xr, acc0);
            acc1 = _mm256_fmadd_pd(_mm256_broadcast_sd(a1 + j), xr, acc1);
        }
        _mm256_storeu_pd(y + 4 * i, acc0);
        _mm256_storeu_pd(y + 4 * (i + 1), acc1);
    }
    for (; i < rows; ++i) {
        const double* a0 = a + i * inner;
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t j = 0; j < inner; ++j)
            acc = _mm256_fmadd_pd(_mm256_broadcast_sd(a0 + j), _mm256_loadu_pd(x + 4 * j), acc);
        _mm256_storeu_pd(y + 4 * i, acc);
    }
}

inline double hsum(__m256d v)
{
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void gemv_avx2(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y)
{
    for (std::size_t i = 0; i < rows; ++i) {
        const double* arow = a + i * cols;
        __m256d acc0 = _mm256_setzero_pd();
        __m256d acc1 = _mm256_setzero_pd();
        std::size_t j = 0;
        for (; j + 8 <= cols; j += 8) {
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + j), _mm256_loadu_pd(x + j), acc0);
            acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + j + 4), _mm256_loadu_pd(x + j + 4), acc1);
        }
        for (; j + 4 <= cols; j += 4)
            acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(arow + j), _mm256_loadu_pd(x + j), acc0);
        double acc = hsum(_mm256_add_pd(acc0, acc1));
        for (; j < cols; ++j)
            acc += arow[j] * x[j];
        y[i] = acc;
    }
}

// Four complex numbers, split storage.
struct C4 {
    __m256d re;
    __m256d im;
};

inline __m256d splat(double v) { return _mm256_set1_pd(v); }

inline C4 add(C4 a, C4 b) { return {_mm256_add_pd(a.re, b.re), _mm256_add_pd(a.im, b.im)}; }
inline C4 sub(C4 a, C4 b) { return {_mm256_sub_pd(a.re, b.re), _mm256_sub_pd(a.im, b.im)}; }
inline C4 scale(C4 a, double s) { return {_mm256_mul_pd(a.re, splat(s)), _mm256_mul_pd(a.im, splat(s))}; }
inline C4 times_i(C4 a) { return {_mm256_sub_pd(_mm256_setzero_pd(), a.im), a.re}; }
inline C4 add_real(C4 a, double s) { return {_mm256_add_pd(a.re, splat(s)), a.im}; }
inline C4 real_minus(double s, C4 a) { return {_mm256_sub_pd(splat(s), a.re), _mm256_sub_pd(_mm256_setzero_pd(), a.im)}; }

inline C4 mul(C4 a, C4 b)
{
    return {_mm256_fmsub_pd(a.re, b.re, _mm256_mul_pd(a.im, b.im)),
            _mm256_fmadd_pd(a.re, b.im, _mm256_mul_pd(a.im, b.re))};
}

inline C4 recip(C4 b)
{
    const __m256d d = _mm256_fmadd_pd(b.re, b.re, _mm256_mul_pd(b.im, b.im));
    return {_mm256_div_pd(b.re, d), _mm256_div_pd(_mm256_sub_pd(_mm256_setzero_pd(), b.im), d)};
}

// Principal square root.
inline C4 csqrt(C4 z)
{
    const __m256d sign_mask = splat(-0.0);
    const __m256d abs_re = _mm256_andnot_pd(sign_mask, z.re);
    const __m256d abs_im = _mm256_andnot_pd(sign_mask, z.im);
    const __m256d mod = _mm256_sqrt_pd(_mm256_fmadd_pd(z.re, z.re, _mm256_mul_pd(z.im, z.im)));
    const __m256d t = _mm256_sqrt_pd(_mm256_mul_pd(_mm256_add_pd(mod, abs_re), splat(0.5)));
    const __m256d other = _mm256_div_pd(abs_im, _mm256_add_pd(t, t));
    // re >= 0: (t, im / 2t); re < 0: (|im| / 2t, copysign(t, im)).
    const __m256d neg = _mm256_cmp_pd(z.re, _mm256_setzero_pd(), _CMP_LT_OQ);
    const __m256d im_sign = _mm256_and_pd(sign_mask, z.im);
    const __m256d re_out = _mm256_blendv_pd(t, other, neg);
    const __m256d im_mag = _mm256_blendv_pd(other, t, neg);
    return {re_out, _mm256_or_pd(im_mag, im_sign)};
}

struct Real3 {
    __m256d v[3];
};

inline __m256d fms2(__m256d a, __m256d b, __m256d c, __m256d d)
{
    // a*b - c*d
    return _mm256_fmsub_pd(a, b, _mm256_mul_pd(c, d));
}

void offset_d2_block(const double* re, const double* im, double* xs, double* ys, double* zs)
{
    const C4 tau{_mm256_loadu_pd(re), _mm256_loadu_pd(im)};
    const C4 t2 = mul(tau, tau);
    const C4 t4 = mul(t2, t2);
    const C4 t3 = mul(t2, tau);
    const C4 s = add_real(sub(mul(t4, t4), scale(t4, 14.0)), 1.0);
    const C4 rs = csqrt(s);
    const C4 s32 = mul(s, rs);
    const C4 s52 = mul(s, s32);
    const C4 irs = recip(rs);
    const C4 is32 = recip(s32);
    const C4 is52 = recip(s52);
    const C4 g = sub(scale(mul(t4, t3), 8.0), scale(t3, 56.0));
    const C4 gp = sub(scale(mul(t4, t2), 56.0), scale(t2, 168.0));

    const C4 one_minus = real_minus(1.0, t2);
    const C4 one_plus = add_real(t2, 1.0);
    const C4 g_is32 = mul(g, is32);
    const C4 tau_irs = mul(tau, irs);
    const C4 tau_g_is32 = mul(tau, g_is32);

    C4 f[3], f1[3], f2[3];
    f[0] = mul(one_minus, irs);
    f[1] = times_i(mul(one_plus, irs));
    f[2] = scale(tau_irs, 2.0);

    f1[0] = sub(scale(mul(one_minus, g_is32), -0.5), scale(tau_irs, 2.0));
    f1[1] = times_i(sub(scale(tau_irs, 2.0), scale(mul(one_plus, g_is32), 0.5)));
    f1[2] = sub(scale(irs, 2.0), tau_g_is32);

    const C4 h = sub(scale(mul(mul(g, g), is52), 0.75), scale(mul(gp, is32), 0.5));
    f2[0] = add(add(scale(irs, -2.0), scale(tau_g_is32, 2.0)), mul(one_minus, h));
    f2[1] = times_i(add(sub(scale(irs, 2.0), scale(tau_g_is32, 2.0)), mul(one_plus, h)));
    f2[2] = sub(scale(mul(tau, h), 2.0), scale(g_is32, 2.0));

    Real3 p, q, dp, dq, ddp, ddq;
    for (int k = 0; k < 3; ++k) {
        p.v[k] = f[k].re;
        q.v[k] = f[k].im;
        dp.v[k] = f1[k].re;
        dq.v[k] = f1[k].im;
        ddp.v[k] = f2[k].re;
        ddq.v[k] = f2[k].im;
    }

    auto minor = [&](int a, int b) { return fms2(p.v[a], q.v[b], p.v[b], q.v[a]); };
    auto minor_d1 = [&](int a, int b) {
        const __m256d l = _mm256_fmadd_pd(dp.v[a], q.v[b], _mm256_mul_pd(p.v[a], dq.v[b]));
        const __m256d r = _mm256_fmadd_pd(dp.v[b], q.v[a], _mm256_mul_pd(p.v[b], dq.v[a]));
        return _mm256_sub_pd(l, r);
    };
    auto minor_d2 = [&](int a, int b) {
        const __m256d l = _mm256_fmadd_pd(ddp.v[a], q.v[b],
                                          _mm256_fmadd_pd(splat(2.0), _mm256_mul_pd(dp.v[a], dq.v[b]),
                                                          _mm256_mul_pd(p.v[a], ddq.v[b])));
        const __m256d r = _mm256_fmadd_pd(ddp.v[b], q.v[a],
                                          _mm256_fmadd_pd(splat(2.0), _mm256_mul_pd(dp.v[b], dq.v[a]),
                                                          _mm256_mul_pd(p.v[b], ddq.v[a])));
        return _mm256_sub_pd(l, r);
    };

    const __m256d c1 = minor(1, 0), c2 = minor(2, 0), c3 = minor(2, 1);
    const __m256d c1p = minor_d1(1, 0), c2p = minor_d1(2, 0), c3p = minor_d1(2, 1);
    const __m256d c1pp = minor_d2(1, 0), c2pp = minor_d2(2, 0), c3pp = minor_d2(2, 1);

    const __m256d A = _mm256_fmadd_pd(c1, c1, _mm256_fmadd_pd(c2, c2, _mm256_mul_pd(c3, c3)));
    const __m256d S = _mm256_fmadd_pd(c1, c1p, _mm256_fmadd_pd(c2, c2p, _mm256_mul_pd(c3, c3p)));
    const __m256d G = _mm256_fmadd_pd(c1p, c1p, _mm256_fmadd_pd(c2p, c2p, _mm256_mul_pd(c3p, c3p)));
    // Full curvature bracket c1 c1'' + c2 c2'' + c3 c3''.
    const __m256d K = _mm256_fmadd_pd(c1, c1pp, _mm256_fmadd_pd(c2, c2pp, _mm256_mul_pd(c3, c3pp)));

    // d2(c / sqrt(A)) = (c'' - (2 c' S + c (G + K)) / A + 3 c S^2 / A^2) / sqrt(A)
    const __m256d inv_a = _mm256_div_pd(splat(1.0), A);
    const __m256d inv_sqrt_a = _mm256_div_pd(splat(1.0), _mm256_sqrt_pd(A));
    const __m256d gk = _mm256_add_pd(G, K);
    const __m256d three_s2_a2 = _mm256_mul_pd(splat(3.0), _mm256_mul_pd(_mm256_mul_pd(S, S), _mm256_mul_pd(inv_a, inv_a)));
    auto second = [&](__m256d c, __m256d cp, __m256d cpp) {
        const __m256d mid = _mm256_mul_pd(_mm256_fmadd_pd(_mm256_add_pd(cp, cp), S, _mm256_mul_pd(c, gk)), inv_a);
        const __m256d val = _mm256_fmadd_pd(c, three_s2_a2, _mm256_sub_pd(cpp, mid));
        return _mm256_mul_pd(val, inv_sqrt_a);
    };

    _mm256_storeu_pd(xs, second(c3, c3p, c3pp));
    _mm256_storeu_pd(ys, _mm256_sub_pd(_mm256_setzero_pd(), second(c2, c2p, c2pp)));
    _mm256_storeu_pd(zs, second(c1, c1p, c1pp));
}

void offset_d2_avx2(const double* re, const double* im, std::size_t count, double* out)
{
    alignas(32) double xs[4], ys[4], zs[4];
    std::size_t k = 0;
    for (; k + 4 <= count; k += 4) {
        offset_d2_block(re + k, im + k, xs, ys, zs);
        for (int l = 0; l < 4; ++l) {
            out[3 * (k + l) + 0] = xs[l];
            out[3 * (k + l) + 1] = ys[l];
            out[3 * (k + l) + 2] = zs[l];
        }
    }
    if (k < count) {
        // Pad the tail with tau = 0, which is always regular.
        alignas(32) double tre[4] = {0.0, 0.0, 0.0, 0.0};
        alignas(32) double tim[4] = {0.0, 0.0, 0.0, 0.0};
        const std::size_t rest = count - k;
        for (std::size_t l = 0; l < rest; ++l) {
            tre[l] = re[k + l];
            tim[l] = im[k + l];
        }
        offset_d2_block(tre, tim, xs, ys, zs);
        for (std::size_t l = 0; l < rest; ++l) {
            out[3 * (k + l) + 0] = xs[l];
            out[3 * (k + l) + 1] = ys[l];
            out[3 * (k + l) + 2] = zs[l];
        }
    }
}

}  // namespace

const KernelTable& avx2_table_impl()
{
    static const KernelTable table{"avx2", gemm_n4_avx2, gemv_avx2, offset_d2_avx2};
    return table;
}

}  // namespace tpms::kernels
