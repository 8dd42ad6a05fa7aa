#include "tpms/bspline.hpp"

#include "tpms/error.hpp"
#include "tpms/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace tpms::bspline {

KnotVector make_knots(int n, int degree)
{
    if (degree < 1 || n <= degree)
        throw Error(ErrorCode::InvalidDimensions, "clamped knots need n > degree >= 1 (n = " + std::to_string(n)
                                                      + ", degree = " + std::to_string(degree) + ")");
    KnotVector kv;
    kv.degree = degree;
    kv.knots.assign(static_cast<std::size_t>(degree + 1), 0.0);
    const int spans = n - degree;
    for (int k = 1; k < spans; ++k)
        kv.knots.push_back(static_cast<double>(k) / spans);
    kv.knots.insert(kv.knots.end(), static_cast<std::size_t>(degree + 1), 1.0);
    return kv;
}

std::vector<double> greville(const KnotVector& kv)
{
    std::vector<double> out(static_cast<std::size_t>(kv.basis_count()));
    for (int i = 0; i < kv.basis_count(); ++i) {
        double sum = 0.0;
        for (int j = 1; j <= kv.degree; ++j)
            sum += kv.knots[static_cast<std::size_t>(i + j)];
        out[static_cast<std::size_t>(i)] = sum / kv.degree;
    }
    return out;
}

int find_span(const KnotVector& kv, double u)
{
    const int n = kv.basis_count();
    const auto& t = kv.knots;
    if (u >= t[static_cast<std::size_t>(n)])
        return n - 1;
    if (u <= t[static_cast<std::size_t>(kv.degree)])
        return kv.degree;
    int low = kv.degree;
    int high = n;
    int mid = (low + high) / 2;
    while (u < t[static_cast<std::size_t>(mid)] || u >= t[static_cast<std::size_t>(mid + 1)]) {
        if (u < t[static_cast<std::size_t>(mid)])
            high = mid;
        else
            low = mid;
        mid = (low + high) / 2;
    }
    return mid;
}

std::vector<double> nonzero_basis(const KnotVector& kv, int span, double u)
{
    const int p = kv.degree;
    const auto& t = kv.knots;
    std::vector<double> N(static_cast<std::size_t>(p + 1), 0.0);
    std::vector<double> left(static_cast<std::size_t>(p + 1)), right(static_cast<std::size_t>(p + 1));
    N[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = u - t[static_cast<std::size_t>(span + 1 - j)];
        right[j] = t[static_cast<std::size_t>(span + j)] - u;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = N[r] / (right[r + 1] + left[j - r]);
            N[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        N[j] = saved;
    }
    return N;
}

DenseMatrix CollocationSystem::bw() const
{
    return B * weights.asDiagonal();
}

CollocationSystem basis_matrix(const KnotVector& ku, const KnotVector& kv, std::span<const UV> params)
{
    const int nu = ku.basis_count();
    const int nv = kv.basis_count();
    const Eigen::Index size = static_cast<Eigen::Index>(nu) * nv;
    if (static_cast<Eigen::Index>(params.size()) != size)
        throw Error(ErrorCode::NonSquareSystem, std::to_string(params.size()) + " parameter sites for "
                                                    + std::to_string(size) + " control points");

    CollocationSystem sys;
    sys.B = DenseMatrix::Zero(size, size);
    sys.weights = Eigen::VectorXd::Ones(size);
    sys.ku = ku;
    sys.kv = kv;
    sys.params.assign(params.begin(), params.end());

    for (Eigen::Index k = 0; k < size; ++k) {
        const UV& uv = params[static_cast<std::size_t>(k)];
        if (!(uv.u >= 0.0 && uv.u <= 1.0 && uv.v >= 0.0 && uv.v <= 1.0))
            throw Error(ErrorCode::ParamOutOfRange, "collocation site outside [0, 1]^2");
        const int su = find_span(ku, uv.u);
        const int sv = find_span(kv, uv.v);
        const auto Nu = nonzero_basis(ku, su, uv.u);
        const auto Nv = nonzero_basis(kv, sv, uv.v);
        for (int a = 0; a <= ku.degree; ++a) {
            const int r = su - ku.degree + a;
            for (int b = 0; b <= kv.degree; ++b) {
                const int c = sv - kv.degree + b;
                sys.B(k, static_cast<Eigen::Index>(r) * nv + c) = Nu[a] * Nv[b];
            }
        }
    }
    return sys;
}

std::vector<UV> greville_params(const KnotVector& ku, const KnotVector& kv)
{
    const auto gu = greville(ku);
    const auto gv = greville(kv);
    std::vector<UV> out;
    out.reserve(gu.size() * gv.size());
    for (double u : gu)
        for (double v : gv)
            out.push_back({u, v});
    return out;
}

CollocationSystem greville_system(int n, int degree, int patches)
{
    if (patches < 1)
        throw Error(ErrorCode::InvalidDimensions, "need at least one patch");
    const KnotVector knots = make_knots(n, degree);
    const auto params = greville_params(knots, knots);
    CollocationSystem single = basis_matrix(knots, knots, params);
    if (patches == 1)
        return single;

    const Eigen::Index m = single.size();
    CollocationSystem sys = single;
    sys.patches = patches;
    sys.B = DenseMatrix::Zero(m * patches, m * patches);
    for (int b = 0; b < patches; ++b)
        sys.B.block(b * m, b * m, m, m) = single.B;
    sys.weights = Eigen::VectorXd::Ones(m * patches);
    return sys;
}

ControlNet apply_bw(const CollocationSystem& sys, const ControlNet& P)
{
    if (P.rows() != sys.size())
        throw Error(ErrorCode::DimensionMismatch, "net has " + std::to_string(P.rows()) + " rows, system has "
                                                      + std::to_string(sys.size()));
    const ControlNet scaled = sys.weights.asDiagonal() * P;
    ControlNet out(P.rows(), 4);
    kernels::active().gemm_n4(sys.B.data(), static_cast<std::size_t>(sys.B.rows()),
                              static_cast<std::size_t>(sys.B.cols()), scaled.data(), out.data());
    return out;
}

ControlNet limit_solution(const CollocationSystem& sys, const ControlNet& Q)
{
    if (Q.rows() != sys.size())
        throw Error(ErrorCode::DimensionMismatch, "data has " + std::to_string(Q.rows()) + " rows, system has "
                                                      + std::to_string(sys.size()));
    const DenseMatrix bw = sys.bw();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(bw);
    if (!lu.isInvertible())
        throw Error(ErrorCode::SingularSystem, "collocation matrix Bw is singular");
    ControlNet P = lu.solve(Eigen::MatrixXd(Q));
    const double scale = std::max(1.0, Q.cwiseAbs().maxCoeff());
    const double res = (bw * P - Q).cwiseAbs().maxCoeff();
    if (!(res < 1e-10 * scale))
        throw Error(ErrorCode::SingularSystem, "collocation solve residual " + std::to_string(res)
                                                   + " exceeds tolerance");
    return P;
}

Vec3 surface_eval(const ControlNet& P, double u, double v, const KnotVector& ku, const KnotVector& kv)
{
    if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0))
        throw Error(ErrorCode::ParamOutOfRange, "(u, v) outside [0, 1]^2");
    const int nu = ku.basis_count();
    const int nv = kv.basis_count();
    if (P.rows() != static_cast<Eigen::Index>(nu) * nv)
        throw Error(ErrorCode::DimensionMismatch, "net size does not match the knot vectors");
    const int su = find_span(ku, u);
    const int sv = find_span(kv, v);
    const auto Nu = nonzero_basis(ku, su, u);
    const auto Nv = nonzero_basis(kv, sv, v);
    Vec3 out = Vec3::Zero();
    for (int a = 0; a <= ku.degree; ++a) {
        const int r = su - ku.degree + a;
        for (int b = 0; b <= kv.degree; ++b) {
            const int c = sv - kv.degree + b;
            out += Nu[a] * Nv[b] * P.row(static_cast<Eigen::Index>(r) * nv + c).head<3>().transpose();
        }
    }
    return out;
}

namespace {

/// Larger root modulus of lambda^2 - c1 lambda - c0.
double dominant_root(double c1, double c0)
{
    const double disc = c1 * c1 + 4.0 * c0;
    if (disc >= 0.0) {
        const double s = std::sqrt(disc);
        return std::max(std::abs(0.5 * (c1 + s)), std::abs(0.5 * (c1 - s)));
    }
    return std::sqrt(-c0);
}

}  // namespace

double spectral_radius(const DenseMatrix& M, double tol, const PowerIterationOptions& opts)
{
    if (M.rows() != M.cols())
        throw Error(ErrorCode::DimensionMismatch, "spectral radius needs a square matrix");
    const auto n = static_cast<std::size_t>(M.rows());
    if (n == 0)
        return 0.0;

    const auto& kernel = kernels::active();
    auto apply = [&](const Eigen::VectorXd& x) {
        Eigen::VectorXd y(M.rows());
        kernel.gemv(M.data(), n, n, x.data(), y.data());
        return y;
    };

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    constexpr int kStable = 3;

    double last = 0.0;
    for (int attempt = 0; attempt <= opts.restarts; ++attempt) {
        Eigen::VectorXd x(M.rows());
        for (auto& v : x)
            v = normal(rng);
        x.normalize();
        Eigen::VectorXd y = apply(x);

        double prev = -1.0;
        int stable = 0;
        for (int it = 0; it < opts.max_iters; ++it) {
            const double ny = y.norm();
            if (ny == 0.0)
                return 0.0;
            const Eigen::VectorXd z = apply(y);

            // Least-squares fit z ~ c1 y + c0 x.
            const double yy = y.dot(y), xx = x.dot(x), xy = x.dot(y);
            const double zy = z.dot(y), zx = z.dot(x);
            const double det = yy * xx - xy * xy;
            double est;
            if (det > 1e-13 * yy * xx) {
                const double c1 = (zy * xx - zx * xy) / det;
                const double c0 = (zx * yy - zy * xy) / det;
                est = dominant_root(c1, c0);
            } else {
                est = std::sqrt(z.dot(z) / yy);
            }
            last = est;

            if (prev >= 0.0 && std::abs(est - prev) <= tol * std::max(1.0, est)) {
                if (++stable >= kStable)
                    return est;
            } else {
                stable = 0;
            }
            prev = est;
            x = y / ny;
            y = z / ny;
        }
    }
    throw Error(ErrorCode::NoConvergence, "power iteration did not settle (last estimate "
                                              + std::to_string(last) + ")");
}

}  // namespace tpms::bspline
