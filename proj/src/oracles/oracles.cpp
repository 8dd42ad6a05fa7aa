#include "tpms/oracles.hpp"

#include "tpms/error.hpp"
#include "tpms/weierstrass.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <boost/multiprecision/cpp_complex.hpp>

#include <cmath>
#include <functional>
#include <random>
#include <string>

namespace tpms::oracles {

namespace {

using HpComplex = boost::multiprecision::cpp_complex_50;
using HpReal = boost::multiprecision::cpp_bin_float_50;

struct Formula {
    int upper;  // summation runs i = 0..upper
    std::function<std::pair<long, long>(long n, long i)> at;
};

Formula formula(int i, int j)
{
    // Rows of this table are the twenty sums, copied one by one.
    switch (i * 10 + j) {
    case 11: return {-5, [](long n, long k) { return std::pair{n * n - n + 2 + k, n * n - 2 * n + 2 + k}; }};
    case 21: return {-5, [](long n, long k) { return std::pair{n * n - 2 * n + 2 + k, n * n - 2 * n + 2 + k}; }};
    case 31: return {-7, [](long n, long k) { return std::pair{n * n - n + 3 + k, n * n - 3 * n + 3 + k}; }};
    case 41: return {-7, [](long n, long k) { return std::pair{n * n - 2 * n + 3 + k, n * n - 3 * n + 3 + k}; }};
    case 51: return {-7, [](long n, long k) { return std::pair{n * n - 3 * n + 3 + k, n * n - 3 * n + 3 + k}; }};
    case 12: return {-5, [](long n, long k) { return std::pair{2 * n + k * n, 2 * n + 1 + k * n}; }};
    case 22: return {-5, [](long n, long k) { return std::pair{2 * n + 1 + k * n, 2 * n + 1 + k * n}; }};
    case 32: return {-7, [](long n, long k) { return std::pair{3 * n + k * n, 3 * n + 2 + k * n}; }};
    case 42: return {-7, [](long n, long k) { return std::pair{3 * n + 1 + k * n, 3 * n + 2 + k * n}; }};
    case 52: return {-7, [](long n, long k) { return std::pair{3 * n + 2 + k * n, 3 * n + 2 + k * n}; }};
    case 13: return {-3, [](long n, long k) { return std::pair{2 + k, n + 2 + k}; }};
    case 23: return {-5, [](long n, long k) { return std::pair{n + 2 + k, n + 2 + k}; }};
    case 33: return {-7, [](long n, long k) { return std::pair{3 + k, 2 * n + 3 + k}; }};
    case 43: return {-7, [](long n, long k) { return std::pair{n + 3 + k, 2 * n + 3 + k}; }};
    case 53: return {-7, [](long n, long k) { return std::pair{2 * n + 3 + k, 2 * n + 3 + k}; }};
    case 14: return {-5, [](long n, long k) { return std::pair{3 * n - 1 + k * n, 3 * n - 2 + k * n}; }};
    case 24: return {-5, [](long n, long k) { return std::pair{3 * n - 2 + k * n, 3 * n - 2 + k * n}; }};
    case 34: return {-7, [](long n, long k) { return std::pair{4 * n - 1 + k * n, 4 * n - 3 + k * n}; }};
    case 44: return {-7, [](long n, long k) { return std::pair{4 * n - 2 + k * n, 4 * n - 3 + k * n}; }};
    case 54: return {-7, [](long n, long k) { return std::pair{4 * n - 3 + k * n, 4 * n - 3 + k * n}; }};
    default: break;
    }
    throw Error(ErrorCode::IndexOutOfRange, "no M_" + std::to_string(i) + std::to_string(j));
}

std::array<HpComplex, 3> phi_hp_raw(Complex tau)
{
    const HpComplex t(HpReal(tau.real()), HpReal(tau.imag()));
    const HpComplex t2 = t * t;
    const HpComplex t4 = t2 * t2;
    const HpComplex r = sqrt(t4 * t4 - 14 * t4 + 1);
    const HpComplex one(1);
    const HpComplex im(HpReal(0), HpReal(1));
    return {(one - t2) / r, im * (one + t2) / r, 2 * t / r};
}

std::array<HpReal, 6> pq_hp_raw(Complex tau)
{
    const auto f = phi_hp_raw(tau);
    return {f[0].real(), f[1].real(), f[2].real(), f[0].imag(), f[1].imag(), f[2].imag()};
}

std::array<HpReal, 3> normal_hp_raw(Complex tau)
{
    const auto v = pq_hp_raw(tau);
    const HpReal &p1 = v[0], &p2 = v[1], &p3 = v[2], &q1 = v[3], &q2 = v[4], &q3 = v[5];
    const HpReal c1 = p2 * q1 - p1 * q2;
    const HpReal c2 = p3 * q1 - p1 * q3;
    const HpReal c3 = p3 * q2 - p2 * q3;
    const HpReal s = sqrt(c1 * c1 + c2 * c2 + c3 * c3);
    return {c3 / s, -c2 / s, c1 / s};
}

}  // namespace

DenseMatrix brute_force_m(int i, int j, int n)
{
    const Formula f = formula(i, j);
    const long size = static_cast<long>(n) * n;
    DenseMatrix m = DenseMatrix::Zero(size, size);
    for (long k = 0; k <= n + f.upper; ++k) {
        const auto [r, c] = f.at(n, k);
        m(r - 1, c - 1) += 1.0;
    }
    return m;
}

std::array<Complex, 3> phi_hp(Complex tau)
{
    const auto f = phi_hp_raw(tau);
    std::array<Complex, 3> out;
    for (std::size_t k = 0; k < 3; ++k)
        out[k] = Complex(static_cast<double>(f[k].real()), static_cast<double>(f[k].imag()));
    return out;
}

std::array<double, 6> pq_hp(Complex tau)
{
    const auto v = pq_hp_raw(tau);
    std::array<double, 6> out;
    for (std::size_t k = 0; k < 6; ++k)
        out[k] = static_cast<double>(v[k]);
    return out;
}

std::array<double, 6> pq_first_fd(Complex tau, double h)
{
    const auto a = pq_hp_raw(tau + h);
    const auto b = pq_hp_raw(tau - h);
    std::array<double, 6> out;
    for (std::size_t k = 0; k < 6; ++k)
        out[k] = static_cast<double>((a[k] - b[k]) / (2 * HpReal(h)));
    return out;
}

std::array<double, 6> pq_second_fd(Complex tau, double h)
{
    const auto a = pq_hp_raw(tau + h);
    const auto m = pq_hp_raw(tau);
    const auto b = pq_hp_raw(tau - h);
    std::array<double, 6> out;
    for (std::size_t k = 0; k < 6; ++k)
        out[k] = static_cast<double>((a[k] - 2 * m[k] + b[k]) / (HpReal(h) * HpReal(h)));
    return out;
}

Vec3 normal_hp(Complex tau)
{
    const auto v = normal_hp_raw(tau);
    return Vec3(static_cast<double>(v[0]), static_cast<double>(v[1]), static_cast<double>(v[2]));
}

Vec3 normal_second_fd(Complex tau, double h)
{
    const auto a = normal_hp_raw(tau + h);
    const auto m = normal_hp_raw(tau);
    const auto b = normal_hp_raw(tau - h);
    Vec3 out;
    for (int k = 0; k < 3; ++k)
        out[k] = static_cast<double>((a[k] - 2 * m[k] + b[k]) / (HpReal(h) * HpReal(h)));
    return out;
}

std::vector<Complex> branch_roots_companion()
{
    // Monic tau^8 + 0 tau^7 + ... - 14 tau^4 + ... + 1.
    const std::array<double, 8> low{1, 0, 0, 0, -14, 0, 0, 0};  // coefficients of tau^0..tau^7
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(8, 8);
    for (int k = 1; k < 8; ++k)
        c(k, k - 1) = 1.0;
    for (int k = 0; k < 8; ++k)
        c(k, 7) = -low[static_cast<std::size_t>(k)];
    Eigen::EigenSolver<Eigen::MatrixXd> es(c, false);
    std::vector<Complex> roots;
    for (int k = 0; k < 8; ++k)
        roots.push_back(es.eigenvalues()[k]);
    return roots;
}

DenseMax dense_grid_max(const ComplexRect& domain, int nx, int ny)
{
    DenseMax best;
    best.max_abs = -1.0;
    for (int ix = 0; ix < nx; ++ix) {
        const double re = domain.re_min + (domain.re_max - domain.re_min) * ix / (nx - 1);
        for (int iy = 0; iy < ny; ++iy) {
            const double im = domain.im_min + (domain.im_max - domain.im_min) * iy / (ny - 1);
            const Complex tau(re, im);
            const Vec3 d2 = weierstrass::offset_second_derivatives(weierstrass::frame_jet(tau));
            for (int c = 0; c < 3; ++c) {
                if (std::abs(d2[c]) > best.max_abs) {
                    best.max_abs = std::abs(d2[c]);
                    best.argmax = tau;
                    best.component = c;
                }
            }
        }
    }
    return best;
}

double cox_de_boor(int i, int p, double u, const std::vector<double>& knots)
{
    const auto t = [&](int k) { return knots[static_cast<std::size_t>(k)]; };
    if (p == 0) {
        const int last = static_cast<int>(knots.size()) - 1;
        if (t(i) <= u && u < t(i + 1))
            return 1.0;
        // Close the final non-empty interval at the right end.
        if (u == t(last) && t(i) < t(i + 1) && t(i + 1) == t(last))
            return 1.0;
        return 0.0;
    }
    double out = 0.0;
    const double d1 = t(i + p) - t(i);
    const double d2 = t(i + p + 1) - t(i + 1);
    if (d1 > 0.0)
        out += (u - t(i)) / d1 * cox_de_boor(i, p - 1, u, knots);
    if (d2 > 0.0)
        out += (t(i + p + 1) - u) / d2 * cox_de_boor(i + 1, p - 1, u, knots);
    return out;
}

Vec3 surface_point(const ControlNet& P, double u, double v, int degree, const std::vector<double>& ku,
                   const std::vector<double>& kv)
{
    const int nu = static_cast<int>(ku.size()) - degree - 1;
    const int nv = static_cast<int>(kv.size()) - degree - 1;
    Vec3 out = Vec3::Zero();
    for (int r = 0; r < nu; ++r) {
        const double bu = cox_de_boor(r, degree, u, ku);
        if (bu == 0.0)
            continue;
        for (int c = 0; c < nv; ++c)
            out += bu * cox_de_boor(c, degree, v, kv) * P.row(r * nv + c).head<3>().transpose();
    }
    return out;
}

Eigen::MatrixXd gauss_jordan_solve(Eigen::MatrixXd A, Eigen::MatrixXd B)
{
    const Eigen::Index n = A.rows();
    for (Eigen::Index col = 0; col < n; ++col) {
        Eigen::Index pivot = col;
        for (Eigen::Index r = col + 1; r < n; ++r)
            if (std::abs(A(r, col)) > std::abs(A(pivot, col)))
                pivot = r;
        if (A(pivot, col) == 0.0)
            throw Error(ErrorCode::SingularSystem, "zero pivot in Gauss-Jordan");
        A.row(col).swap(A.row(pivot));
        B.row(col).swap(B.row(pivot));
        const double d = A(col, col);
        A.row(col) /= d;
        B.row(col) /= d;
        for (Eigen::Index r = 0; r < n; ++r) {
            if (r == col || A(r, col) == 0.0)
                continue;
            const double f = A(r, col);
            A.row(r) -= f * A.row(col);
            B.row(r) -= f * B.row(col);
        }
    }
    return B;
}

DenseMatrix probe_correction(const std::vector<cpia::ConstraintTerm>& terms, Eigen::Index rows,
                             Eigen::VectorXd& offset)
{
    ControlNet P = ControlNet::Zero(rows, 4);
    P.col(3).setOnes();
    auto flatten = [rows](const ControlNet& c) {
        Eigen::VectorXd v(3 * rows);
        for (int col = 0; col < 3; ++col)
            v.segment(col * rows, rows) = c.col(col);
        return v;
    };
    offset = flatten(cpia::constraint_correction(P, terms));
    DenseMatrix K(3 * rows, 3 * rows);
    for (int col = 0; col < 3; ++col) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            P(r, col) = 1.0;
            K.col(col * rows + r) = flatten(cpia::constraint_correction(P, terms)) - offset;
            P(r, col) = 0.0;
        }
    }
    return K;
}

ControlNet constraint_null_net(const std::vector<cpia::ConstraintTerm>& terms, Eigen::Index rows,
                               std::uint64_t seed)
{
    Eigen::VectorXd offset;
    const Eigen::MatrixXd K = probe_correction(terms, rows, offset);
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(K);
    Eigen::VectorXd x = cod.solve(-offset);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    const Eigen::MatrixXd Z = lu.kernel();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    Eigen::VectorXd coeff(Z.cols());
    for (auto& c : coeff)
        c = uni(rng);
    if (Z.cols() > 0 && Z.norm() > 0.0)
        x += Z * coeff;

    const double miss = (K * x + offset).cwiseAbs().maxCoeff();
    if (!(miss < 1e-10))
        throw Error(ErrorCode::SingularSystem, "constraint corrections have no common zero (miss "
                                                   + std::to_string(miss) + ")");
    ControlNet P(rows, 4);
    for (int col = 0; col < 3; ++col)
        P.col(col) = x.segment(col * rows, rows);
    P.col(3).setOnes();
    return P;
}

}  // namespace tpms::oracles
