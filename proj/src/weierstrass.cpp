#include "tpms/weierstrass.hpp"

#include "tpms/error.hpp"
#include "tpms/kernels.hpp"
#include "tpms/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace tpms::weierstrass {

namespace {

constexpr Complex kI{0.0, 1.0};

/// Shared powers of tau appearing in every derivative expression.
struct Radicand {
    Complex t2;
    Complex s;    // tau^8 - 14 tau^4 + 1
    Complex rs;   // s^(1/2)
    Complex s32;  // s^(3/2)
    Complex s52;  // s^(5/2)
    Complex g;    // 8 tau^7 - 56 tau^3
    Complex gp;   // 56 tau^6 - 168 tau^2
};

Radicand radicand(Complex tau, double eps)
{
    Radicand r;
    r.t2 = tau * tau;
    Complex t4 = r.t2 * r.t2;
    r.s = t4 * t4 - 14.0 * t4 + 1.0;
    if (!(std::abs(r.s) > eps)) {
        std::ostringstream msg;
        msg << "tau = " << tau << " is within " << eps << " of a zero of tau^8 - 14 tau^4 + 1";
        throw Error(ErrorCode::BranchPoint, msg.str());
    }
    r.rs = std::sqrt(r.s);
    r.s32 = r.s * r.rs;
    r.s52 = r.s * r.s32;
    Complex t3 = r.t2 * tau;
    r.g = 8.0 * t4 * t3 - 56.0 * t3;
    r.gp = 56.0 * t4 * r.t2 - 168.0 * r.t2;
    return r;
}

PQSplit split_of(const Complex& a, const Complex& b, const Complex& c)
{
    return split(PhiTriple{a, b, c});
}

struct Minors {
    double c1, c2, c3;
};

// c1 = p2 q1 - p1 q2, c2 = p3 q1 - p1 q3, c3 = p3 q2 - p2 q3 (0-based below).
Minors minors(const Vec3& p, const Vec3& q)
{
    return {p[1] * q[0] - p[0] * q[1], p[2] * q[0] - p[0] * q[2], p[2] * q[1] - p[1] * q[2]};
}

Vec3 offset_d2_impl(const FrameJet& jet, double eps, bool as_printed)
{
    const Vec3& p = jet.value.p;
    const Vec3& q = jet.value.q;
    const Vec3& dp = jet.first.p;
    const Vec3& dq = jet.first.q;
    const Vec3& ddp = jet.second.p;
    const Vec3& ddq = jet.second.q;

    auto d1 = [&](int a, int b) { return dp[a] * q[b] + p[a] * dq[b] - dp[b] * q[a] - p[b] * dq[a]; };
    auto d2 = [&](int a, int b) {
        return 2.0 * dp[a] * dq[b] - 2.0 * dp[b] * dq[a] - q[a] * ddp[b] + q[b] * ddp[a] + p[a] * ddq[b]
               - p[b] * ddq[a];
    };

    const auto [c1, c2, c3] = minors(p, q);
    const double A = c1 * c1 + c2 * c2 + c3 * c3;
    if (!(A > eps))
        throw Error(ErrorCode::DegenerateFrame, "A1 = " + std::to_string(A) + " is not above the frame threshold");

    const double c1p = d1(1, 0), c2p = d1(2, 0), c3p = d1(2, 1);
    const double c1pp = d2(1, 0), c2pp = d2(2, 0), c3pp = d2(2, 1);

    // Brackets shared by the three formulas.
    const double S = c1 * c1p + c2 * c2p + c3 * c3p;
    const double G = c1p * c1p + c2p * c2p + c3p * c3p;
    const double H = c1 * c1pp + c2 * c2pp;

    const double den = 4.0 * A * A * std::sqrt(A);
    const double y_tail = as_printed ? c2 : c3;
    const double z_tail = as_printed ? c1 : c3;

    const double x = -8.0 * A * c3p * S + 4.0 * A * A * c3pp + 12.0 * c3 * S * S - 4.0 * A * c3 * G
                     - 4.0 * A * c3 * H - 4.0 * A * c3 * c3 * c3pp;
    const double y = 8.0 * A * c2p * S - 4.0 * A * A * c2pp - 12.0 * c2 * S * S + 4.0 * A * c2 * G
                     + 4.0 * A * c2 * H + 4.0 * A * c2 * y_tail * c3pp;
    const double z = -8.0 * A * c1p * S + 4.0 * A * A * c1pp + 12.0 * c1 * S * S - 4.0 * A * c1 * G
                     - 4.0 * A * c1 * H - 4.0 * A * c1 * z_tail * c3pp;
    return Vec3(x, y, z) / den;
}

}  // namespace

double branch_radius()
{
    return std::sqrt(2.0 - std::sqrt(3.0));
}

std::array<Complex, 8> branch_points()
{
    const double inner = branch_radius();
    const double outer = std::sqrt(2.0 + std::sqrt(3.0));
    const std::array<Complex, 4> dirs{Complex(1, 0), Complex(0, 1), Complex(-1, 0), Complex(0, -1)};
    std::array<Complex, 8> out;
    for (int k = 0; k < 4; ++k) {
        out[k] = inner * dirs[k];
        out[k + 4] = outer * dirs[k];
    }
    return out;
}

PhiTriple phi(Complex tau, double eps)
{
    const Radicand r = radicand(tau, eps);
    return {(1.0 - r.t2) / r.rs, kI * (1.0 + r.t2) / r.rs, 2.0 * tau / r.rs};
}

PQSplit split(const PhiTriple& values)
{
    PQSplit out;
    for (int k = 0; k < 3; ++k) {
        out.p[k] = values[k].real();
        out.q[k] = values[k].imag();
    }
    return out;
}

PhiTriple recombine(const PQSplit& pq)
{
    return {Complex(pq.p[0], pq.q[0]), Complex(pq.p[1], pq.q[1]), Complex(pq.p[2], pq.q[2])};
}

PQSplit phi_first_derivatives(Complex tau, double eps)
{
    const Radicand r = radicand(tau, eps);
    const Complex d1 = -(1.0 - r.t2) * r.g / (2.0 * r.s32) - 2.0 * tau / r.rs;
    const Complex d2 = 2.0 * kI * tau / r.rs - kI * (r.t2 + 1.0) * r.g / (2.0 * r.s32);
    const Complex d3 = 2.0 / r.rs - tau * r.g / r.s32;
    return split_of(d1, d2, d3);
}

PQSplit phi_second_derivatives(Complex tau, double eps)
{
    const Radicand r = radicand(tau, eps);
    const Complex h = 3.0 * r.g * r.g / (4.0 * r.s52) - r.gp / (2.0 * r.s32);
    const Complex d1 = -2.0 / r.rs + 2.0 * tau * r.g / r.s32 + (1.0 - r.t2) * h;
    const Complex d2 = 2.0 * kI / r.rs - 2.0 * kI * tau * r.g / r.s32 + kI * (r.t2 + 1.0) * h;
    const Complex d3 = 2.0 * tau * h - 2.0 * r.g / r.s32;
    return split_of(d1, d2, d3);
}

FrameJet frame_jet(Complex tau, double eps)
{
    return {split(phi(tau, eps)), phi_first_derivatives(tau, eps), phi_second_derivatives(tau, eps)};
}

double a1(const PQSplit& pq)
{
    const auto [c1, c2, c3] = minors(pq.p, pq.q);
    return c1 * c1 + c2 * c2 + c3 * c3;
}

Vec3 unit_normal(const PQSplit& pq, double eps)
{
    const auto [c1, c2, c3] = minors(pq.p, pq.q);
    const double A = c1 * c1 + c2 * c2 + c3 * c3;
    if (!(A > eps))
        throw Error(ErrorCode::DegenerateFrame, "A1 = " + std::to_string(A) + " is not above the frame threshold");
    return Vec3(c3, -c2, c1) / std::sqrt(A);
}

Vec3 offset_second_derivatives(const FrameJet& jet, double eps)
{
    return offset_d2_impl(jet, eps, false);
}

Vec3 offset_second_derivatives_as_printed(const FrameJet& jet, double eps)
{
    return offset_d2_impl(jet, eps, true);
}

DerivativeBundle derivative_bundle(Complex tau, double eps)
{
    const FrameJet jet = frame_jet(tau, eps);
    DerivativeBundle b;
    b.tau = tau;
    b.p = jet.value.p;
    b.q = jet.value.q;
    b.p1 = jet.first.p;
    b.q1 = jet.first.q;
    b.p2 = jet.second.p;
    b.q2 = jet.second.q;
    b.a1 = a1(jet.value);
    b.normal = unit_normal(jet.value, eps);
    b.d2 = offset_second_derivatives(jet, eps);
    return b;
}

const char* to_string(Axis axis)
{
    switch (axis) {
    case Axis::X: return "x";
    case Axis::Y: return "y";
    case Axis::Z: return "z";
    }
    return "?";
}

double branch_distance(const ComplexRect& domain)
{
    double best = INFINITY;
    for (const Complex& b : branch_points()) {
        const double dx = std::max({domain.re_min - b.real(), 0.0, b.real() - domain.re_max});
        const double dy = std::max({domain.im_min - b.imag(), 0.0, b.imag() - domain.im_max});
        best = std::min(best, std::hypot(dx, dy));
    }
    return best;
}

void check_domain(const ComplexRect& domain, double eps)
{
    if (!(domain.re_min < domain.re_max) || !(domain.im_min < domain.im_max))
        throw Error(ErrorCode::InvalidGrid, "domain rectangle is empty or not finite");
    if (!(branch_distance(domain) > eps))
        throw Error(ErrorCode::DomainContainsBranchPoint,
                    "domain comes within " + std::to_string(eps) + " of a branch point");
}

namespace {

struct Candidate {
    double value = -1.0;
    Complex tau;
    Axis axis = Axis::X;
};

/// Evaluates |d2| at the given points and returns the first strict maximum.
Candidate scan(const std::vector<double>& re, const std::vector<double>& im)
{
    const std::size_t count = re.size();
    std::vector<double> d2(3 * count);
    const auto& kernel = kernels::active();
    parallel_for(count, [&](std::size_t begin, std::size_t end) {
        kernel.offset_d2(re.data() + begin, im.data() + begin, end - begin, d2.data() + 3 * begin);
    });

    Candidate best;
    for (std::size_t k = 0; k < count; ++k) {
        for (int a = 0; a < 3; ++a) {
            const double v = std::abs(d2[3 * k + a]);
            if (v > best.value) {
                best.value = v;
                best.tau = Complex(re[k], im[k]);
                best.axis = static_cast<Axis>(a);
            }
        }
    }
    return best;
}

}  // namespace

MaxSecondDerivative max_second_derivative(const ComplexRect& domain, int nx, int ny, int refine_levels, double eps)
{
    if (nx < 2 || ny < 2)
        throw Error(ErrorCode::InvalidGrid, "grid needs at least 2 points per direction, got "
                                                + std::to_string(nx) + "x" + std::to_string(ny));
    if (refine_levels < 0)
        throw Error(ErrorCode::InvalidGrid, "refine_levels must be non-negative");
    check_domain(domain, eps);

    double hx = (domain.re_max - domain.re_min) / (nx - 1);
    double hy = (domain.im_max - domain.im_min) / (ny - 1);

    std::vector<double> re, im;
    re.reserve(static_cast<std::size_t>(nx) * ny);
    im.reserve(re.capacity());
    for (int ix = 0; ix < nx; ++ix) {
        const double x = ix == nx - 1 ? domain.re_max : domain.re_min + ix * hx;
        for (int iy = 0; iy < ny; ++iy) {
            re.push_back(x);
            im.push_back(iy == ny - 1 ? domain.im_max : domain.im_min + iy * hy);
        }
    }
    Candidate best = scan(re, im);

    for (int level = 0; level < refine_levels; ++level) {
        const double sx = hx / 3.0;
        const double sy = hy / 3.0;
        re.clear();
        im.clear();
        for (int i = -3; i <= 3; ++i) {
            const double x = best.tau.real() + i * sx;
            if (x < domain.re_min || x > domain.re_max)
                continue;
            for (int j = -3; j <= 3; ++j) {
                const double y = best.tau.imag() + j * sy;
                if (y < domain.im_min || y > domain.im_max)
                    continue;
                re.push_back(x);
                im.push_back(y);
            }
        }
        const Candidate local = scan(re, im);
        if (local.value > best.value)
            best = local;
        hx = sx;
        hy = sy;
    }
    return {best.value, best.tau, best.axis};
}

}  // namespace tpms::weierstrass
