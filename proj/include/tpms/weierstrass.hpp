#pragma once

// Weierstrass data of the D/P/G associate family,
//
//   phi1 = (1 - tau^2) / R,   phi2 = i (1 + tau^2) / R,   phi3 = 2 tau / R,
//   R = sqrt(tau^8 - 14 tau^4 + 1)  (principal branch),
//
// with the closed-form first/second derivatives, the frame area term A1, the
// signed unit normal and the second derivatives of that normal along real tau.

#include "tpms/types.hpp"

#include <array>
#include <complex>

namespace tpms::weierstrass {

using Complex = std::complex<double>;
using PhiTriple = std::array<Complex, 3>;

/// Default threshold on |tau^8 - 14 tau^4 + 1| and on A1.
inline constexpr double kBranchEps = 1e-8;

/// Radius of the default safe disk; strictly inside branch_radius().
inline constexpr double kSafeRadius = 0.45;

/// Modulus of the branch points nearest the origin, sqrt(2 - sqrt(3)).
double branch_radius();

/// The eight zeros of tau^8 - 14 tau^4 + 1.
std::array<Complex, 8> branch_points();

/// Real and imaginary parts of a complex 3-vector: phi_k = p_k + i q_k.
struct PQSplit {
    Vec3 p = Vec3::Zero();
    Vec3 q = Vec3::Zero();
};

/// Value, first and second derivative of the split along real tau.
struct FrameJet {
    PQSplit value;
    PQSplit first;
    PQSplit second;
};

struct DerivativeBundle {
    Complex tau;
    Vec3 p, q;
    Vec3 p1, q1;
    Vec3 p2, q2;
    double a1 = 0.0;
    Vec3 normal;
    Vec3 d2;  // (x'', y'', z'')
};

PhiTriple phi(Complex tau, double eps = kBranchEps);

PQSplit split(const PhiTriple& values);
PhiTriple recombine(const PQSplit& pq);

/// Real/imaginary parts of phi'_k, using the closed-form derivative expressions.
PQSplit phi_first_derivatives(Complex tau, double eps = kBranchEps);

/// Real/imaginary parts of phi''_k.
PQSplit phi_second_derivatives(Complex tau, double eps = kBranchEps);

FrameJet frame_jet(Complex tau, double eps = kBranchEps);

/// (p2 q1 - p1 q2)^2 + (p3 q1 - p1 q3)^2 + (p3 q2 - p2 q3)^2.
double a1(const PQSplit& pq);

/// (p3 q2 - p2 q3, -(p3 q1 - p1 q3), p2 q1 - p1 q2) / sqrt(A1).
/// Throws DegenerateFrame when A1 <= eps.
Vec3 unit_normal(const PQSplit& pq, double eps = kBranchEps);

/// Second derivatives of the three unit_normal components, written as the
/// six-term expressions over 4 A1^(5/2). The sixth term of y'' and z'' uses
/// c_k * (p3 q2 - p2 q3) * c3'' (c_k the component's own minor), which is what
/// differentiating the normal gives.
Vec3 offset_second_derivatives(const FrameJet& jet, double eps = kBranchEps);

/// Same expressions with the sixth term of y'' and z'' transcribed literally
/// as c_k^2 * c3''. Kept for comparison; it disagrees with the normal's second
/// derivative wherever c_k != c3 and c3'' != 0.
Vec3 offset_second_derivatives_as_printed(const FrameJet& jet, double eps = kBranchEps);

DerivativeBundle derivative_bundle(Complex tau, double eps = kBranchEps);

enum class Axis { X, Y, Z };

const char* to_string(Axis axis);

/// Shortest distance from any branch point to the closed rectangle.
double branch_distance(const ComplexRect& domain);

/// Throws DomainContainsBranchPoint when a branch point lies within eps of
/// the rectangle, InvalidGrid when the rectangle is empty.
void check_domain(const ComplexRect& domain, double eps = kBranchEps);

struct MaxSecondDerivative {
    double max_abs = 0.0;
    Complex argmax;
    Axis component = Axis::X;
};

/// Largest |x''|, |y''|, |z''| over an nx x ny uniform grid (corners included),
/// followed by refine_levels rounds of local search: each round scans the
/// +-1 cell window around the incumbent at one third of the previous spacing.
/// Ties go to the lowest grid index (real part major) and then to X < Y < Z.
MaxSecondDerivative max_second_derivative(const ComplexRect& domain, int nx, int ny, int refine_levels,
                                          double eps = kBranchEps);

}  // namespace tpms::weierstrass
