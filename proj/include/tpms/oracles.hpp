#pragma once

// Slow, independent reference computations used to check the library.
// Nothing in the library proper depends on this header.

#include "tpms/cpia.hpp"
#include "tpms/types.hpp"

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

namespace tpms::oracles {

using Complex = std::complex<double>;

/// M_{ij} built by literally running each summation over i and placing a 1
/// at the listed (row, column), 1-based formulas stored 0-based.
DenseMatrix brute_force_m(int i, int j, int n);

/// phi_1..3 evaluated in 50-digit complex arithmetic, rounded to double.
std::array<Complex, 3> phi_hp(Complex tau);

/// Real and imaginary parts of phi_hp, stacked (p1, p2, p3, q1, q2, q3).
std::array<double, 6> pq_hp(Complex tau);

/// Central differences along real tau, evaluated in 50-digit arithmetic.
std::array<double, 6> pq_first_fd(Complex tau, double h);
std::array<double, 6> pq_second_fd(Complex tau, double h);

/// Signed unit normal (c3, -c2, c1) / sqrt(A1) in 50-digit arithmetic.
Vec3 normal_hp(Complex tau);

/// Second central difference of normal_hp along real tau.
Vec3 normal_second_fd(Complex tau, double h);

/// Roots of tau^8 - 14 tau^4 + 1 from the companion matrix.
std::vector<Complex> branch_roots_companion();

struct DenseMax {
    double max_abs = 0.0;
    Complex argmax;
    int component = 0;
};

/// Plain scalar scan of |x''|, |y''|, |z''| over an nx x ny grid, corners
/// included, using the unvectorized per-point formulas.
DenseMax dense_grid_max(const ComplexRect& domain, int nx, int ny);

/// B-spline basis N_{i,p}(u) by the recursive definition (0/0 := 0). The
/// last basis function is taken to be 1 at the right end of a clamped vector.
double cox_de_boor(int i, int p, double u, const std::vector<double>& knots);

/// Tensor-product point from the recursive basis.
Vec3 surface_point(const ControlNet& P, double u, double v, int degree, const std::vector<double>& ku,
                   const std::vector<double>& kv);

/// Gauss-Jordan elimination with partial pivoting; solves A X = B.
Eigen::MatrixXd gauss_jordan_solve(Eigen::MatrixXd A, Eigen::MatrixXd B);

/// Matrix of the x, y, z part of constraint_correction, found by probing it
/// with unit nets; `offset` receives the correction of the all-zero net.
/// Layout matches cpia::iteration_operator ([x; y; z] stacked).
DenseMatrix probe_correction(const std::vector<cpia::ConstraintTerm>& terms, Eigen::Index rows,
                             Eigen::VectorXd& offset);

/// A pseudo-random net (fourth column 1) at which every constraint
/// correction vanishes. Throws SingularSystem if no such net exists.
ControlNet constraint_null_net(const std::vector<cpia::ConstraintTerm>& terms, Eigen::Index rows,
                               std::uint64_t seed);

}  // namespace tpms::oracles
