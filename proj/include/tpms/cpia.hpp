#pragma once

// Constrained progressive iterative approximation.
//
//   P^{k+1} = P^k + (Q - Bw P^k) + sum_t 1/2 (A_t S_t P^k T_t - A'_t S'_t P^k)
//
// where each term t pairs a transformed, selected block of the net against
// an untransformed one. P T means every homogeneous row r is replaced by
// (T r^T)^T. Corrections act on x, y, z; the homogeneous column follows the
// plain PIA part only, so it stays at 1 once the data carries 1.

#include "tpms/bspline.hpp"
#include "tpms/constraints.hpp"
#include "tpms/types.hpp"

#include <array>
#include <string>
#include <vector>

namespace tpms::cpia {

using SparseMatrix = constraints::SparseMatrix;

struct ConstraintTerm {
    SparseMatrix row_op;
    SparseMatrix selector;
    constraints::HomTransform transform;
    SparseMatrix paired_row_op;
    SparseMatrix paired_selector;
    std::string label;

    /// row_op * selector and paired_row_op * paired_selector.
    SparseMatrix lhs() const { return row_op * selector; }
    SparseMatrix rhs() const { return paired_row_op * paired_selector; }
};

/// Boundary j (1..4) uses T_{assignment[j-1]}g.
using GyroidAssignment = std::array<int, 4>;
inline constexpr GyroidAssignment kDefaultGyroidAssignment{1, 2, 3, 4};

/// Eight terms over 2n^2 rows: for each of the four groups
/// (beta4, T1d | beta1), (alpha4, T1d | alpha1), (beta3, T2d | beta2),
/// (alpha3, T2d | alpha2) and i = 1, 2 the selectors are N_i against N_{3-i}.
/// alpha/beta are embedded block-diagonally. Throws UnsupportedGridSize for n < 7.
std::vector<ConstraintTerm> diamond_constraints(int n);

/// Eight n^2 terms: (beta_i, I, T_ip | beta_i, I) and (alpha_i, I, T_ip | alpha_i, I)
/// for i = 1..4.
std::vector<ConstraintTerm> schwarz_p_constraints(int n);

/// Same template as schwarz_p_constraints with boundary j using the assigned
/// Gyroid transform. This pairing is a reconstruction, not a published update.
/// Throws IndexOutOfRange for assignments outside 1..7.
std::vector<ConstraintTerm> gyroid_constraints(int n, const GyroidAssignment& assignment = kDefaultGyroidAssignment);

std::vector<ConstraintTerm> constraints_for(SurfaceKind surface, int n,
                                            const GyroidAssignment& assignment = kDefaultGyroidAssignment);

/// Number of stacked patches the surface's update works on.
int patch_count(SurfaceKind surface);

struct CpiaState {
    ControlNet P;
    int k = 0;
    std::vector<double> error_history;          // |P^{k+1} - P^k|_inf
    std::vector<double> constraint_residuals;  // |constraint correction|_inf per step
};

/// Sum of the constraint corrections at P (fourth column zero).
ControlNet constraint_correction(const ControlNet& P, const std::vector<ConstraintTerm>& terms);

/// One update. Throws DimensionMismatch when P, Q, B and the terms disagree.
CpiaState iterate(const CpiaState& state, const bspline::CollocationSystem& sys, const ControlNet& Q,
                  const std::vector<ConstraintTerm>& terms);

/// P - limit_solution(sys, Q).
ControlNet residual(const ControlNet& P, const bspline::CollocationSystem& sys, const ControlNet& Q);

struct FitResult {
    ControlNet final_net;
    int iterations = 0;
    bool converged = false;  // step and limit gap both below tol
    bool diverged = false;   // iterate blew up; stopped early
    double contraction_estimate = 0.0;  // NaN with fewer than two steps
    double limit_gap = 0.0;
    double initial_gap = 0.0;  // |P^0 - P_inf|_inf
    std::vector<double> step_history;
    std::vector<double> gap_history;
};

/// Iterates from P^0 = Q until the step and the gap to the limit are both
/// below tol, max_iters is reached, or the iterate blows up.
FitResult run(const std::vector<ConstraintTerm>& terms, const bspline::CollocationSystem& sys, const ControlNet& Q,
              double tol, int max_iters);

/// Builds the surface's terms for the system's net size, then runs.
FitResult run(SurfaceKind surface, const bspline::CollocationSystem& sys, const ControlNet& Q, double tol,
              int max_iters, const GyroidAssignment& assignment = kDefaultGyroidAssignment);

/// Geometric-mean ratio of the last `window` consecutive history entries.
double contraction_estimate(const std::vector<double>& history, int window = 10);

/// Linear part of the update on the x, y, z columns as a 3N x 3N matrix
/// acting on [x; y; z] stacked column vectors.
DenseMatrix iteration_operator(const bspline::CollocationSystem& sys, const std::vector<ConstraintTerm>& terms);

/// Largest eigenvalue modulus of iteration_operator (dense eigensolve).
double iteration_spectral_radius(const bspline::CollocationSystem& sys, const std::vector<ConstraintTerm>& terms);

/// rho(I - Bw).
double pia_spectral_radius(const bspline::CollocationSystem& sys);

}  // namespace tpms::cpia
