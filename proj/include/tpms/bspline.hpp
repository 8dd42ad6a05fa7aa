#pragma once

#include "tpms/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace tpms::bspline {

/// Clamped knot vector on [0, 1].
struct KnotVector {
    int degree = 3;
    std::vector<double> knots;

    int basis_count() const { return static_cast<int>(knots.size()) - degree - 1; }
};

/// Clamped uniform knots with n basis functions. Throws InvalidDimensions
/// unless n > degree >= 1.
KnotVector make_knots(int n, int degree);

/// Knot averages (t_{i+1} + ... + t_{i+p}) / p, one per basis function.
std::vector<double> greville(const KnotVector& kv);

/// Index of the knot span containing u (last non-degenerate span at u = 1).
int find_span(const KnotVector& kv, double u);

/// The degree + 1 nonzero basis values at u, for functions span-degree..span.
std::vector<double> nonzero_basis(const KnotVector& kv, int span, double u);

struct UV {
    double u;
    double v;
};

/// Square collocation system for (possibly stacked) tensor-product patches.
/// B[k, (r - 1) n_v + c] = N_r(u_k) N_c(v_k); weights hold the diagonal of w.
struct CollocationSystem {
    DenseMatrix B;
    Eigen::VectorXd weights;
    KnotVector ku;
    KnotVector kv;
    std::vector<UV> params;  // per patch; the same sites for every patch
    int patches = 1;

    Eigen::Index size() const { return B.rows(); }
    Eigen::Index patch_size() const { return static_cast<Eigen::Index>(params.size()); }

    /// B * diag(weights).
    DenseMatrix bw() const;
};

/// Builds B at the given sites. Throws NonSquareSystem unless
/// params.size() == (#basis in u) * (#basis in v).
CollocationSystem basis_matrix(const KnotVector& ku, const KnotVector& kv, std::span<const UV> params);

/// Tensor grid of Greville abscissae, u-major.
std::vector<UV> greville_params(const KnotVector& ku, const KnotVector& kv);

/// Degree-`degree` n x n Greville collocation with uniform weights, stacked
/// block-diagonally over `patches` identical patches.
CollocationSystem greville_system(int n, int degree, int patches = 1);

/// Bw * P, using the active kernels.
ControlNet apply_bw(const CollocationSystem& sys, const ControlNet& P);

/// Solves (B w) P = Q directly. Throws SingularSystem if Bw is singular or the
/// solve residual exceeds 1e-10 * |Q|_inf.
ControlNet limit_solution(const CollocationSystem& sys, const ControlNet& Q);

/// Tensor-product point of a single patch P (rows u-major). Throws
/// ParamOutOfRange outside [0, 1]^2, DimensionMismatch on a wrong-sized net.
Vec3 surface_eval(const ControlNet& P, double u, double v, const KnotVector& ku, const KnotVector& kv);

struct PowerIterationOptions {
    int max_iters = 50000;
    int restarts = 4;
    std::uint64_t seed = 0x7e57c0de;
};

/// Dominant eigenvalue modulus of a square matrix by power iteration. Each
/// step fits the two-term recurrence x_{k+2} = c1 x_{k+1} + c0 x_k and takes
/// the larger root modulus, so complex-conjugate and +-lambda dominant pairs
/// converge too. Throws NoConvergence when the estimate is still moving by
/// more than tol after every restart.
double spectral_radius(const DenseMatrix& M, double tol = 1e-10, const PowerIterationOptions& opts = {});

}  // namespace tpms::bspline
