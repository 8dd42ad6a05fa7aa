#pragma once

// Exact constraint matrices for the CPIA updates.
//
// Control points of an n x n net are numbered index = (row - 1) * n + column
// (1-based). Every builder takes the 1-based indices used by the summation
// formulas and stores 0-based coordinates. A nonzero at (i, j) of an M matrix
// moves control point j into slot i: (M P)_i = P_j.

#include "tpms/types.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <map>
#include <utility>
#include <vector>

namespace tpms::constraints {

using Index = Eigen::Index;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct Entry {
    Index row;  // 0-based
    Index col;  // 0-based
    double value;
};

/// Exact sparse matrix with integer-valued (or small rational) entries.
/// Zero entries are never stored.
class SparseSelector {
public:
    SparseSelector(Index rows, Index cols);

    Index rows() const noexcept { return rows_; }
    Index cols() const noexcept { return cols_; }

    /// Accumulates value at the 1-based position (row, col).
    void add(Index row, Index col, double value);

    /// Value at the 1-based position, 0 when absent.
    double at(Index row, Index col) const;

    std::size_t nonzeros() const noexcept { return entries_.size(); }

    /// Entries in row-major order, 0-based.
    std::vector<Entry> entries() const;

    SparseMatrix to_sparse() const;
    DenseMatrix to_dense() const;

    SparseSelector operator+(const SparseSelector& other) const;
    SparseSelector operator-(const SparseSelector& other) const;
    friend SparseSelector operator*(double scale, const SparseSelector& m);

    bool operator==(const SparseSelector& other) const = default;

private:
    Index rows_;
    Index cols_;
    std::map<std::pair<Index, Index>, double> entries_;
};

/// 4x4 homogeneous transform with last row (0, 0, 0, 1), acting on column
/// vectors [x, y, z, 1]^T.
class HomTransform {
public:
    /// Throws InvalidDimensions if the last row is not exactly (0, 0, 0, 1) or
    /// the linear part is singular.
    explicit HomTransform(const Eigen::Matrix4d& m);

    static HomTransform identity();

    const Eigen::Matrix4d& matrix() const noexcept { return m_; }

    HomTransform operator*(const HomTransform& rhs) const;

    /// Exact-structure inverse [L^-1, -L^-1 t; 0 0 0 1].
    HomTransform inverse() const;

    Eigen::Vector4d apply(const Eigen::Vector4d& point) const { return m_ * point; }

private:
    Eigen::Matrix4d m_;
};

/// Control-point index (1-based) of net position (row, column), both 1-based.
inline Index net_index(Index row, Index column, Index n) { return (row - 1) * n + column; }

/// Smallest net size accepted by m_matrix and everything built on it.
inline constexpr int kMinGridSize = 7;

/// J_{i,j}: single entry 1 at the 1-based position (i, j).
SparseSelector j_unit(Index i, Index j, Index rows, Index cols);

/// M_{ij} (n^2 x n^2), the same for all three surfaces. i in 1..5 is the
/// matrix within a family, j in 1..4 the boundary family.
SparseSelector m_matrix(int i, int j, int n);

/// k-th transform of the surface: Gyroid 1..7, Diamond 1..2, SchwarzP 1..4.
HomTransform t_matrix(SurfaceKind surface, int k);

/// Number of transforms defined for the surface.
int t_count(SurfaceKind surface);

/// N_1 (k = 1) or N_2 (k = 2), 2n^2 x 2n^2 block selectors.
SparseSelector n_selector(int k, int n);

/// alpha_i = 3 M_{4i} - 2 M_{3i} - M_{5i}.
SparseSelector alpha(int i, int n);

/// beta_i = M_{2i} - M_{1i}.
SparseSelector beta(int i, int n);

/// diag(m, m, ..., m) with `copies` blocks.
SparseSelector block_diagonal(const SparseSelector& m, int copies);

/// Moduli of the four eigenvalues, ascending.
std::array<double, 4> eigen_moduli(const HomTransform& t);

/// Moduli of all eigenvalues of a square matrix, ascending (dense solve).
std::vector<double> eigen_moduli(const SparseSelector& m);

/// Numerical rank via full-pivot LU on the dense form.
Index rank(const SparseSelector& m);

}  // namespace tpms::constraints
