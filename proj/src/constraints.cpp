#include "tpms/constraints.hpp"

#include "tpms/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace tpms {

std::string_view to_string(SurfaceKind kind)
{
    switch (kind) {
    case SurfaceKind::Gyroid: return "Gyroid";
    case SurfaceKind::Diamond: return "Diamond";
    case SurfaceKind::SchwarzP: return "SchwarzP";
    }
    return "Unknown";
}

SurfaceKind parse_surface(std::string_view name)
{
    std::string key;
    for (char c : name) {
        if (c != '_' && c != '-')
            key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (key == "gyroid")
        return SurfaceKind::Gyroid;
    if (key == "diamond")
        return SurfaceKind::Diamond;
    if (key == "schwarzp")
        return SurfaceKind::SchwarzP;
    throw Error(ErrorCode::ConfigError, "unknown surface '" + std::string(name) + "'");
}

}  // namespace tpms

namespace tpms::constraints {

SparseSelector::SparseSelector(Index rows, Index cols) : rows_(rows), cols_(cols)
{
    if (rows < 0 || cols < 0)
        throw Error(ErrorCode::InvalidDimensions, "negative matrix dimensions");
}

void SparseSelector::add(Index row, Index col, double value)
{
    if (row < 1 || row > rows_ || col < 1 || col > cols_)
        throw Error(ErrorCode::IndexOutOfRange, "(" + std::to_string(row) + "," + std::to_string(col)
                                                    + ") outside " + std::to_string(rows_) + "x"
                                                    + std::to_string(cols_));
    auto key = std::make_pair(row - 1, col - 1);
    double& slot = entries_[key];
    slot += value;
    if (slot == 0.0)
        entries_.erase(key);
}

double SparseSelector::at(Index row, Index col) const
{
    auto it = entries_.find({row - 1, col - 1});
    return it == entries_.end() ? 0.0 : it->second;
}

std::vector<Entry> SparseSelector::entries() const
{
    std::vector<Entry> out;
    out.reserve(entries_.size());
    for (const auto& [key, value] : entries_)
        out.push_back({key.first, key.second, value});
    return out;
}

SparseMatrix SparseSelector::to_sparse() const
{
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(entries_.size());
    for (const auto& [key, value] : entries_)
        triplets.emplace_back(key.first, key.second, value);
    SparseMatrix out(rows_, cols_);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

DenseMatrix SparseSelector::to_dense() const
{
    DenseMatrix out = DenseMatrix::Zero(rows_, cols_);
    for (const auto& [key, value] : entries_)
        out(key.first, key.second) = value;
    return out;
}

SparseSelector SparseSelector::operator+(const SparseSelector& other) const
{
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw Error(ErrorCode::DimensionMismatch, "cannot add matrices of different shapes");
    SparseSelector out = *this;
    for (const auto& [key, value] : other.entries_)
        out.add(key.first + 1, key.second + 1, value);
    return out;
}

SparseSelector SparseSelector::operator-(const SparseSelector& other) const
{
    return *this + (-1.0) * other;
}

SparseSelector operator*(double scale, const SparseSelector& m)
{
    SparseSelector out(m.rows_, m.cols_);
    if (scale == 0.0)
        return out;
    for (const auto& [key, value] : m.entries_)
        out.entries_[key] = scale * value;
    return out;
}

HomTransform::HomTransform(const Eigen::Matrix4d& m) : m_(m)
{
    if (m(3, 0) != 0.0 || m(3, 1) != 0.0 || m(3, 2) != 0.0 || m(3, 3) != 1.0)
        throw Error(ErrorCode::InvalidDimensions, "homogeneous transform must end with row (0, 0, 0, 1)");
    if (!(std::abs(m.topLeftCorner<3, 3>().determinant()) > 1e-12))
        throw Error(ErrorCode::SingularSystem, "homogeneous transform is not invertible");
}

HomTransform HomTransform::identity()
{
    return HomTransform(Eigen::Matrix4d::Identity());
}

HomTransform HomTransform::operator*(const HomTransform& rhs) const
{
    Eigen::Matrix4d prod = m_ * rhs.m_;
    prod.row(3) << 0.0, 0.0, 0.0, 1.0;
    return HomTransform(prod);
}

HomTransform HomTransform::inverse() const
{
    const Eigen::Matrix3d linv = m_.topLeftCorner<3, 3>().inverse();
    Eigen::Matrix4d out = Eigen::Matrix4d::Identity();
    out.topLeftCorner<3, 3>() = linv;
    out.topRightCorner<3, 1>() = -linv * m_.topRightCorner<3, 1>();
    return HomTransform(out);
}

SparseSelector j_unit(Index i, Index j, Index rows, Index cols)
{
    SparseSelector out(rows, cols);
    out.add(i, j, 1.0);
    return out;
}

namespace {

/// a * n^2 + b * n + c
struct Affine {
    int a, b, c;
    Index at(Index n) const { return a * n * n + b * n + c; }
};

/// M = sum_{k=0}^{n + upper} J_{row(n) + k * stride, col(n) + k * stride}
struct SumFormula {
    int upper;       // summation bound is n + upper
    Affine row;
    Affine col;
    bool stride_n;   // stride n (column walk) instead of 1 (row walk)
};

// FORMULAS[j - 1][i - 1] describes M_{ij}.
constexpr SumFormula kFormulas[4][5] = {
    {
        {-5, {1, -1, 2}, {1, -2, 2}, false},
        {-5, {1, -2, 2}, {1, -2, 2}, false},
        {-7, {1, -1, 3}, {1, -3, 3}, false},
        {-7, {1, -2, 3}, {1, -3, 3}, false},
        {-7, {1, -3, 3}, {1, -3, 3}, false},
    },
    {
        {-5, {0, 2, 0}, {0, 2, 1}, true},
        {-5, {0, 2, 1}, {0, 2, 1}, true},
        {-7, {0, 3, 0}, {0, 3, 2}, true},
        {-7, {0, 3, 1}, {0, 3, 2}, true},
        {-7, {0, 3, 2}, {0, 3, 2}, true},
    },
    {
        {-3, {0, 0, 2}, {0, 1, 2}, false},
        {-5, {0, 1, 2}, {0, 1, 2}, false},
        {-7, {0, 0, 3}, {0, 2, 3}, false},
        {-7, {0, 1, 3}, {0, 2, 3}, false},
        {-7, {0, 2, 3}, {0, 2, 3}, false},
    },
    {
        {-5, {0, 3, -1}, {0, 3, -2}, true},
        {-5, {0, 3, -2}, {0, 3, -2}, true},
        {-7, {0, 4, -1}, {0, 4, -3}, true},
        {-7, {0, 4, -2}, {0, 4, -3}, true},
        {-7, {0, 4, -3}, {0, 4, -3}, true},
    },
};

void require_grid(int n)
{
    if (n < kMinGridSize)
        throw Error(ErrorCode::UnsupportedGridSize,
                    "n = " + std::to_string(n) + " but the constraint families need n >= "
                        + std::to_string(kMinGridSize));
}

void require_family(int j)
{
    if (j < 1 || j > 4)
        throw Error(ErrorCode::IndexOutOfRange, "boundary family " + std::to_string(j) + " not in 1..4");
}

Eigen::Matrix4d rows4(std::initializer_list<double> values)
{
    Eigen::Matrix4d m;
    auto it = values.begin();
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c)
            m(r, c) = *it++;
    return m;
}

HomTransform gyroid_base(int k)
{
    switch (k) {
    case 1: return HomTransform(rows4({0, 0, -1, 1, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1}));
    case 2: return HomTransform(rows4({0, 0, 1, 1, 1, 0, 0, -1, 0, -1, 0, 1, 0, 0, 0, 1}));
    case 3: return HomTransform(rows4({0, -1, 0, 1.5, 1, 0, 0, -0.5, 0, 0, -1, 0.5, 0, 0, 0, 1}));
    default: break;
    }
    throw Error(ErrorCode::IndexOutOfRange, "Gyroid base transform " + std::to_string(k));
}

}  // namespace

SparseSelector m_matrix(int i, int j, int n)
{
    if (i < 1 || i > 5)
        throw Error(ErrorCode::IndexOutOfRange, "M family member " + std::to_string(i) + " not in 1..5");
    require_family(j);
    require_grid(n);

    const SumFormula& f = kFormulas[j - 1][i - 1];
    const Index size = static_cast<Index>(n) * n;
    const Index stride = f.stride_n ? n : 1;
    SparseSelector out(size, size);
    for (Index k = 0; k <= n + f.upper; ++k)
        out.add(f.row.at(n) + k * stride, f.col.at(n) + k * stride, 1.0);
    return out;
}

int t_count(SurfaceKind surface)
{
    switch (surface) {
    case SurfaceKind::Gyroid: return 7;
    case SurfaceKind::Diamond: return 2;
    case SurfaceKind::SchwarzP: return 4;
    }
    return 0;
}

HomTransform t_matrix(SurfaceKind surface, int k)
{
    if (k < 1 || k > t_count(surface))
        throw Error(ErrorCode::IndexOutOfRange, "T" + std::to_string(k) + " is not defined for "
                                                    + std::string(to_string(surface)));
    const double h = std::sqrt(2.0) / 2.0;
    const double q = std::sqrt(2.0) / 4.0;
    switch (surface) {
    case SurfaceKind::Gyroid:
        switch (k) {
        case 4: return gyroid_base(1) * gyroid_base(3);
        case 5: return (gyroid_base(1) * gyroid_base(3)).inverse();
        case 6: return gyroid_base(2) * gyroid_base(3);
        case 7: return (gyroid_base(2) * gyroid_base(3)).inverse();
        default: return gyroid_base(k);
        }
    case SurfaceKind::Diamond:
        if (k == 1)
            return HomTransform(rows4({0, -1, 0, 0, 1, 0, 0, 0, 0, 0, -1, 0, 0, 0, 0, 1}));
        return HomTransform(rows4({-0.5, -0.5, h, h, -0.5, -0.5, -h, h, h, -h, 0, 0, 0, 0, 0, 1}));
    case SurfaceKind::SchwarzP:
        switch (k) {
        case 1: return HomTransform(rows4({0.5, -0.5, -h, -q, -0.5, 0.5, -h, -q, -h, -h, 0, -0.5, 0, 0, 0, 1}));
        case 2: return HomTransform(rows4({0.5, 0.5, -h, q, 0.5, 0.5, h, -q, -h, h, 0, 0.5, 0, 0, 0, 1}));
        case 3: return HomTransform(rows4({0, -1, 0, 0, -1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1}));
        default: return HomTransform(rows4({0, 1, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1}));
        }
    }
    throw Error(ErrorCode::IndexOutOfRange, "unknown surface");
}

SparseSelector n_selector(int k, int n)
{
    if (k != 1 && k != 2)
        throw Error(ErrorCode::IndexOutOfRange, "N" + std::to_string(k) + " is not defined");
    if (n < 1)
        throw Error(ErrorCode::InvalidDimensions, "n must be positive");
    const Index block = static_cast<Index>(n) * n;
    SparseSelector out(2 * block, 2 * block);
    const Index col_offset = (k == 1) ? 0 : block;
    for (Index r = 1; r <= block; ++r)
        out.add(r, r + col_offset, 1.0);
    return out;
}

SparseSelector alpha(int i, int n)
{
    return 3.0 * m_matrix(4, i, n) - 2.0 * m_matrix(3, i, n) - m_matrix(5, i, n);
}

SparseSelector beta(int i, int n)
{
    return m_matrix(2, i, n) - m_matrix(1, i, n);
}

SparseSelector block_diagonal(const SparseSelector& m, int copies)
{
    if (copies < 1)
        throw Error(ErrorCode::InvalidDimensions, "block_diagonal needs at least one copy");
    SparseSelector out(m.rows() * copies, m.cols() * copies);
    for (int b = 0; b < copies; ++b)
        for (const Entry& e : m.entries())
            out.add(b * m.rows() + e.row + 1, b * m.cols() + e.col + 1, e.value);
    return out;
}

std::array<double, 4> eigen_moduli(const HomTransform& t)
{
    Eigen::EigenSolver<Eigen::Matrix4d> solver(t.matrix(), false);
    std::array<double, 4> out;
    for (int k = 0; k < 4; ++k)
        out[k] = std::abs(solver.eigenvalues()[k]);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> eigen_moduli(const SparseSelector& m)
{
    if (m.rows() != m.cols())
        throw Error(ErrorCode::DimensionMismatch, "eigenvalues need a square matrix");
    const Eigen::MatrixXd dense = m.to_dense();
    Eigen::EigenSolver<Eigen::MatrixXd> solver(dense, false);
    std::vector<double> out(static_cast<std::size_t>(dense.rows()));
    for (Index k = 0; k < dense.rows(); ++k)
        out[static_cast<std::size_t>(k)] = std::abs(solver.eigenvalues()[k]);
    std::sort(out.begin(), out.end());
    return out;
}

Index rank(const SparseSelector& m)
{
    const Eigen::MatrixXd dense = m.to_dense();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(dense);
    return lu.rank();
}

}  // namespace tpms::constraints
