#include "tpms/cpia.hpp"

#include "tpms/error.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace tpms::cpia {

namespace {

using constraints::HomTransform;
using constraints::SparseSelector;

SparseMatrix identity(Eigen::Index size)
{
    SparseMatrix m(size, size);
    m.setIdentity();
    return m;
}

ConstraintTerm make_term(const SparseSelector& op, const SparseMatrix& sel, const HomTransform& t,
                         const SparseSelector& paired_op, const SparseMatrix& paired_sel, std::string label)
{
    return ConstraintTerm{op.to_sparse(), sel, t, paired_op.to_sparse(), paired_sel, std::move(label)};
}

std::vector<ConstraintTerm> matched_terms(int n, const std::array<HomTransform, 4>& transforms,
                                          const std::array<std::string, 4>& names)
{
    const SparseMatrix id = identity(static_cast<Eigen::Index>(n) * n);
    std::vector<ConstraintTerm> terms;
    terms.reserve(8);
    for (int i = 1; i <= 4; ++i) {
        const auto b = constraints::beta(i, n);
        const auto a = constraints::alpha(i, n);
        const auto& t = transforms[static_cast<std::size_t>(i - 1)];
        const auto& tn = names[static_cast<std::size_t>(i - 1)];
        terms.push_back(make_term(b, id, t, b, id, "beta" + std::to_string(i) + "*" + tn));
        terms.push_back(make_term(a, id, t, a, id, "alpha" + std::to_string(i) + "*" + tn));
    }
    return terms;
}

void check_shapes(const ControlNet& P, const bspline::CollocationSystem& sys, const ControlNet& Q,
                  const std::vector<ConstraintTerm>& terms)
{
    const Eigen::Index n = sys.size();
    if (P.rows() != n || Q.rows() != n)
        throw Error(ErrorCode::DimensionMismatch, "net rows " + std::to_string(P.rows()) + ", data rows "
                                                      + std::to_string(Q.rows()) + ", system size "
                                                      + std::to_string(n));
    for (const auto& t : terms) {
        if (t.row_op.rows() != n || t.selector.cols() != n || t.paired_row_op.rows() != n
            || t.paired_selector.cols() != n)
            throw Error(ErrorCode::DimensionMismatch, "constraint term '" + t.label + "' does not match size "
                                                          + std::to_string(n));
    }
}

double inf_norm(const ControlNet& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace

std::vector<ConstraintTerm> diamond_constraints(int n)
{
    const HomTransform t1 = constraints::t_matrix(SurfaceKind::Diamond, 1);
    const HomTransform t2 = constraints::t_matrix(SurfaceKind::Diamond, 2);
    const std::array<SparseMatrix, 2> N{constraints::n_selector(1, n).to_sparse(),
                                        constraints::n_selector(2, n).to_sparse()};

    struct Group {
        SparseSelector op;
        const HomTransform* t;
        SparseSelector paired;
        std::string name;
    };
    const Group groups[] = {
        {constraints::block_diagonal(constraints::beta(4, n), 2), &t1,
         constraints::block_diagonal(constraints::beta(1, n), 2), "beta4*T1d|beta1"},
        {constraints::block_diagonal(constraints::alpha(4, n), 2), &t1,
         constraints::block_diagonal(constraints::alpha(1, n), 2), "alpha4*T1d|alpha1"},
        {constraints::block_diagonal(constraints::beta(3, n), 2), &t2,
         constraints::block_diagonal(constraints::beta(2, n), 2), "beta3*T2d|beta2"},
        {constraints::block_diagonal(constraints::alpha(3, n), 2), &t2,
         constraints::block_diagonal(constraints::alpha(2, n), 2), "alpha3*T2d|alpha2"},
    };

    std::vector<ConstraintTerm> terms;
    terms.reserve(8);
    for (const auto& g : groups) {
        for (int i = 1; i <= 2; ++i) {
            terms.push_back(make_term(g.op, N[static_cast<std::size_t>(i - 1)], *g.t, g.paired,
                                      N[static_cast<std::size_t>(2 - i)],
                                      g.name + " N" + std::to_string(i) + "|N" + std::to_string(3 - i)));
        }
    }
    return terms;
}

std::vector<ConstraintTerm> schwarz_p_constraints(int n)
{
    return matched_terms(n,
                         {constraints::t_matrix(SurfaceKind::SchwarzP, 1), constraints::t_matrix(SurfaceKind::SchwarzP, 2),
                          constraints::t_matrix(SurfaceKind::SchwarzP, 3), constraints::t_matrix(SurfaceKind::SchwarzP, 4)},
                         {"T1p", "T2p", "T3p", "T4p"});
}

std::vector<ConstraintTerm> gyroid_constraints(int n, const GyroidAssignment& assignment)
{
    const int count = constraints::t_count(SurfaceKind::Gyroid);
    for (int k : assignment) {
        if (k < 1 || k > count)
            throw Error(ErrorCode::IndexOutOfRange,
                        "Gyroid assignment refers to T" + std::to_string(k) + "g; only T1g..T7g exist");
    }
    std::array<HomTransform, 4> ts{HomTransform::identity(), HomTransform::identity(), HomTransform::identity(),
                                   HomTransform::identity()};
    std::array<std::string, 4> names;
    for (std::size_t j = 0; j < 4; ++j) {
        ts[j] = constraints::t_matrix(SurfaceKind::Gyroid, assignment[j]);
        names[j] = "T" + std::to_string(assignment[j]) + "g";
    }
    return matched_terms(n, ts, names);
}

std::vector<ConstraintTerm> constraints_for(SurfaceKind surface, int n, const GyroidAssignment& assignment)
{
    switch (surface) {
    case SurfaceKind::Diamond:
        return diamond_constraints(n);
    case SurfaceKind::SchwarzP:
        return schwarz_p_constraints(n);
    case SurfaceKind::Gyroid:
        return gyroid_constraints(n, assignment);
    }
    throw Error(ErrorCode::ConfigError, "unknown surface");
}

int patch_count(SurfaceKind surface)
{
    return surface == SurfaceKind::Diamond ? 2 : 1;
}

ControlNet constraint_correction(const ControlNet& P, const std::vector<ConstraintTerm>& terms)
{
    ControlNet c = ControlNet::Zero(P.rows(), 4);
    for (const auto& t : terms) {
        // Rows of P T are (T r^T)^T = r T^T.
        const ControlNet moved = P * t.transform.matrix().transpose();
        c.noalias() += 0.5 * (t.row_op * (t.selector * moved));
        c.noalias() -= 0.5 * (t.paired_row_op * (t.paired_selector * P));
    }
    c.col(3).setZero();
    return c;
}

CpiaState iterate(const CpiaState& state, const bspline::CollocationSystem& sys, const ControlNet& Q,
                  const std::vector<ConstraintTerm>& terms)
{
    check_shapes(state.P, sys, Q, terms);
    const ControlNet correction = constraint_correction(state.P, terms);
    const ControlNet step = (Q - bspline::apply_bw(sys, state.P)) + correction;

    CpiaState next;
    next.P = state.P + step;
    next.k = state.k + 1;
    next.error_history = state.error_history;
    next.error_history.push_back(inf_norm(step));
    next.constraint_residuals = state.constraint_residuals;
    next.constraint_residuals.push_back(inf_norm(correction));
    return next;
}

ControlNet residual(const ControlNet& P, const bspline::CollocationSystem& sys, const ControlNet& Q)
{
    if (P.rows() != sys.size())
        throw Error(ErrorCode::DimensionMismatch, "net does not match the system size");
    return P - bspline::limit_solution(sys, Q);
}

double contraction_estimate(const std::vector<double>& history, int window)
{
    const auto size = static_cast<int>(history.size());
    const int span = std::min(window, size - 1);
    if (span < 1)
        return std::numeric_limits<double>::quiet_NaN();
    const double last = history[static_cast<std::size_t>(size - 1)];
    const double first = history[static_cast<std::size_t>(size - 1 - span)];
    if (first == 0.0)
        return last == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::pow(last / first, 1.0 / span);
}

FitResult run(const std::vector<ConstraintTerm>& terms, const bspline::CollocationSystem& sys, const ControlNet& Q,
              double tol, int max_iters)
{
    CpiaState state;
    state.P = Q;
    check_shapes(state.P, sys, Q, terms);
    const ControlNet limit = bspline::limit_solution(sys, Q);

    FitResult result;
    result.initial_gap = inf_norm(state.P - limit);
    result.limit_gap = result.initial_gap;
    // Past this the iterate carries no information about the limit.
    const double blowup = 1e12 * std::max(1.0, result.initial_gap);

    for (int it = 0; it < max_iters; ++it) {
        state = iterate(state, sys, Q, terms);
        const double step = state.error_history.back();
        const double gap = inf_norm(state.P - limit);
        result.gap_history.push_back(gap);
        result.limit_gap = gap;
        if (!std::isfinite(step) || !std::isfinite(gap) || gap > blowup) {
            result.diverged = true;
            break;
        }
        if (step < tol && gap < tol) {
            result.converged = true;
            break;
        }
    }

    result.final_net = state.P;
    result.iterations = state.k;
    result.step_history = state.error_history;
    result.contraction_estimate = contraction_estimate(state.error_history);
    return result;
}

FitResult run(SurfaceKind surface, const bspline::CollocationSystem& sys, const ControlNet& Q, double tol,
              int max_iters, const GyroidAssignment& assignment)
{
    if (sys.patches != patch_count(surface))
        throw Error(ErrorCode::DimensionMismatch, std::string(to_string(surface)) + " works on "
                                                      + std::to_string(patch_count(surface))
                                                      + " patch(es), the system has " + std::to_string(sys.patches));
    const int n = sys.ku.basis_count();
    if (sys.kv.basis_count() != n)
        throw Error(ErrorCode::DimensionMismatch, "constraint matrices need a square n x n net");
    return run(constraints_for(surface, n, assignment), sys, Q, tol, max_iters);
}

DenseMatrix iteration_operator(const bspline::CollocationSystem& sys, const std::vector<ConstraintTerm>& terms)
{
    const Eigen::Index n = sys.size();
    const Eigen::MatrixXd bw = sys.bw();
    Eigen::MatrixXd diag = Eigen::MatrixXd::Identity(n, n) - bw;
    DenseMatrix op = DenseMatrix::Zero(3 * n, 3 * n);
    for (const auto& t : terms) {
        const Eigen::MatrixXd lhs = Eigen::MatrixXd(t.lhs());
        diag -= 0.5 * Eigen::MatrixXd(t.rhs());
        const Eigen::Matrix4d& m = t.transform.matrix();
        for (int c = 0; c < 3; ++c)
            for (int d = 0; d < 3; ++d)
                if (m(c, d) != 0.0)
                    op.block(c * n, d * n, n, n) += 0.5 * m(c, d) * lhs;
    }
    for (int c = 0; c < 3; ++c)
        op.block(c * n, c * n, n, n) += diag;
    return op;
}

double iteration_spectral_radius(const bspline::CollocationSystem& sys, const std::vector<ConstraintTerm>& terms)
{
    const Eigen::MatrixXd op = iteration_operator(sys, terms);
    Eigen::EigenSolver<Eigen::MatrixXd> es(op, false);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::NoConvergence, "eigensolver failed on the iteration operator");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double pia_spectral_radius(const bspline::CollocationSystem& sys)
{
    const Eigen::Index n = sys.size();
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n) - sys.bw();
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    if (es.info() != Eigen::Success)
        throw Error(ErrorCode::NoConvergence, "eigensolver failed on I - Bw");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace tpms::cpia
