#include "tpms/cpia.hpp"
#include "tpms/error.hpp"
#include "tpms/oracles.hpp"
#include "tpms/sampler_io.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <random>

using namespace tpms;
using namespace tpms::cpia;

namespace {

template <typename F>
ErrorCode code_of(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::ConfigError;
}

bool same(const SparseMatrix& a, const SparseMatrix& b)
{
    return a.rows() == b.rows() && a.cols() == b.cols() && Eigen::MatrixXd(a) == Eigen::MatrixXd(b);
}

ControlNet random_net(Eigen::Index rows, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    ControlNet P(rows, 4);
    for (Eigen::Index r = 0; r < rows; ++r)
        P.row(r) << uni(rng), uni(rng), uni(rng), 1.0;
    return P;
}

ControlNet schwarz_data(const bspline::CollocationSystem& sys)
{
    return sampler_io::fit_data(sampler_io::default_spec(SurfaceKind::SchwarzP), sys);
}

}  // namespace

TEST_CASE("Diamond terms transcribe the four groups")
{
    const auto terms = diamond_constraints(8);
    REQUIRE(terms.size() == 8);
    const auto N1 = constraints::n_selector(1, 8).to_sparse();
    const auto N2 = constraints::n_selector(2, 8).to_sparse();

    const auto& t = terms[0];
    CHECK(same(t.row_op, constraints::block_diagonal(constraints::beta(4, 8), 2).to_sparse()));
    CHECK(same(t.selector, N1));
    CHECK(t.transform.matrix() == constraints::t_matrix(SurfaceKind::Diamond, 1).matrix());
    CHECK(same(t.paired_row_op, constraints::block_diagonal(constraints::beta(1, 8), 2).to_sparse()));
    CHECK(same(t.paired_selector, N2));

    for (std::size_t k = 0; k < terms.size(); ++k) {
        const bool first = k % 2 == 0;
        CHECK(same(terms[k].selector, first ? N1 : N2));
        CHECK(same(terms[k].paired_selector, first ? N2 : N1));
        CHECK(terms[k].row_op.rows() == 128);
    }
    const auto t2 = constraints::t_matrix(SurfaceKind::Diamond, 2).matrix();
    CHECK(terms[4].transform.matrix() == t2);
    CHECK(same(terms[6].row_op, constraints::block_diagonal(constraints::alpha(3, 8), 2).to_sparse()));
    CHECK(same(terms[6].paired_row_op, constraints::block_diagonal(constraints::alpha(2, 8), 2).to_sparse()));

    CHECK(code_of([] { diamond_constraints(6); }) == ErrorCode::UnsupportedGridSize);
}

TEST_CASE("Schwarz P terms pair each combination with itself")
{
    const auto terms = schwarz_p_constraints(8);
    REQUIRE(terms.size() == 8);
    for (std::size_t k = 0; k < terms.size(); ++k) {
        const int i = static_cast<int>(k / 2) + 1;
        CHECK(same(terms[k].row_op, terms[k].paired_row_op));
        CHECK(same(terms[k].selector, terms[k].paired_selector));
        CHECK(Eigen::MatrixXd(terms[k].selector) == Eigen::MatrixXd::Identity(64, 64));
        CHECK(terms[k].transform.matrix() == constraints::t_matrix(SurfaceKind::SchwarzP, i).matrix());
        const auto want = k % 2 == 0 ? constraints::beta(i, 8) : constraints::alpha(i, 8);
        CHECK(same(terms[k].row_op, want.to_sparse()));
    }
    const auto ten = schwarz_p_constraints(10);
    CHECK(ten.size() == 8);
    CHECK(ten[0].row_op.rows() == 100);
    CHECK(ten[0].row_op.cols() == 100);
}

TEST_CASE("Gyroid assignment is configurable")
{
    const auto def = gyroid_constraints(8);
    REQUIRE(def.size() == 8);
    for (int j = 1; j <= 4; ++j)
        CHECK(def[static_cast<std::size_t>(2 * (j - 1))].transform.matrix()
              == constraints::t_matrix(SurfaceKind::Gyroid, j).matrix());

    const GyroidAssignment custom{4, 6, 1, 2};
    const auto terms = gyroid_constraints(8, custom);
    for (int j = 1; j <= 4; ++j) {
        const auto want = constraints::t_matrix(SurfaceKind::Gyroid, custom[static_cast<std::size_t>(j - 1)]).matrix();
        CHECK(terms[static_cast<std::size_t>(2 * (j - 1))].transform.matrix() == want);
        CHECK(terms[static_cast<std::size_t>(2 * (j - 1) + 1)].transform.matrix() == want);
    }
    CHECK(code_of([] { gyroid_constraints(8, {1, 2, 3, 8}); }) == ErrorCode::IndexOutOfRange);
    CHECK(code_of([] { gyroid_constraints(6); }) == ErrorCode::UnsupportedGridSize);
}

TEST_CASE("plain PIA step at the limit is a fixed point")
{
    const auto sys = bspline::greville_system(8, 3);
    const ControlNet Q = schwarz_data(sys);
    CpiaState s;
    s.P = bspline::limit_solution(sys, Q);
    const auto next = iterate(s, sys, Q, {});
    CHECK((next.P - s.P).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(next.k == 1);
    CHECK(next.error_history.size() == 1);
    CHECK(next.constraint_residuals.size() == 1);
}

TEST_CASE("iterate checks dimensions")
{
    const auto sys = bspline::greville_system(8, 3);
    CpiaState s;
    s.P = random_net(64, 1);
    CHECK(code_of([&] { iterate(s, sys, random_net(63, 2), {}); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { iterate(s, sys, random_net(64, 2), diamond_constraints(8)); })
          == ErrorCode::DimensionMismatch);
}

TEST_CASE("plain PIA contracts at rho(I - Bw)")
{
    const auto sys = bspline::greville_system(8, 3);
    const ControlNet Q = schwarz_data(sys);
    const ControlNet limit = bspline::limit_solution(sys, Q);
    CpiaState s;
    s.P = Q;
    double prev = 0.0, last = 0.0;
    for (int k = 0; k < 50; ++k) {
        prev = (s.P - limit).cwiseAbs().maxCoeff();
        s = iterate(s, sys, Q, {});
        last = (s.P - limit).cwiseAbs().maxCoeff();
    }
    CHECK(std::abs(last / prev - pia_spectral_radius(sys)) < 0.1);
    CHECK(s.error_history.size() == 50);
}

TEST_CASE("residual is the offset from the limit")
{
    const auto sys = bspline::greville_system(8, 3);
    const ControlNet Q = random_net(64, 4);
    const ControlNet limit = bspline::limit_solution(sys, Q);
    CHECK(residual(limit, sys, Q).cwiseAbs().maxCoeff() == 0.0);
    ControlNet E = random_net(64, 5);
    E.col(3).setZero();
    CHECK((residual(limit + E, sys, Q) - E).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("nets satisfying every constraint are fixed points")
{
    for (SurfaceKind surface : {SurfaceKind::SchwarzP, SurfaceKind::Diamond, SurfaceKind::Gyroid}) {
        INFO(to_string(surface));
        const auto sys = bspline::greville_system(8, 3, patch_count(surface));
        const auto terms = constraints_for(surface, 8);
        CpiaState s;
        s.P = oracles::constraint_null_net(terms, sys.size(), 17);
        CHECK(constraint_correction(s.P, terms).cwiseAbs().maxCoeff() < 1e-10);
        const ControlNet Q = bspline::apply_bw(sys, s.P);
        // P = (Bw)^-1 Q by construction.
        CHECK((bspline::limit_solution(sys, Q) - s.P).cwiseAbs().maxCoeff() < 1e-9);
        const auto next = iterate(s, sys, Q, terms);
        CHECK((next.P - s.P).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, s.P.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("matched Schwarz P terms vanish on symmetric nets")
{
    // Transform-fixed rows make every term P T - P zero.
    const auto terms = schwarz_p_constraints(8);
    const auto sys = bspline::greville_system(8, 3);
    const ControlNet P = oracles::constraint_null_net(terms, sys.size(), 3);
    CHECK(constraint_correction(P, terms).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("the update is affine in P")
{
    for (SurfaceKind surface : {SurfaceKind::SchwarzP, SurfaceKind::Diamond}) {
        const auto sys = bspline::greville_system(8, 3, patch_count(surface));
        const auto terms = constraints_for(surface, 8);
        const ControlNet zeroQ = ControlNet::Zero(sys.size(), 4);
        auto step = [&](const ControlNet& P) {
            CpiaState s;
            s.P = P;
            return iterate(s, sys, zeroQ, terms).P;
        };
        const ControlNet base = step(ControlNet::Zero(sys.size(), 4));
        auto lin = [&](const ControlNet& P) { return ControlNet(step(P) - base); };
        const ControlNet P1 = random_net(sys.size(), 21), P2 = random_net(sys.size(), 22);
        const double a = 0.75, b = -1.5;
        const ControlNet lhs = lin(a * P1 + b * P2);
        const ControlNet rhs = a * lin(P1) + b * lin(P2);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("iteration operator matches a probed correction")
{
    for (SurfaceKind surface : {SurfaceKind::SchwarzP, SurfaceKind::Diamond, SurfaceKind::Gyroid}) {
        const auto sys = bspline::greville_system(8, 3, patch_count(surface));
        const auto terms = constraints_for(surface, 8);
        Eigen::VectorXd offset;
        const Eigen::MatrixXd K = oracles::probe_correction(terms, sys.size(), offset);
        const Eigen::Index n = sys.size();
        Eigen::MatrixXd want = K;
        const Eigen::MatrixXd pia = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd(sys.bw());
        for (int c = 0; c < 3; ++c)
            want.block(c * n, c * n, n, n) += pia;
        CHECK((Eigen::MatrixXd(iteration_operator(sys, terms)) - want).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("without constraints the iteration operator is I - Bw per coordinate")
{
    const auto sys = bspline::greville_system(8, 3);
    CHECK(iteration_spectral_radius(sys, {}) == Catch::Approx(pia_spectral_radius(sys)).epsilon(1e-12));
}

TEST_CASE("contraction estimate is a geometric mean of trailing ratios")
{
    std::vector<double> h;
    for (int k = 0; k < 30; ++k)
        h.push_back(std::pow(0.8, k) * (k % 2 == 0 ? 1.0 : 1.1));
    // Ten trailing ratios straddle an even number of odd/even flips.
    CHECK(contraction_estimate(h, 10) == Catch::Approx(0.8).epsilon(1e-12));
    CHECK(std::isnan(contraction_estimate({1.0})));
    CHECK(contraction_estimate({1.0, 0.5}) == Catch::Approx(0.5));
}

TEST_CASE("run without constraints reaches the limit")
{
    const auto sys = bspline::greville_system(8, 3);
    const ControlNet Q = schwarz_data(sys);
    const auto r = run(std::vector<ConstraintTerm>{}, sys, Q, 1e-10, 2000);
    CHECK(r.converged);
    CHECK_FALSE(r.diverged);
    CHECK(r.limit_gap < 1e-10);
    CHECK(r.contraction_estimate > 0.0);
    CHECK(r.contraction_estimate < 1.0);
    CHECK(r.contraction_estimate == Catch::Approx(pia_spectral_radius(sys)).margin(0.05));
    CHECK(r.step_history.size() == static_cast<std::size_t>(r.iterations));
    CHECK(r.gap_history.size() == static_cast<std::size_t>(r.iterations));
}

TEST_CASE("run edge cases")
{
    const auto sys = bspline::greville_system(8, 3);
    const ControlNet Q = schwarz_data(sys);

    const auto none = run(SurfaceKind::SchwarzP, sys, Q, 1e-10, 0);
    CHECK(none.iterations == 0);
    CHECK_FALSE(none.converged);
    CHECK(none.final_net == Q);

    const auto fixed = run(std::vector<ConstraintTerm>{}, sys, Q, 0.0, 25);
    CHECK(fixed.iterations == 25);
    CHECK_FALSE(fixed.converged);

    CHECK(code_of([&] { run(SurfaceKind::Diamond, sys, Q, 1e-10, 5); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("observed growth of the constrained update follows its operator radius")
{
    // The fit is measured, not assumed: the step ratio must track the
    // dominant eigenvalue of the linear part whatever its size.
    const auto sys = bspline::greville_system(8, 3);
    const ControlNet Q = schwarz_data(sys);
    const auto terms = schwarz_p_constraints(8);
    const auto r = run(terms, sys, Q, 0.0, 200);
    const double rho = iteration_spectral_radius(sys, terms);
    REQUIRE(std::isfinite(r.contraction_estimate));
    CHECK(r.contraction_estimate == Catch::Approx(rho).epsilon(0.05));
    CHECK(r.diverged == (rho > 1.0));
}
