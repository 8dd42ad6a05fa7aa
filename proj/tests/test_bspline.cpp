#include "tpms/bspline.hpp"
#include "tpms/error.hpp"
#include "tpms/oracles.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

using namespace tpms;
using namespace tpms::bspline;

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

ControlNet random_net(Eigen::Index rows, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    ControlNet P(rows, 4);
    for (Eigen::Index r = 0; r < rows; ++r)
        P.row(r) << uni(rng), uni(rng), uni(rng), 1.0;
    return P;
}

double dense_radius(const Eigen::MatrixXd& m)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("clamped uniform knots")
{
    const auto kv = make_knots(5, 3);
    CHECK(kv.knots == std::vector<double>{0, 0, 0, 0, 0.5, 1, 1, 1, 1});
    CHECK(kv.basis_count() == 5);
    CHECK(make_knots(4, 3).knots == std::vector<double>{0, 0, 0, 0, 1, 1, 1, 1});
    CHECK(code_of([] { make_knots(3, 3); }) == ErrorCode::InvalidDimensions);
    CHECK(code_of([] { make_knots(5, 0); }) == ErrorCode::InvalidDimensions);
}

TEST_CASE("Greville abscissae")
{
    const auto g = greville(make_knots(5, 3));
    const std::vector<double> want{0.0, 1.0 / 6.0, 0.5, 5.0 / 6.0, 1.0};
    REQUIRE(g.size() == want.size());
    for (std::size_t k = 0; k < g.size(); ++k)
        CHECK(g[k] == Catch::Approx(want[k]).margin(1e-15));
}

TEST_CASE("basis values match the recursive definition")
{
    for (int degree : {1, 2, 3, 4}) {
        const auto kv = make_knots(9, degree);
        for (double u : {0.0, 0.03, 0.2, 0.5, 0.61, 0.999, 1.0}) {
            const int span = find_span(kv, u);
            const auto N = nonzero_basis(kv, span, u);
            double sum = 0.0;
            for (int a = 0; a <= degree; ++a) {
                sum += N[a];
                CHECK(N[a] == Catch::Approx(oracles::cox_de_boor(span - degree + a, degree, u, kv.knots)).margin(1e-14));
            }
            CHECK(sum == Catch::Approx(1.0).margin(1e-14));
        }
    }
}

TEST_CASE("span lookup at the ends")
{
    const auto kv = make_knots(8, 3);
    CHECK(find_span(kv, 0.0) == 3);
    CHECK(find_span(kv, 1.0) == 7);
}

TEST_CASE("collocation matrix rows are partitions of unity")
{
    for (int n : {6, 8, 10, 12}) {
        const auto sys = greville_system(n, 3);
        CHECK(sys.size() == n * n);
        for (Eigen::Index r = 0; r < sys.size(); ++r)
            CHECK(sys.B.row(r).sum() == Catch::Approx(1.0).margin(1e-14));
        CHECK((sys.B.array() >= 0.0).all());
    }
}

TEST_CASE("basis_matrix demands a square system")
{
    const auto kv = make_knots(5, 3);
    std::vector<UV> sites{{0.1, 0.1}, {0.2, 0.2}};
    CHECK(code_of([&] { basis_matrix(kv, kv, sites); }) == ErrorCode::NonSquareSystem);
}

TEST_CASE("stacked systems are block diagonal")
{
    const auto one = greville_system(7, 3);
    const auto two = greville_system(7, 3, 2);
    CHECK(two.size() == 2 * one.size());
    CHECK(two.patches == 2);
    CHECK(two.patch_size() == one.size());
    CHECK(DenseMatrix(two.B.topLeftCorner(49, 49)) == one.B);
    CHECK(DenseMatrix(two.B.bottomRightCorner(49, 49)) == one.B);
    CHECK(two.B.topRightCorner(49, 49).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("apply_bw matches a dense product")
{
    const auto sys = greville_system(8, 3);
    const ControlNet P = random_net(sys.size(), 3);
    const ControlNet got = apply_bw(sys, P);
    const Eigen::MatrixXd want = Eigen::MatrixXd(sys.B) * Eigen::MatrixXd(P);
    CHECK((Eigen::MatrixXd(got) - want).cwiseAbs().maxCoeff() < 1e-13);
    CHECK(code_of([&] { apply_bw(sys, random_net(10, 1)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("limit solution agrees with Gauss-Jordan")
{
    const auto sys = greville_system(8, 3);
    const ControlNet Q = random_net(sys.size(), 5);
    const ControlNet P = limit_solution(sys, Q);
    const Eigen::MatrixXd want = oracles::gauss_jordan_solve(Eigen::MatrixXd(sys.bw()), Eigen::MatrixXd(Q));
    CHECK((Eigen::MatrixXd(P) - want).cwiseAbs().maxCoeff() < 1e-10);
    // Homogeneous column stays 1 (partition of unity).
    CHECK((P.col(3).array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("singular systems are reported")
{
    auto sys = greville_system(7, 3);
    sys.B.row(3) = sys.B.row(4);
    CHECK(code_of([&] { limit_solution(sys, random_net(sys.size(), 1)); }) == ErrorCode::SingularSystem);
}

TEST_CASE("surface evaluation matches the recursive basis")
{
    const auto sys = greville_system(8, 3);
    const ControlNet P = random_net(sys.size(), 7);
    for (double u : {0.0, 0.37, 0.5, 1.0})
        for (double v : {0.0, 0.11, 0.8, 1.0}) {
            const Vec3 got = surface_eval(P, u, v, sys.ku, sys.kv);
            const Vec3 want = oracles::surface_point(P, u, v, 3, sys.ku.knots, sys.kv.knots);
            CHECK((got - want).cwiseAbs().maxCoeff() < 1e-13);
        }
    CHECK(code_of([&] { surface_eval(P, 1.2, 0.5, sys.ku, sys.kv); }) == ErrorCode::ParamOutOfRange);
    CHECK(code_of([&] { surface_eval(random_net(5, 1), 0.5, 0.5, sys.ku, sys.kv); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("interpolation through Greville sites reproduces the data")
{
    const auto sys = greville_system(8, 3);
    const ControlNet Q = random_net(sys.size(), 9);
    const ControlNet P = limit_solution(sys, Q);
    for (Eigen::Index k = 0; k < sys.size(); ++k) {
        const auto& uv = sys.params[static_cast<std::size_t>(k)];
        CHECK((surface_eval(P, uv.u, uv.v, sys.ku, sys.kv) - Q.row(k).head<3>().transpose()).cwiseAbs().maxCoeff()
              < 1e-10);
    }
}

TEST_CASE("spectral radius of simple matrices")
{
    DenseMatrix d = DenseMatrix::Zero(3, 3);
    d.diagonal() << 0.3, -0.7, 0.5;
    CHECK(spectral_radius(d) == Catch::Approx(0.7).epsilon(1e-9));

    // Complex pair with modulus 0.9.
    DenseMatrix rot(2, 2);
    const double c = 0.9 * std::cos(1.0), s = 0.9 * std::sin(1.0);
    rot << c, -s, s, c;
    CHECK(spectral_radius(rot) == Catch::Approx(0.9).epsilon(1e-9));

    // +-lambda pair.
    DenseMatrix flip(2, 2);
    flip << 0.0, 0.5, 0.5, 0.0;
    CHECK(spectral_radius(flip) == Catch::Approx(0.5).epsilon(1e-9));

    CHECK(spectral_radius(DenseMatrix::Zero(4, 4)) == 0.0);
    CHECK(code_of([] { spectral_radius(DenseMatrix::Zero(2, 3)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("rho(I - Bw) below one for Greville bicubic collocation")
{
    for (int n : {6, 8, 10, 12}) {
        const auto sys = greville_system(n, 3);
        const DenseMatrix m = DenseMatrix::Identity(sys.size(), sys.size()) - sys.bw();
        const double rho = spectral_radius(m);
        CHECK(rho < 1.0);
        CHECK(rho == Catch::Approx(dense_radius(m)).epsilon(1e-8));
    }
}
