// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "tpms/app/commands.hpp"
#include "tpms/bspline.hpp"
#include "tpms/constraints.hpp"
#include "tpms/cpia.hpp"
#include "tpms/oracles.hpp"
#include "tpms/sampler_io.hpp"
#include "tpms/weierstrass.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace tpms;
namespace fs = std::filesystem;
using Complex = std::complex<double>;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

int failures = 0;

void criterion(int id, const std::string& title, double time_limit_s, const std::function<Outcome()>& body)
{
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (time_limit_s > 0.0 && secs >= time_limit_s) {
        o.pass = false;
        o.detail += "; over time limit " + fmt("%.0f s", time_limit_s);
    }
    failures += o.pass ? 0 : 1;
    std::printf("[%s] criterion %d: %s | %s | %.3f s\n", o.pass ? "PASS" : "FAIL", id, title.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
}

Outcome matrix_fidelity()
{
    long mismatches = 0;
    int compared = 0;
    for (int n : {7, 8, 10, 12})
        for (int i = 1; i <= 5; ++i)
            for (int j = 1; j <= 4; ++j) {
                const DenseMatrix got = constraints::m_matrix(i, j, n).to_dense();
                const DenseMatrix want = oracles::brute_force_m(i, j, n);
                mismatches += (got.array() != want.array()).count();
                ++compared;
            }
    return {mismatches == 0, std::to_string(compared) + " matrices, " + std::to_string(mismatches) +
                                 " mismatched entries"};
}

Outcome transform_claims()
{
    double worst = 0.0;
    auto modulus_dev = [&](SurfaceKind s, int k) {
        for (double m : constraints::eigen_moduli(constraints::t_matrix(s, k)))
            worst = std::max(worst, std::abs(m - 1.0));
    };
    modulus_dev(SurfaceKind::Diamond, 1);
    modulus_dev(SurfaceKind::Diamond, 2);
    for (int k = 1; k <= 4; ++k)
        modulus_dev(SurfaceKind::SchwarzP, k);
    for (int k = 1; k <= 3; ++k)
        modulus_dev(SurfaceKind::Gyroid, k);

    auto g = [](int k) { return constraints::t_matrix(SurfaceKind::Gyroid, k).matrix(); };
    const double inv45 = (g(4) * g(5) - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff();
    const double inv67 = (g(6) * g(7) - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff();
    const bool ok = worst <= 1e-12 && inv45 <= 1e-12 && inv67 <= 1e-12;
    return {ok, fmt("max | |lambda| - 1 | = %.3g", worst) + fmt(", |T4g T5g - I| = %.3g", inv45) +
                    fmt(", |T6g T7g - I| = %.3g", inv67) + " (tol 1e-12)"};
}

Outcome selector_identities()
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    bool ok = true;
    int trials = 0;
    for (int n : {7, 8}) {
        const Eigen::Index m = static_cast<Eigen::Index>(n) * n;
        const auto N1 = constraints::n_selector(1, n).to_sparse();
        const auto N2 = constraints::n_selector(2, n).to_sparse();
        for (int t = 0; t < 5; ++t, ++trials) {
            ControlNet stacked(2 * m, 4);
            for (Eigen::Index r = 0; r < 2 * m; ++r)
                stacked.row(r) << uni(rng), uni(rng), uni(rng), 1.0;
            ControlNet want1 = ControlNet::Zero(2 * m, 4), want2 = ControlNet::Zero(2 * m, 4);
            want1.topRows(m) = stacked.topRows(m);
            want2.topRows(m) = stacked.bottomRows(m);
            ok = ok && ControlNet(N1 * stacked) == want1 && ControlNet(N2 * stacked) == want2;
        }
    }
    return {ok, std::to_string(trials) + " random stacks, exact comparison"};
}

Outcome spectral_condition()
{
    bool ok = true;
    std::string detail;
    for (int n : {6, 8, 10, 12}) {
        const double rho = cpia::pia_spectral_radius(bspline::greville_system(n, 3));
        ok = ok && rho < 1.0;
        detail += (detail.empty() ? "" : ", ") + ("n=" + std::to_string(n)) + fmt(" rho=%.6f", rho);
    }
    return {ok, detail};
}

Outcome convergence_for(SurfaceKind surface)
{
    const int n = 8;
    const auto sys = bspline::greville_system(n, 3, cpia::patch_count(surface));
    const ControlNet Q = sampler_io::fit_data(sampler_io::default_spec(surface), sys);
    const cpia::FitResult r = cpia::run(surface, sys, Q, 1e-10, 500);
    const double ratio = r.initial_gap > 0.0 ? r.limit_gap / r.initial_gap : r.limit_gap;
    const double c = r.contraction_estimate;
    const bool ok = std::isfinite(ratio) && ratio < 1e-6 && std::isfinite(c) && c > 0.0 && c < 1.0;
    return {ok, std::string(to_string(surface)) + ": iterations=" + std::to_string(r.iterations) +
                    fmt(", gap/initial=%.3g (need < 1e-6)", ratio) + fmt(", contraction=%.4f (need in (0,1))", c) +
                    (r.diverged ? ", iterate diverged" : "")};
}

std::vector<Complex> safe_disk_taus(std::uint64_t seed, int count)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<Complex> out;
    for (int k = 0; k < count; ++k)
        out.push_back(std::polar(weierstrass::kSafeRadius * std::sqrt(uni(rng)), 2.0 * std::numbers::pi * uni(rng)));
    return out;
}

double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want)
{
    const double scale = want.cwiseAbs().maxCoeff();
    return (got - want).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
}

Eigen::VectorXd six(const weierstrass::PQSplit& s)
{
    Eigen::VectorXd v(6);
    v << s.p, s.q;
    return v;
}

Eigen::VectorXd six(const std::array<double, 6>& a) { return Eigen::Map<const Eigen::VectorXd>(a.data(), 6); }

Outcome derivative_formulas()
{
    double first = 0.0, second = 0.0, offset = 0.0;
    for (const Complex& tau : safe_disk_taus(2024, 200)) {
        first = std::max(first, rel_err(six(weierstrass::phi_first_derivatives(tau)), six(oracles::pq_first_fd(tau, 1e-6))));
        second =
            std::max(second, rel_err(six(weierstrass::phi_second_derivatives(tau)), six(oracles::pq_second_fd(tau, 1e-5))));
        offset = std::max(offset, rel_err(weierstrass::offset_second_derivatives(weierstrass::frame_jet(tau)),
                                          oracles::normal_second_fd(tau, 1e-5)));
    }
    const bool ok = first <= 1e-6 && second <= 1e-5 && offset <= 1e-5;
    return {ok, fmt("200 taus; p'/q' rel=%.3g (1e-6)", first) + fmt(", p''/q'' rel=%.3g (1e-5)", second) +
                    fmt(", x''/y''/z'' rel=%.3g (1e-5)", offset)};
}

Outcome maximization(double* solver_seconds)
{
    const ComplexRect domain;
    const auto t0 = std::chrono::steady_clock::now();
    const auto fast = weierstrass::max_second_derivative(domain, 64, 64, 3);
    *solver_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto dense = oracles::dense_grid_max(domain, 1024, 1024);
    const double rel = std::abs(fast.max_abs - dense.max_abs) / dense.max_abs;
    const bool ok = rel <= 0.01 && *solver_seconds < 10.0;
    return {ok, fmt("refined=%.10g", fast.max_abs) + fmt(", dense 1024^2=%.10g", dense.max_abs) +
                    fmt(", rel diff=%.3g (1%%)", rel) + fmt(", solver %.3f s (< 10 s)", *solver_seconds)};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_verify_into(const fs::path& dir)
{
    const std::string out = dir.string();
    const char* argv[] = {"tpms-cpia", "verify", "--seed", "42", "--out", out.c_str()};
    std::ostringstream sink_out, sink_err;
    return app::run_cli(6, argv, sink_out, sink_err);
}

Outcome determinism(const fs::path& root)
{
    const fs::path a = root / "a", b = root / "b";
    fs::remove_all(a);
    fs::remove_all(b);
    const int ca = run_verify_into(a);
    const int cb = run_verify_into(b);
    const std::string ra = slurp(a / "verify_report.json");
    const std::string rb = slurp(b / "verify_report.json");
    const bool ok = !ra.empty() && ra == rb;
    return {ok, "exit codes " + std::to_string(ca) + "/" + std::to_string(cb) + ", report " +
                    std::to_string(ra.size()) + " bytes, " + (ra == rb ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv)
{
    const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "tpms-acceptance";
    fs::create_directories(root);

    criterion(1, "M matrices equal brute-force summation, n in {7,8,10,12}", 1.0, matrix_fidelity);
    criterion(2, "transform eigen moduli and Gyroid inverse pairs", 1.0, transform_claims);
    criterion(3, "N1/N2 selector identities, n in {7,8}", 0.0, selector_identities);
    criterion(4, "rho(I - Bw) < 1, n in {6,8,10,12}", 5.0, spectral_condition);
    criterion(5, "Schwarz_P constrained fit reaches the limit within 500 iterations", 30.0,
              [] { return convergence_for(SurfaceKind::SchwarzP); });
    criterion(5, "Diamond constrained fit reaches the limit within 500 iterations", 30.0,
              [] { return convergence_for(SurfaceKind::Diamond); });
    criterion(6, "closed-form derivatives agree with finite differences", 5.0, derivative_formulas);
    double solver_seconds = 0.0;
    criterion(7, "64x64 + 3 refinements within 1% of a 1024x1024 scan", 0.0,
              [&] { return maximization(&solver_seconds); });
    criterion(8, "verify --seed 42 twice gives byte-identical reports", 0.0, [&] { return determinism(root); });

    std::printf("%s: %d failing\n", failures == 0 ? "ALL PASS" : "NOT ALL PASS", failures);
    return failures == 0 ? 0 : 1;
}
