#include "tpms/app/verify.hpp"

#include "tpms/bspline.hpp"
#include "tpms/constraints.hpp"
#include "tpms/cpia.hpp"
#include "tpms/error.hpp"
#include "tpms/kernels.hpp"
#include "tpms/oracles.hpp"
#include "tpms/sampler_io.hpp"
#include "tpms/weierstrass.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace tpms::app {

namespace {

using nlohmann::json;
using weierstrass::Complex;

constexpr int kTauSamples = 200;

std::vector<Complex> safe_disk_points(std::uint64_t seed, int count)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<Complex> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double r = weierstrass::kSafeRadius * std::sqrt(uni(rng));
        const double a = 2.0 * std::numbers::pi * uni(rng);
        out.push_back(std::polar(r, a));
    }
    return out;
}

double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want)
{
    const double scale = want.cwiseAbs().maxCoeff();
    return (got - want).cwiseAbs().maxCoeff() / (scale > 0.0 ? scale : 1.0);
}

Eigen::VectorXd stack(const Vec3& a, const Vec3& b)
{
    Eigen::VectorXd v(6);
    v << a, b;
    return v;
}

Eigen::VectorXd from6(const std::array<double, 6>& a)
{
    return Eigen::Map<const Eigen::VectorXd>(a.data(), 6);
}

CheckResult guarded(const std::string& name, const std::function<CheckResult()>& body)
{
    try {
        return body();
    } catch (const std::exception& e) {
        return {name, false, json{{"error", e.what()}}};
    }
}

CheckResult check_m_oracle()
{
    int compared = 0;
    json mismatches = json::array();
    for (int n : {7, 8, 10, 12}) {
        for (int j = 1; j <= 4; ++j) {
            for (int i = 1; i <= 5; ++i) {
                ++compared;
                if (constraints::m_matrix(i, j, n).to_dense() != oracles::brute_force_m(i, j, n))
                    mismatches.push_back(json{{"n", n}, {"i", i}, {"j", j}});
            }
        }
    }
    return {"m_matrix_oracle", mismatches.empty(), json{{"compared", compared}, {"mismatches", mismatches}}};
}

CheckResult check_m_structure()
{
    bool ok = true;
    for (int n : {7, 8, 10, 12}) {
        for (int j = 1; j <= 4; ++j) {
            for (int i = 1; i <= 5; ++i) {
                std::vector<int> per_row(static_cast<std::size_t>(n * n), 0);
                for (const auto& e : constraints::m_matrix(i, j, n).entries()) {
                    ok = ok && e.value == 1.0;
                    ++per_row[static_cast<std::size_t>(e.row)];
                }
                ok = ok && std::all_of(per_row.begin(), per_row.end(), [](int c) { return c <= 1; });
            }
        }
    }
    return {"m_matrix_structure", ok, json{{"rule", "all entries 1, at most one per row"}}};
}

std::vector<std::pair<std::string, Eigen::Matrix4d>> listed_transforms(const RunConfig& cfg)
{
    std::vector<std::pair<std::string, Eigen::Matrix4d>> out;
    Eigen::Matrix4d t1d = constraints::t_matrix(SurfaceKind::Diamond, 1).matrix();
    if (cfg.tamper_t1d) {
        const auto& t = *cfg.tamper_t1d;
        t1d(static_cast<int>(t[0]) - 1, static_cast<int>(t[1]) - 1) = t[2];
    }
    out.emplace_back("T1d", t1d);
    out.emplace_back("T2d", constraints::t_matrix(SurfaceKind::Diamond, 2).matrix());
    for (int k = 1; k <= 4; ++k)
        out.emplace_back("T" + std::to_string(k) + "p", constraints::t_matrix(SurfaceKind::SchwarzP, k).matrix());
    for (int k = 1; k <= 3; ++k)
        out.emplace_back("T" + std::to_string(k) + "g", constraints::t_matrix(SurfaceKind::Gyroid, k).matrix());
    return out;
}

CheckResult check_transform_moduli(const RunConfig& cfg)
{
    bool ok = true;
    json detail = json::object();
    for (const auto& [name, m] : listed_transforms(cfg)) {
        Eigen::EigenSolver<Eigen::Matrix4d> es(m, false);
        double dev = 0.0;
        for (int k = 0; k < 4; ++k)
            dev = std::max(dev, std::abs(std::abs(es.eigenvalues()[k]) - 1.0));
        detail[name] = dev;
        ok = ok && dev <= 1e-12;
    }
    return {"transform_eigen_moduli", ok, json{{"max_deviation_from_1", detail}, {"tolerance", 1e-12}}};
}

CheckResult check_transform_structure()
{
    using constraints::t_matrix;
    const auto g = [](int k) { return t_matrix(SurfaceKind::Gyroid, k).matrix(); };
    const double inv45 = (g(4) * g(5) - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff();
    const double inv67 = (g(6) * g(7) - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff();
    double ortho = 0.0;
    for (int k = 1; k <= 4; ++k) {
        const Eigen::Matrix3d L = t_matrix(SurfaceKind::SchwarzP, k).matrix().topLeftCorner<3, 3>();
        ortho = std::max(ortho, (L.transpose() * L - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff());
    }
    bool last_row = true;
    for (SurfaceKind s : {SurfaceKind::Gyroid, SurfaceKind::Diamond, SurfaceKind::SchwarzP})
        for (int k = 1; k <= constraints::t_count(s); ++k)
            last_row = last_row && t_matrix(s, k).matrix().row(3) == Eigen::RowVector4d(0, 0, 0, 1);
    const bool ok = inv45 <= 1e-12 && inv67 <= 1e-12 && ortho <= 1e-12 && last_row;
    return {"transform_structure", ok,
            json{{"T4g_T5g_minus_I", inv45}, {"T6g_T7g_minus_I", inv67}, {"schwarz_p_orthogonality", ortho},
                 {"last_rows_exact", last_row}}};
}

CheckResult check_selectors(std::uint64_t seed)
{
    std::mt19937_64 rng(seed ^ 0x5e1ec7ULL);
    std::uniform_int_distribution<int> uni(-1000, 1000);
    bool ok = true;
    for (int n : {7, 8}) {
        const Eigen::Index m = static_cast<Eigen::Index>(n) * n;
        ControlNet P1(m, 4), P2(m, 4);
        for (Eigen::Index r = 0; r < m; ++r) {
            P1.row(r) << uni(rng), uni(rng), uni(rng), 1.0;
            P2.row(r) << uni(rng), uni(rng), uni(rng), 1.0;
        }
        ControlNet stacked(2 * m, 4);
        stacked << P1, P2;
        const auto N1 = constraints::n_selector(1, n).to_sparse();
        const auto N2 = constraints::n_selector(2, n).to_sparse();
        ControlNet want1 = ControlNet::Zero(2 * m, 4), want2 = ControlNet::Zero(2 * m, 4);
        want1.topRows(m) = P1;
        want2.topRows(m) = P2;
        ok = ok && ControlNet(N1 * stacked) == want1 && ControlNet(N2 * stacked) == want2;
    }
    return {"selector_identities", ok, json{{"sizes", {7, 8}}}};
}

CheckResult check_first_derivatives(std::uint64_t seed)
{
    double worst = 0.0;
    for (const Complex& tau : safe_disk_points(seed, kTauSamples)) {
        const auto d = weierstrass::phi_first_derivatives(tau);
        worst = std::max(worst, rel_err(stack(d.p, d.q), from6(oracles::pq_first_fd(tau, 1e-6))));
    }
    return {"phi_first_derivatives_fd", worst <= 1e-6, json{{"max_rel_error", worst}, {"tolerance", 1e-6}}};
}

CheckResult check_second_derivatives(std::uint64_t seed)
{
    double worst = 0.0;
    for (const Complex& tau : safe_disk_points(seed, kTauSamples)) {
        const auto d = weierstrass::phi_second_derivatives(tau);
        worst = std::max(worst, rel_err(stack(d.p, d.q), from6(oracles::pq_second_fd(tau, 1e-5))));
    }
    return {"phi_second_derivatives_fd", worst <= 1e-5, json{{"max_rel_error", worst}, {"tolerance", 1e-5}}};
}

CheckResult check_offset_derivatives(std::uint64_t seed, double& printed_worst)
{
    double worst = 0.0;
    printed_worst = 0.0;
    for (const Complex& tau : safe_disk_points(seed, kTauSamples)) {
        const auto jet = weierstrass::frame_jet(tau);
        const Vec3 want = oracles::normal_second_fd(tau, 1e-5);
        worst = std::max(worst, rel_err(weierstrass::offset_second_derivatives(jet), want));
        printed_worst =
            std::max(printed_worst, rel_err(weierstrass::offset_second_derivatives_as_printed(jet), want));
    }
    return {"normal_second_derivatives_fd", worst <= 1e-5, json{{"max_rel_error", worst}, {"tolerance", 1e-5}}};
}

CheckResult check_pia_radius()
{
    bool ok = true;
    json detail = json::object();
    for (int n : {6, 8, 10, 12}) {
        const auto sys = bspline::greville_system(n, 3);
        const double power = bspline::spectral_radius(DenseMatrix(DenseMatrix::Identity(sys.size(), sys.size()) - sys.bw()));
        const double dense = cpia::pia_spectral_radius(sys);
        detail[std::to_string(n)] = json{{"power_iteration", power}, {"eigensolver", dense}};
        ok = ok && power < 1.0 && std::abs(power - dense) < 1e-6;
    }
    return {"pia_spectral_radius", ok, detail};
}

CheckResult check_kernels(std::uint64_t seed)
{
    const kernels::KernelTable& ref = kernels::scalar_table();
    const kernels::KernelTable& act = kernels::active();
    std::mt19937_64 rng(seed ^ 0x4b45524eULL);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    const std::size_t rows = 37, inner = 29;
    std::vector<double> a(rows * inner), x(inner * 4), y1(rows * 4), y2(rows * 4), v(inner), g1(rows), g2(rows);
    for (auto& e : a) e = uni(rng);
    for (auto& e : x) e = uni(rng);
    for (auto& e : v) e = uni(rng);
    ref.gemm_n4(a.data(), rows, inner, x.data(), y1.data());
    act.gemm_n4(a.data(), rows, inner, x.data(), y2.data());
    ref.gemv(a.data(), rows, inner, v.data(), g1.data());
    act.gemv(a.data(), rows, inner, v.data(), g2.data());
    double gemm_err = 0.0, gemv_err = 0.0;
    for (std::size_t k = 0; k < y1.size(); ++k) gemm_err = std::max(gemm_err, std::abs(y1[k] - y2[k]));
    for (std::size_t k = 0; k < g1.size(); ++k) gemv_err = std::max(gemv_err, std::abs(g1[k] - g2[k]));

    const auto taus = safe_disk_points(seed ^ 0x6f6666ULL, 203);
    std::vector<double> re, im;
    for (const auto& t : taus) {
        re.push_back(t.real());
        im.push_back(t.imag());
    }
    std::vector<double> d1(taus.size() * 3), d2(taus.size() * 3);
    ref.offset_d2(re.data(), im.data(), taus.size(), d1.data());
    act.offset_d2(re.data(), im.data(), taus.size(), d2.data());
    double d2_err = 0.0;
    for (std::size_t k = 0; k < d1.size(); ++k)
        d2_err = std::max(d2_err, std::abs(d1[k] - d2[k]) / std::max(1.0, std::abs(d1[k])));

    const bool ok = gemm_err <= 1e-12 && gemv_err <= 1e-12 && d2_err <= 1e-9;
    // The active kernel name is left out so reports match across machines.
    return {"kernel_equivalence", ok,
            json{{"gemm_n4_max_abs", gemm_err}, {"gemv_max_abs", gemv_err}, {"offset_d2_max_rel", d2_err}}};
}

ControlNet sampled_data(SurfaceKind surface, const bspline::CollocationSystem& sys, const RunConfig& cfg)
{
    sampler_io::PatchSpec spec = sampler_io::default_spec(surface);
    spec.domain = cfg.domain;
    if (surface == cfg.surface && cfg.bonnet_angle)
        spec.bonnet_angle = *cfg.bonnet_angle;
    return sampler_io::fit_data(spec, sys);
}

CheckResult check_pia_fixed_point(const RunConfig& cfg)
{
    const auto sys = bspline::greville_system(8, 3);
    const ControlNet Q = sampled_data(SurfaceKind::SchwarzP, sys, cfg);
    cpia::CpiaState s;
    s.P = bspline::limit_solution(sys, Q);
    const auto next = cpia::iterate(s, sys, Q, {});
    const double moved = (next.P - s.P).cwiseAbs().maxCoeff();
    return {"pia_fixed_point", moved <= 1e-12, json{{"step", moved}, {"tolerance", 1e-12}}};
}

CheckResult check_constrained_fixed_points(const RunConfig& cfg)
{
    bool ok = true;
    json detail = json::object();
    for (SurfaceKind surface : {SurfaceKind::SchwarzP, SurfaceKind::Diamond, SurfaceKind::Gyroid}) {
        const auto sys = bspline::greville_system(8, 3, cpia::patch_count(surface));
        const auto terms = cpia::constraints_for(surface, 8, cfg.assignment());
        cpia::CpiaState s;
        s.P = oracles::constraint_null_net(terms, sys.size(), cfg.seed);
        const ControlNet Q = bspline::apply_bw(sys, s.P);
        const auto next = cpia::iterate(s, sys, Q, terms);
        const double moved = (next.P - s.P).cwiseAbs().maxCoeff() / std::max(1.0, s.P.cwiseAbs().maxCoeff());
        detail[std::string(to_string(surface))] = moved;
        ok = ok && moved <= 1e-12;
    }
    return {"constrained_fixed_point", ok, json{{"relative_step", detail}, {"tolerance", 1e-12}}};
}

CheckResult check_pia_contraction(const RunConfig& cfg)
{
    const auto sys = bspline::greville_system(8, 3);
    const ControlNet Q = sampled_data(SurfaceKind::SchwarzP, sys, cfg);
    const ControlNet limit = bspline::limit_solution(sys, Q);
    cpia::CpiaState s;
    s.P = Q;
    double prev = 0.0, last = 0.0;
    for (int k = 0; k < 50; ++k) {
        prev = (s.P - limit).cwiseAbs().maxCoeff();
        s = cpia::iterate(s, sys, Q, {});
        last = (s.P - limit).cwiseAbs().maxCoeff();
    }
    const double ratio = last / prev;
    const double rho = cpia::pia_spectral_radius(sys);
    return {"pia_contraction", std::abs(ratio - rho) <= 0.1,
            json{{"ratio_after_50", ratio}, {"rho", rho}, {"tolerance", 0.1}}};
}

CheckResult check_quadrature(const RunConfig& cfg)
{
    double worst = 0.0;
    for (const Complex& tau : safe_disk_points(cfg.seed ^ 0x71756164ULL, 20)) {
        const Complex t = tau * (0.42 / weierstrass::kSafeRadius);
        const Vec3 a = sampler_io::integrate(t, 0.0);
        int panels = 1;
        Vec3 prev = sampler_io::integrate_segment(0.0, t, 0.0, panels);
        for (;;) {
            panels *= 2;
            const Vec3 next = sampler_io::integrate_segment(0.0, t, 0.0, panels);
            if ((next - prev).cwiseAbs().maxCoeff() < 1e-13 || panels >= 4096) {
                prev = next;
                break;
            }
            prev = next;
        }
        worst = std::max(worst, (a - prev).cwiseAbs().maxCoeff());
    }
    return {"quadrature_step_halving", worst < 1e-8, json{{"max_abs_change", worst}, {"tolerance", 1e-8}}};
}

CheckResult diag_alpha_beta(int n)
{
    json detail = json::object();
    bool all = true;
    for (int i = 1; i <= 4; ++i) {
        for (const auto& [label, m] : {std::pair{"alpha", constraints::alpha(i, n)}, std::pair{"beta", constraints::beta(i, n)}}) {
            double off = 0.0;
            for (double mod : constraints::eigen_moduli(m))
                off = std::max(off, std::min(std::abs(mod), std::abs(mod - 1.0)));
            detail[std::string(label) + std::to_string(i)] = off;
            all = all && off <= 1e-9;
        }
    }
    return {"alpha_beta_moduli_in_0_1", all, json{{"n", n}, {"distance_from_0_or_1", detail}}};
}

CheckResult diag_rank(int n)
{
    const auto sum = constraints::n_selector(1, n) + constraints::n_selector(2, n);
    const auto r = constraints::rank(sum);
    return {"rank_N1_plus_N2", r == n / 2, json{{"n", n}, {"computed", r}, {"claimed_n_over_2", n / 2}}};
}

CheckResult diag_operator_radius(const RunConfig& cfg)
{
    json detail = json::object();
    bool all = true;
    for (SurfaceKind surface : {SurfaceKind::SchwarzP, SurfaceKind::Diamond, SurfaceKind::Gyroid}) {
        const auto sys = bspline::greville_system(8, 3, cpia::patch_count(surface));
        const double rho = cpia::iteration_spectral_radius(sys, cpia::constraints_for(surface, 8, cfg.assignment()));
        detail[std::string(to_string(surface))] = rho;
        all = all && rho < 1.0;
    }
    return {"iteration_operator_radius_below_1", all, json{{"n", 8}, {"radius", detail}}};
}

CheckResult diag_limit(const RunConfig& cfg)
{
    json detail = json::object();
    bool all = true;
    for (SurfaceKind surface : {SurfaceKind::SchwarzP, SurfaceKind::Diamond}) {
        const auto sys = bspline::greville_system(8, 3, cpia::patch_count(surface));
        const ControlNet Q = sampled_data(surface, sys, cfg);
        const auto r = cpia::run(surface, sys, Q, 1e-10, 500);
        const double ratio = r.limit_gap / r.initial_gap;
        const bool hit = ratio < 1e-6 && r.contraction_estimate > 0.0 && r.contraction_estimate < 1.0;
        detail[std::string(to_string(surface))] =
            json{{"iterations", r.iterations}, {"diverged", r.diverged}, {"gap_ratio", ratio},
                 {"contraction_estimate", r.contraction_estimate}};
        all = all && hit;
    }
    return {"constrained_fit_reaches_limit", all, detail};
}

}  // namespace

bool VerifyReport::all_pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

nlohmann::json VerifyReport::to_json() const
{
    json checks_j = json::array();
    int passed = 0;
    for (const auto& c : checks) {
        checks_j.push_back(json{{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        passed += c.pass ? 1 : 0;
    }
    json diag_j = json::array();
    for (const auto& d : diagnostics)
        diag_j.push_back(json{{"name", d.name}, {"holds", d.pass}, {"detail", d.detail}});
    return json{{"seed", seed},
                {"passed", passed},
                {"failed", static_cast<int>(checks.size()) - passed},
                {"all_pass", all_pass()},
                {"checks", checks_j},
                {"diagnostics", diag_j}};
}

VerifyReport run_verify(const RunConfig& cfg)
{
    VerifyReport report;
    report.seed = cfg.seed;
    auto& c = report.checks;
    double printed_worst = 0.0;

    c.push_back(guarded("m_matrix_oracle", check_m_oracle));
    c.push_back(guarded("m_matrix_structure", check_m_structure));
    c.push_back(guarded("transform_eigen_moduli", [&] { return check_transform_moduli(cfg); }));
    c.push_back(guarded("transform_structure", check_transform_structure));
    c.push_back(guarded("selector_identities", [&] { return check_selectors(cfg.seed); }));
    c.push_back(guarded("phi_first_derivatives_fd", [&] { return check_first_derivatives(cfg.seed); }));
    c.push_back(guarded("phi_second_derivatives_fd", [&] { return check_second_derivatives(cfg.seed); }));
    c.push_back(guarded("normal_second_derivatives_fd",
                        [&] { return check_offset_derivatives(cfg.seed, printed_worst); }));
    c.push_back(guarded("pia_spectral_radius", check_pia_radius));
    c.push_back(guarded("kernel_equivalence", [&] { return check_kernels(cfg.seed); }));
    c.push_back(guarded("quadrature_step_halving", [&] { return check_quadrature(cfg); }));
    c.push_back(guarded("pia_fixed_point", [&] { return check_pia_fixed_point(cfg); }));
    c.push_back(guarded("constrained_fixed_point", [&] { return check_constrained_fixed_points(cfg); }));
    c.push_back(guarded("pia_contraction", [&] { return check_pia_contraction(cfg); }));

    auto& d = report.diagnostics;
    d.push_back({"printed_offset_formula_matches_fd", printed_worst <= 1e-5,
                 json{{"max_rel_error", printed_worst}}});
    d.push_back(guarded("alpha_beta_moduli_in_0_1", [] { return diag_alpha_beta(8); }));
    d.push_back(guarded("rank_N1_plus_N2", [] { return diag_rank(8); }));
    d.push_back(guarded("iteration_operator_radius_below_1", [&] { return diag_operator_radius(cfg); }));
    d.push_back(guarded("constrained_fit_reaches_limit", [&] { return diag_limit(cfg); }));
    return report;
}

}  // namespace tpms::app
