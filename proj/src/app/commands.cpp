#include "tpms/app/commands.hpp"

#include "tpms/app/verify.hpp"
#include "tpms/bspline.hpp"
#include "tpms/constraints.hpp"
#include "tpms/cpia.hpp"
#include "tpms/error.hpp"
#include "tpms/sampler_io.hpp"
#include "tpms/weierstrass.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <regex>
#include <string>
#include <vector>

namespace tpms::app {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

fs::path prepare_output(const RunConfig& cfg)
{
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec || !fs::is_directory(cfg.output_dir))
        throw Error(ErrorCode::IoError, "cannot create output directory '" + cfg.output_dir.string() + "'");
    return cfg.output_dir;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    return out;
}

void write_json(const json& doc, const fs::path& path)
{
    auto out = open_out(path);
    out << doc.dump(2) << '\n';
    if (!out)
        throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

// ---- matrices ---------------------------------------------------------------

struct NamedMatrix {
    std::string name;
    std::vector<constraints::Entry> entries;
    Eigen::Index rows = 0;
    Eigen::Index cols = 0;
    json info;
};

NamedMatrix from_selector(const std::string& name, const constraints::SparseSelector& m, bool eigen)
{
    NamedMatrix out{name, m.entries(), m.rows(), m.cols(), json::object()};
    out.info["nonzeros"] = m.nonzeros();
    out.info["rank"] = constraints::rank(m);
    if (eigen) {
        double off = 0.0;
        for (double mod : constraints::eigen_moduli(m))
            off = std::max(off, std::min(std::abs(mod), std::abs(mod - 1.0)));
        out.info["max_modulus_distance_from_0_or_1"] = off;
    }
    return out;
}

NamedMatrix from_transform(const std::string& name, const constraints::HomTransform& t)
{
    NamedMatrix out{name, {}, 4, 4, json::object()};
    for (Eigen::Index r = 0; r < 4; ++r)
        for (Eigen::Index c = 0; c < 4; ++c)
            if (t.matrix()(r, c) != 0.0)
                out.entries.push_back({r, c, t.matrix()(r, c)});
    const auto moduli = constraints::eigen_moduli(t);
    out.info["eigen_moduli"] = std::vector<double>(moduli.begin(), moduli.end());
    return out;
}

std::string surface_suffix(SurfaceKind s)
{
    switch (s) {
    case SurfaceKind::Gyroid:
        return "g";
    case SurfaceKind::Diamond:
        return "d";
    case SurfaceKind::SchwarzP:
        return "p";
    }
    return "";
}

std::vector<NamedMatrix> requested_matrices(const RunConfig& cfg)
{
    const int n = cfg.n;
    std::vector<NamedMatrix> out;
    const std::string& want = cfg.matrix;
    const bool all = want == "all";
    std::smatch m;

    if (all) {
        for (int j = 1; j <= 4; ++j)
            for (int i = 1; i <= 5; ++i)
                out.push_back(from_selector("M" + std::to_string(i) + std::to_string(j), constraints::m_matrix(i, j, n),
                                            false));
        for (int i = 1; i <= 4; ++i)
            out.push_back(from_selector("alpha" + std::to_string(i), constraints::alpha(i, n), true));
        for (int i = 1; i <= 4; ++i)
            out.push_back(from_selector("beta" + std::to_string(i), constraints::beta(i, n), true));
        out.push_back(from_selector("N1", constraints::n_selector(1, n), false));
        out.push_back(from_selector("N2", constraints::n_selector(2, n), false));
        out.push_back(from_selector("N1+N2", constraints::n_selector(1, n) + constraints::n_selector(2, n), false));
        for (int k = 1; k <= constraints::t_count(cfg.surface); ++k)
            out.push_back(from_transform("T" + std::to_string(k) + surface_suffix(cfg.surface),
                                         constraints::t_matrix(cfg.surface, k)));
    } else if (std::regex_match(want, m, std::regex("M([1-5])([1-4])"))) {
        out.push_back(from_selector(want, constraints::m_matrix(std::stoi(m[1]), std::stoi(m[2]), n), false));
    } else if (std::regex_match(want, m, std::regex("alpha([1-4])"))) {
        out.push_back(from_selector(want, constraints::alpha(std::stoi(m[1]), n), true));
    } else if (std::regex_match(want, m, std::regex("beta([1-4])"))) {
        out.push_back(from_selector(want, constraints::beta(std::stoi(m[1]), n), true));
    } else if (std::regex_match(want, m, std::regex("N([12])"))) {
        out.push_back(from_selector(want, constraints::n_selector(std::stoi(m[1]), n), false));
    } else if (std::regex_match(want, m, std::regex("T([1-9])([gdp]?)"))) {
        SurfaceKind s = cfg.surface;
        if (m[2] == "g")
            s = SurfaceKind::Gyroid;
        else if (m[2] == "d")
            s = SurfaceKind::Diamond;
        else if (m[2] == "p")
            s = SurfaceKind::SchwarzP;
        out.push_back(from_transform("T" + std::string(m[1]) + surface_suffix(s),
                                     constraints::t_matrix(s, std::stoi(m[1]))));
    } else {
        throw Error(ErrorCode::ConfigError,
                    "matrix: unknown name '" + want + "' (all, Mij, alphaI, betaI, N1, N2, Tk[g|d|p])");
    }
    return out;
}

std::string file_stem(const std::string& name)
{
    std::string s = name;
    for (char& c : s)
        if (c == '+')
            c = '_';
    return s;
}

}  // namespace

int cmd_matrices(const RunConfig& cfg, std::ostream& out)
{
    const auto matrices = requested_matrices(cfg);
    const fs::path dir = prepare_output(cfg);
    json list = json::array();
    for (const auto& m : matrices) {
        const fs::path csv = dir / (file_stem(m.name) + ".csv");
        auto f = open_out(csv);
        f << "row,col,value\n";
        for (const auto& e : m.entries)
            f << e.row + 1 << ',' << e.col + 1 << ',' << fmt17(e.value) << '\n';
        if (!f)
            throw Error(ErrorCode::IoError, "write to '" + csv.string() + "' failed");
        json item = m.info;
        item["name"] = m.name;
        item["rows"] = m.rows;
        item["cols"] = m.cols;
        item["file"] = csv.filename().string();
        list.push_back(item);
    }
    const json report{{"surface", to_string(cfg.surface)}, {"n", cfg.n}, {"matrices", list}};
    write_json(report, dir / "report.json");
    out << "wrote " << matrices.size() << " matrices to " << dir.string() << '\n';
    return kExitOk;
}

int cmd_fit(const RunConfig& cfg, std::ostream& out)
{
    const auto sys = bspline::greville_system(cfg.n, cfg.degree, cpia::patch_count(cfg.surface));
    sampler_io::PatchSpec spec = sampler_io::default_spec(cfg.surface);
    spec.domain = cfg.domain;
    spec.bonnet_angle = cfg.bonnet();
    const ControlNet Q = sampler_io::fit_data(spec, sys);

    const auto terms = cpia::constraints_for(cfg.surface, cfg.n, cfg.assignment());
    const auto result = cpia::run(terms, sys, Q, cfg.tol, cfg.max_iters);
    const double rho = cpia::pia_spectral_radius(sys);
    const double op_rho = cpia::iteration_spectral_radius(sys, terms);

    const fs::path dir = prepare_output(cfg);
    sampler_io::save_net(result.final_net, dir / "net.csv");
    {
        auto f = open_out(dir / "convergence.csv");
        f << "k,step_norm,limit_gap\n";
        for (std::size_t k = 0; k < result.step_history.size(); ++k)
            f << k + 1 << ',' << fmt17(result.step_history[k]) << ',' << fmt17(result.gap_history[k]) << '\n';
        if (!f)
            throw Error(ErrorCode::IoError, "write to convergence.csv failed");
    }
    const json summary{{"surface", to_string(cfg.surface)},
                       {"n", cfg.n},
                       {"degree", cfg.degree},
                       {"patches", sys.patches},
                       {"bonnet_angle", spec.bonnet_angle},
                       {"converged", result.converged},
                       {"diverged", result.diverged},
                       {"iterations", result.iterations},
                       {"contraction_estimate", result.contraction_estimate},
                       {"spectral_radius", rho},
                       {"iteration_operator_radius", op_rho},
                       {"initial_gap", result.initial_gap},
                       {"limit_gap", result.limit_gap}};
    write_json(summary, dir / "summary.json");
    out << summary.dump() << '\n';
    return kExitOk;
}

int cmd_derivatives(const RunConfig& cfg, std::ostream& out)
{
    weierstrass::check_domain(cfg.domain);
    const fs::path dir = prepare_output(cfg);
    const int nx = cfg.grid[0], ny = cfg.grid[1];
    const auto& d = cfg.domain;
    {
        auto f = open_out(dir / "derivatives.csv");
        f << "re_tau,im_tau,p1,p2,p3,q1,q2,q3,dp1,dp2,dp3,dq1,dq2,dq3,d2p1,d2p2,d2p3,d2q1,d2q2,d2q3,A1,nx,ny,nz,xpp,"
             "ypp,zpp\n";
        for (int ix = 0; ix < nx; ++ix) {
            const double re = d.re_min + (d.re_max - d.re_min) * ix / (nx - 1);
            for (int iy = 0; iy < ny; ++iy) {
                const double im = d.im_min + (d.im_max - d.im_min) * iy / (ny - 1);
                const auto b = weierstrass::derivative_bundle({re, im});
                f << fmt17(re) << ',' << fmt17(im);
                for (const Vec3* v : {&b.p, &b.q, &b.p1, &b.q1, &b.p2, &b.q2})
                    for (int k = 0; k < 3; ++k)
                        f << ',' << fmt17((*v)[k]);
                f << ',' << fmt17(b.a1);
                for (const Vec3* v : {&b.normal, &b.d2})
                    for (int k = 0; k < 3; ++k)
                        f << ',' << fmt17((*v)[k]);
                f << '\n';
            }
        }
        if (!f)
            throw Error(ErrorCode::IoError, "write to derivatives.csv failed");
    }
    const auto best = weierstrass::max_second_derivative(cfg.domain, nx, ny, cfg.refine_levels);
    const json summary{{"max_abs", best.max_abs},
                       {"argmax_re", best.argmax.real()},
                       {"argmax_im", best.argmax.imag()},
                       {"component", weierstrass::to_string(best.component)},
                       {"grid", {nx, ny}},
                       {"refine_levels", cfg.refine_levels}};
    write_json(summary, dir / "max_second_derivative.json");
    out << summary.dump() << '\n';
    return kExitOk;
}

int cmd_sample(const RunConfig& cfg, std::ostream& out)
{
    sampler_io::PatchSpec spec = sampler_io::default_spec(cfg.surface);
    spec.domain = cfg.domain;
    spec.bonnet_angle = cfg.bonnet();
    spec.m1 = cfg.samples[0];
    spec.m2 = cfg.samples[1];
    const auto grid = sampler_io::sample_patch(spec);
    const fs::path dir = prepare_output(cfg);
    sampler_io::save_grid(grid, dir / "grid.csv");
    sampler_io::export_mesh(grid, dir / "grid.obj");
    out << "sampled " << grid.rows() << " x " << grid.cols() << " points to " << dir.string() << '\n';
    return kExitOk;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out)
{
    const auto report = run_verify(cfg);
    const fs::path dir = prepare_output(cfg);
    const json doc = report.to_json();
    write_json(doc, dir / "verify_report.json");
    for (const auto& c : report.checks)
        out << (c.pass ? "PASS " : "FAIL ") << c.name << '\n';
    for (const auto& d : report.diagnostics)
        out << "NOTE " << d.name << (d.pass ? " holds" : " does not hold") << '\n';
    out << doc["passed"].get<int>() << " passed, " << doc["failed"].get<int>() << " failed\n";
    return report.all_pass() ? kExitOk : kExitVerifyFailed;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Constrained progressive iterative approximation for TPMS patches"};
    app.require_subcommand(1);

    std::string config_path;
    std::string surface, output_dir, matrix;
    int n = 0, degree = 0, max_iters = 0, refine = 0;
    double tol = 0.0, bonnet = 0.0;
    std::uint64_t seed = 0;
    std::vector<int> grid, samples;

    struct Sub {
        Command command;
        CLI::App* app;
    };
    std::vector<Sub> subs;
    const std::pair<Command, const char*> commands[] = {
        {Command::Matrices, "Dump constraint matrices as coordinate CSV with a rank/eigen report"},
        {Command::Fit, "Run a constrained fit on sampled data"},
        {Command::Derivatives, "Tabulate frame derivatives and maximize the normal's second derivative"},
        {Command::Sample, "Sample a surface patch to CSV and OBJ"},
        {Command::Verify, "Run the invariant suite and write a JSON report"},
    };

    std::vector<CLI::Option*> opts;
    auto track = [&](CLI::Option* o) {
        opts.push_back(o);
        return o;
    };
    for (const auto& [command, help] : commands) {
        CLI::App* sub = app.add_subcommand(to_string(command), help);
        sub->add_option("--config", config_path, "JSON config file");
        track(sub->add_option("--surface", surface, "Gyroid, Diamond or SchwarzP"));
        track(sub->add_option("--n", n, "control points per direction"));
        track(sub->add_option("--degree", degree, "B-spline degree"));
        track(sub->add_option("--tol", tol, "step tolerance"));
        track(sub->add_option("--max-iters", max_iters, "iteration cap"));
        track(sub->add_option("--out", output_dir, "output directory"));
        track(sub->add_option("--seed", seed, "seed for randomized checks"));
        track(sub->add_option("--bonnet", bonnet, "associate-family angle in radians"));
        track(sub->add_option("--grid", grid, "grid points along Re and Im tau")->expected(2));
        track(sub->add_option("--refine", refine, "refinement levels for maximization"));
        track(sub->add_option("--matrix", matrix, "matrix to dump (all, Mij, alphaI, betaI, N1, N2, Tk)"));
        track(sub->add_option("--samples", samples, "intervals along Re and Im tau")->expected(2));
        subs.push_back({command, sub});
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitConfig;
    }

    auto given = [&](const std::string& flag) {
        for (const auto& s : subs)
            if (s.app->parsed() && s.app->get_option(flag)->count() > 0)
                return true;
        return false;
    };

    Overrides ov;
    if (given("--surface")) ov.surface = surface;
    if (given("--n")) ov.n = n;
    if (given("--degree")) ov.degree = degree;
    if (given("--tol")) ov.tol = tol;
    if (given("--max-iters")) ov.max_iters = max_iters;
    if (given("--out")) ov.output_dir = output_dir;
    if (given("--seed")) ov.seed = seed;
    if (given("--bonnet")) ov.bonnet_angle = bonnet;
    if (given("--grid")) ov.grid = std::array<int, 2>{grid[0], grid[1]};
    if (given("--refine")) ov.refine_levels = refine;
    if (given("--matrix")) ov.matrix = matrix;
    if (given("--samples")) ov.samples = std::array<int, 2>{samples[0], samples[1]};

    Command command = Command::Verify;
    for (const auto& s : subs)
        if (s.app->parsed())
            command = s.command;

    try {
        const RunConfig cfg = load_config(command, config_path, ov);
        switch (command) {
        case Command::Matrices:
            return cmd_matrices(cfg, out);
        case Command::Fit:
            return cmd_fit(cfg, out);
        case Command::Derivatives:
            return cmd_derivatives(cfg, out);
        case Command::Sample:
            return cmd_sample(cfg, out);
        case Command::Verify:
            return cmd_verify(cfg, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::ConfigError ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}

}  // namespace tpms::app
