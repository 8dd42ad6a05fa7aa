#include "tpms/sampler_io.hpp"

#include "tpms/error.hpp"
#include "tpms/parallel.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>

namespace tpms::sampler_io {

namespace {

// 8-point Gauss-Legendre on [-1, 1]; nodes are +-x.
constexpr std::array<double, 4> kNodes{0.1834346424956498049394761, 0.5255324099163289858177390,
                                       0.7966664774136267395915539, 0.9602898564975362316835609};
constexpr std::array<double, 4> kWeights{0.3626837833783619829651504, 0.3137066458778872873379622,
                                         0.2223810344533744705443560, 0.1012285362903762591525314};

constexpr int kMaxPanels = 1 << 16;

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path)
{
    out.flush();
    if (!out)
        throw Error(ErrorCode::IoError, "write to '" + path.string() + "' failed");
}

std::vector<double> sites(const std::vector<double>& explicit_sites, int intervals)
{
    if (!explicit_sites.empty())
        return explicit_sites;
    std::vector<double> out(static_cast<std::size_t>(intervals + 1));
    for (int i = 0; i <= intervals; ++i)
        out[static_cast<std::size_t>(i)] = static_cast<double>(i) / intervals;
    return out;
}

void check_sites(const std::vector<double>& s, const char* axis)
{
    if (s.size() < 3)
        throw Error(ErrorCode::InvalidGrid, std::string("need at least two intervals along ") + axis);
    for (double v : s)
        if (!(v >= 0.0 && v <= 1.0))
            throw Error(ErrorCode::InvalidGrid, std::string("site outside [0, 1] along ") + axis);
}

void check_spec_domain(const PatchSpec& spec)
{
    const auto& d = spec.domain;
    if (!(d.re_min <= d.re_max && d.im_min <= d.im_max))
        throw Error(ErrorCode::InvalidGrid, "empty sampling domain");
    const double re = std::max(std::abs(d.re_min), std::abs(d.re_max));
    const double im = std::max(std::abs(d.im_min), std::abs(d.im_max));
    const double reach = std::hypot(re, im) * std::abs(spec.rotation);
    if (reach >= weierstrass::branch_radius() - weierstrass::kBranchEps)
        throw Error(ErrorCode::DomainContainsBranchPoint,
                    "sampling domain reaches |tau| = " + fmt17(reach) + ", branch circle at "
                        + fmt17(weierstrass::branch_radius()));
}

double max_diff(const Vec3& a, const Vec3& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace

double default_bonnet_angle(SurfaceKind surface)
{
    switch (surface) {
    case SurfaceKind::Diamond:
        return 0.0;
    case SurfaceKind::SchwarzP:
        return std::numbers::pi / 2.0;
    case SurfaceKind::Gyroid:
        return 0.6634829;
    }
    return 0.0;
}

PatchSpec default_spec(SurfaceKind surface)
{
    PatchSpec spec;
    spec.surface = surface;
    spec.bonnet_angle = default_bonnet_angle(surface);
    return spec;
}

Vec3 integrate_segment(Complex a, Complex b, double theta, int segments)
{
    if (segments < 1)
        throw Error(ErrorCode::InvalidGrid, "quadrature needs at least one panel");
    const Complex delta = b - a;
    const double h = 1.0 / segments;
    std::array<Complex, 3> sum{};
    for (int s = 0; s < segments; ++s) {
        const double mid = (s + 0.5) * h;
        for (std::size_t k = 0; k < kNodes.size(); ++k) {
            for (double sign : {-1.0, 1.0}) {
                const double t = mid + sign * 0.5 * h * kNodes[k];
                const auto f = weierstrass::phi(a + t * delta);
                for (std::size_t c = 0; c < 3; ++c)
                    sum[c] += kWeights[k] * f[c];
            }
        }
    }
    const Complex scale = std::polar(1.0, theta) * delta * (0.5 * h);
    return Vec3((scale * sum[0]).real(), (scale * sum[1]).real(), (scale * sum[2]).real());
}

Vec3 integrate(Complex tau, double theta, double tol)
{
    const std::array<Complex, 2> path{Complex{0.0, 0.0}, tau};
    return integrate_path(path, theta, tol);
}

Vec3 integrate_path(std::span<const Complex> vertices, double theta, double tol)
{
    Vec3 total = Vec3::Zero();
    for (std::size_t k = 1; k < vertices.size(); ++k) {
        const Complex a = vertices[k - 1];
        const Complex b = vertices[k];
        if (a == b)
            continue;
        Vec3 prev = integrate_segment(a, b, theta, 1);
        int panels = 2;
        for (;; panels *= 2) {
            if (panels > kMaxPanels)
                throw Error(ErrorCode::NoConvergence, "quadrature did not settle along a path segment");
            const Vec3 next = integrate_segment(a, b, theta, panels);
            const bool done = max_diff(next, prev) < tol;
            prev = next;
            if (done)
                break;
        }
        total += prev;
    }
    return total;
}

Complex tau_at(const PatchSpec& spec, double u, double v)
{
    const auto& d = spec.domain;
    const Complex tau{d.re_min + (d.re_max - d.re_min) * u, d.im_min + (d.im_max - d.im_min) * v};
    return spec.rotation * tau;
}

DataGrid sample_patch(const PatchSpec& spec)
{
    const auto us = sites(spec.u_params, spec.m1);
    const auto vs = sites(spec.v_params, spec.m2);
    check_sites(us, "u");
    check_sites(vs, "v");
    check_spec_domain(spec);

    DataGrid grid;
    grid.m1 = static_cast<int>(us.size()) - 1;
    grid.m2 = static_cast<int>(vs.size()) - 1;
    const std::size_t count = us.size() * vs.size();
    grid.points.resize(static_cast<Eigen::Index>(count), 4);
    grid.params.resize(count);
    for (std::size_t i = 0; i < us.size(); ++i)
        for (std::size_t j = 0; j < vs.size(); ++j)
            grid.params[i * vs.size() + j] = {us[i], vs[j]};

    parallel_for(count, [&](std::size_t begin, std::size_t end) {
        for (std::size_t k = begin; k < end; ++k) {
            const auto& uv = grid.params[k];
            const Vec3 x = integrate(tau_at(spec, uv.u, uv.v), spec.bonnet_angle);
            grid.points.row(static_cast<Eigen::Index>(k)) << x.x(), x.y(), x.z(), 1.0;
        }
    });
    return grid;
}

ControlNet fit_data(const PatchSpec& spec, const bspline::CollocationSystem& sys)
{
    const auto gu = bspline::greville(sys.ku);
    const auto gv = bspline::greville(sys.kv);
    ControlNet Q(sys.size(), 4);
    const Eigen::Index block = sys.patch_size();
    for (int p = 0; p < sys.patches; ++p) {
        PatchSpec s = spec;
        s.u_params = gu;
        s.v_params = gv;
        if (p % 2 == 1)
            s.rotation *= Complex{0.0, 1.0};
        const DataGrid g = sample_patch(s);
        if (g.points.rows() != block)
            throw Error(ErrorCode::DimensionMismatch, "sampled patch does not match the collocation system");
        Q.middleRows(p * block, block) = g.points;
    }
    return Q;
}

void save_grid(const DataGrid& grid, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "i,j,x,y,z\n";
    for (int i = 0; i < grid.rows(); ++i) {
        for (int j = 0; j < grid.cols(); ++j) {
            const Vec3 p = grid.at(i, j);
            out << i << ',' << j << ',' << fmt17(p.x()) << ',' << fmt17(p.y()) << ',' << fmt17(p.z()) << '\n';
        }
    }
    finish(out, path);
}

DataGrid load_grid(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");

    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorCode::ParseError, path.string() + ":1: empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "i,j,x,y,z")
        throw Error(ErrorCode::ParseError, path.string() + ":1: expected header i,j,x,y,z");

    std::map<std::pair<int, int>, Vec3> samples;
    int max_i = -1, max_j = -1;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";

        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, ',');)
            fields.push_back(f);
        if (fields.size() != 5)
            throw Error(ErrorCode::ParseError, where + "expected 5 fields, got " + std::to_string(fields.size()));

        auto parse_index = [&](const std::string& s) {
            char* end = nullptr;
            errno = 0;
            const long v = std::strtol(s.c_str(), &end, 10);
            if (s.empty() || *end != '\0' || errno != 0 || v < 0 || v > 1'000'000)
                throw Error(ErrorCode::ParseError, where + "bad index '" + s + "'");
            return static_cast<int>(v);
        };
        auto parse_value = [&](const std::string& s) {
            char* end = nullptr;
            const double v = std::strtod(s.c_str(), &end);
            if (s.empty() || *end != '\0' || !std::isfinite(v))
                throw Error(ErrorCode::ParseError, where + "bad coordinate '" + s + "'");
            return v;
        };

        const int i = parse_index(fields[0]);
        const int j = parse_index(fields[1]);
        const Vec3 p(parse_value(fields[2]), parse_value(fields[3]), parse_value(fields[4]));
        if (!samples.emplace(std::make_pair(i, j), p).second)
            throw Error(ErrorCode::ParseError, where + "duplicate sample (" + std::to_string(i) + ","
                                                   + std::to_string(j) + ")");
        max_i = std::max(max_i, i);
        max_j = std::max(max_j, j);
    }

    if (max_i < 1 || max_j < 1)
        throw Error(ErrorCode::MissingSample, "grid needs at least 2 x 2 samples");

    DataGrid grid;
    grid.m1 = max_i;
    grid.m2 = max_j;
    grid.points.resize(static_cast<Eigen::Index>(grid.rows()) * grid.cols(), 4);
    grid.params.resize(static_cast<std::size_t>(grid.points.rows()));
    for (int i = 0; i <= max_i; ++i) {
        for (int j = 0; j <= max_j; ++j) {
            const auto it = samples.find({i, j});
            if (it == samples.end())
                throw Error(ErrorCode::MissingSample,
                            "sample (" + std::to_string(i) + "," + std::to_string(j) + ") is missing");
            const auto k = grid.index(i, j);
            grid.points.row(k) << it->second.x(), it->second.y(), it->second.z(), 1.0;
            grid.params[static_cast<std::size_t>(k)] = {static_cast<double>(i) / max_i,
                                                        static_cast<double>(j) / max_j};
        }
    }
    return grid;
}

void save_net(const ControlNet& net, const std::filesystem::path& path)
{
    auto out = open_out(path);
    out << "index,x,y,z\n";
    for (Eigen::Index k = 0; k < net.rows(); ++k)
        out << k + 1 << ',' << fmt17(net(k, 0)) << ',' << fmt17(net(k, 1)) << ',' << fmt17(net(k, 2)) << '\n';
    finish(out, path);
}

void export_mesh(const ControlNet& net, int rows, int cols, const std::filesystem::path& path)
{
    if (rows < 2 || cols < 2 || net.rows() != static_cast<Eigen::Index>(rows) * cols)
        throw Error(ErrorCode::InvalidGrid, "mesh export needs a complete grid of at least 2 x 2 points");
    auto out = open_out(path);
    for (Eigen::Index k = 0; k < net.rows(); ++k)
        out << "v " << fmt17(net(k, 0)) << ' ' << fmt17(net(k, 1)) << ' ' << fmt17(net(k, 2)) << '\n';
    for (int i = 0; i + 1 < rows; ++i) {
        for (int j = 0; j + 1 < cols; ++j) {
            const long a = static_cast<long>(i) * cols + j + 1;
            const long b = a + cols;
            const long c = b + 1;
            const long d = a + 1;
            out << "f " << a << ' ' << b << ' ' << c << '\n';
            out << "f " << a << ' ' << c << ' ' << d << '\n';
        }
    }
    finish(out, path);
}

void export_mesh(const DataGrid& grid, const std::filesystem::path& path)
{
    export_mesh(grid.points, grid.rows(), grid.cols(), path);
}

}  // namespace tpms::sampler_io
