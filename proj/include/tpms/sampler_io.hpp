#pragma once

// Sampled data grids from the Weierstrass integrals, and the plain-text
// formats used to move grids, nets and meshes in and out.

#include "tpms/bspline.hpp"
#include "tpms/types.hpp"
#include "tpms/weierstrass.hpp"

#include <filesystem>
#include <span>
#include <vector>

namespace tpms::sampler_io {

using weierstrass::Complex;

/// Associate-family angle that produces each surface from the shared data:
/// Diamond 0, Schwarz P pi/2, Gyroid about 38.0147 degrees.
double default_bonnet_angle(SurfaceKind surface);

struct PatchSpec {
    SurfaceKind surface = SurfaceKind::SchwarzP;
    ComplexRect domain;
    double bonnet_angle = 0.0;
    int m1 = 16;  // intervals along Re tau
    int m2 = 16;  // intervals along Im tau
    /// Optional explicit sites in [0, 1]; when set they replace the uniform
    /// i / m1, j / m2 spacing (and m1, m2 follow their sizes).
    std::vector<double> u_params;
    std::vector<double> v_params;
    /// Every sampled tau is multiplied by this before integration.
    Complex rotation{1.0, 0.0};
};

PatchSpec default_spec(SurfaceKind surface);

/// (m1 + 1) x (m2 + 1) homogeneous points, i-major.
struct DataGrid {
    int m1 = 0;
    int m2 = 0;
    ControlNet points;
    std::vector<bspline::UV> params;

    int rows() const { return m1 + 1; }
    int cols() const { return m2 + 1; }
    Eigen::Index index(int i, int j) const { return static_cast<Eigen::Index>(i) * cols() + j; }
    Vec3 at(int i, int j) const { return points.row(index(i, j)).head<3>().transpose(); }
};

/// Number of Gauss-Legendre nodes per segment.
inline constexpr int kGaussOrder = 8;

/// Re(e^{i theta} * integral of phi along the straight segment from a to b),
/// using `segments` equal Gauss-Legendre panels.
Vec3 integrate_segment(Complex a, Complex b, double theta, int segments);

/// Integral from 0 to tau with the panel count doubled until successive
/// results differ by less than tol in every coordinate. Throws NoConvergence
/// if 2^16 panels are not enough.
Vec3 integrate(Complex tau, double theta, double tol = 1e-10);

/// Same along the polyline through `vertices` (the first is the start).
Vec3 integrate_path(std::span<const Complex> vertices, double theta, double tol = 1e-10);

/// The tau at parameter (u, v) of the patch domain, rotation applied.
Complex tau_at(const PatchSpec& spec, double u, double v);

/// Throws InvalidGrid for fewer than two intervals or sites outside [0, 1],
/// DomainContainsBranchPoint when the rotated domain reaches the branch circle.
DataGrid sample_patch(const PatchSpec& spec);

/// Fit data for an n x n (or stacked) Greville collocation system: one patch
/// per system patch; the second patch samples the domain turned a quarter
/// turn (tau -> i tau).
ControlNet fit_data(const PatchSpec& spec, const bspline::CollocationSystem& sys);

/// CSV with header i,j,x,y,z, i-major, 17 significant digits. IoError on failure.
void save_grid(const DataGrid& grid, const std::filesystem::path& path);

/// Throws IoError, ParseError (with line number) or MissingSample.
DataGrid load_grid(const std::filesystem::path& path);

/// CSV with header index,x,y,z and 1-based indices.
void save_net(const ControlNet& net, const std::filesystem::path& path);

/// Triangulated OBJ of a rows x cols point grid (row-major): v records then
/// two f records per quad. IoError on failure.
void export_mesh(const DataGrid& grid, const std::filesystem::path& path);
void export_mesh(const ControlNet& net, int rows, int cols, const std::filesystem::path& path);

}  // namespace tpms::sampler_io
