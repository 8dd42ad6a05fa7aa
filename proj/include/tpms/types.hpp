#pragma once

#include <Eigen/Core>

#include <string_view>

namespace tpms {

using Vec3 = Eigen::Vector3d;

/// Stacked homogeneous control points, one [x, y, z, 1] row per point.
/// Row-major so each point is four contiguous doubles.
using ControlNet = Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor>;

using DenseMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class SurfaceKind { Gyroid, Diamond, SchwarzP };

std::string_view to_string(SurfaceKind kind);

/// Accepts "Gyroid", "Diamond", "SchwarzP" and "Schwarz_P" (case-insensitive).
/// Throws Error(ConfigError) on anything else.
SurfaceKind parse_surface(std::string_view name);

/// Axis-aligned rectangle in the complex parameter plane.
struct ComplexRect {
    double re_min = -0.3;
    double re_max = 0.3;
    double im_min = -0.3;
    double im_max = 0.3;
};

}  // namespace tpms
