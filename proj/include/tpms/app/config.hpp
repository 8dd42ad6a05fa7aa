#pragma once

#include "tpms/cpia.hpp"
#include "tpms/types.hpp"

#include "json.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace tpms::app {

enum class Command { Matrices, Fit, Derivatives, Sample, Verify };

const char* to_string(Command command);

struct RunConfig {
    Command command = Command::Verify;
    SurfaceKind surface = SurfaceKind::SchwarzP;
    int n = 8;
    int degree = 3;
    double tol = 1e-10;
    int max_iters = 500;
    ComplexRect domain;
    std::array<int, 2> samples{16, 16};
    std::filesystem::path output_dir = "tpms-out";
    std::optional<cpia::GyroidAssignment> gyroid_assignment;
    std::uint64_t seed = 42;
    std::optional<double> bonnet_angle;  // default depends on the surface
    std::array<int, 2> grid{64, 64};     // derivative tables and maximization
    int refine_levels = 3;
    std::string matrix = "all";          // which matrix `matrices` dumps
    /// Test hook: overwrite T1d(row, col) (1-based) before verification.
    std::optional<std::array<double, 3>> tamper_t1d;

    cpia::GyroidAssignment assignment() const
    {
        return gyroid_assignment.value_or(cpia::kDefaultGyroidAssignment);
    }
    double bonnet() const;
};

/// Command-line values that override the config file.
struct Overrides {
    std::optional<std::string> surface;
    std::optional<int> n;
    std::optional<int> degree;
    std::optional<double> tol;
    std::optional<int> max_iters;
    std::optional<std::string> output_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> bonnet_angle;
    std::optional<std::array<int, 2>> grid;
    std::optional<int> refine_levels;
    std::optional<std::string> matrix;
    std::optional<std::array<int, 2>> samples;
};

/// Builds and validates a config from a JSON object plus overrides. Throws
/// Error(ConfigError) naming the offending field.
RunConfig parse_config(Command command, const nlohmann::json& doc, const Overrides& overrides = {});

/// Reads the JSON file (if the path is non-empty) and parses it.
RunConfig load_config(Command command, const std::filesystem::path& path, const Overrides& overrides = {});

}  // namespace tpms::app
