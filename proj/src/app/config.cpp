#include "tpms/app/config.hpp"

#include "tpms/constraints.hpp"
#include "tpms/error.hpp"
#include "tpms/sampler_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace tpms::app {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& field, const std::string& why)
{
    throw Error(ErrorCode::ConfigError, field + ": " + why);
}

const std::set<std::string>& known_keys()
{
    static const std::set<std::string> keys{
        "command", "surface", "n",    "degree",        "tol",    "max_iters", "domain",     "samples",
        "output_dir", "gyroid_assignment", "seed", "bonnet_angle", "grid", "refine_levels", "matrix", "tamper_t1d",
    };
    return keys;
}

template <typename T>
T get_as(const json& doc, const std::string& field)
{
    try {
        return doc.get<T>();
    } catch (const json::exception&) {
        config_error(field, "wrong type (" + std::string(doc.type_name()) + ")");
    }
}

int get_int(const json& doc, const std::string& field)
{
    if (!doc.is_number_integer())
        config_error(field, "expected an integer");
    return get_as<int>(doc, field);
}

double get_number(const json& doc, const std::string& field)
{
    if (!doc.is_number())
        config_error(field, "expected a number");
    return doc.get<double>();
}

template <std::size_t N>
std::array<int, N> get_int_array(const json& doc, const std::string& field)
{
    if (!doc.is_array() || doc.size() != N)
        config_error(field, "expected an array of " + std::to_string(N) + " integers");
    std::array<int, N> out{};
    for (std::size_t k = 0; k < N; ++k)
        out[k] = get_int(doc[k], field + "[" + std::to_string(k) + "]");
    return out;
}

ComplexRect get_domain(const json& doc)
{
    if (!doc.is_object())
        config_error("domain", "expected an object with re_min, re_max, im_min, im_max");
    ComplexRect r;
    for (const auto& [key, value] : doc.items()) {
        const std::string field = "domain." + key;
        if (key == "re_min")
            r.re_min = get_number(value, field);
        else if (key == "re_max")
            r.re_max = get_number(value, field);
        else if (key == "im_min")
            r.im_min = get_number(value, field);
        else if (key == "im_max")
            r.im_max = get_number(value, field);
        else
            config_error(field, "unknown key '" + key + "'");
    }
    return r;
}

Command parse_command(const std::string& name)
{
    for (Command c : {Command::Matrices, Command::Fit, Command::Derivatives, Command::Sample, Command::Verify})
        if (name == to_string(c))
            return c;
    config_error("command", "unknown command '" + name + "'");
}

SurfaceKind surface_field(const std::string& name)
{
    try {
        return parse_surface(name);
    } catch (const Error&) {
        config_error("surface", "unknown surface '" + name + "'");
    }
}

void validate(RunConfig& cfg)
{
    if (cfg.degree < 1)
        config_error("degree", "must be positive");
    if (cfg.n <= cfg.degree)
        config_error("n", "must exceed the degree (" + std::to_string(cfg.degree) + ")");
    const bool needs_constraints = cfg.command == Command::Fit || cfg.command == Command::Matrices;
    if (needs_constraints && cfg.n < constraints::kMinGridSize)
        config_error("n", "n = " + std::to_string(cfg.n) + " is below the n >= "
                              + std::to_string(constraints::kMinGridSize)
                              + " required by the constraint matrices");
    if (!(cfg.tol >= 0.0))
        config_error("tol", "must be non-negative");
    if (cfg.max_iters < 0)
        config_error("max_iters", "must be non-negative");
    if (cfg.samples[0] < 2 || cfg.samples[1] < 2)
        config_error("samples", "need at least 2 intervals per direction");
    if (cfg.grid[0] < 2 || cfg.grid[1] < 2)
        config_error("grid", "need at least 2 points per direction");
    if (cfg.refine_levels < 0)
        config_error("refine_levels", "must be non-negative");
    const auto& d = cfg.domain;
    if (!(d.re_min < d.re_max && d.im_min < d.im_max))
        config_error("domain", "must be a non-empty rectangle");
    if (cfg.gyroid_assignment) {
        for (std::size_t k = 0; k < 4; ++k) {
            const int t = (*cfg.gyroid_assignment)[k];
            if (t < 1 || t > constraints::t_count(SurfaceKind::Gyroid))
                config_error("gyroid_assignment[" + std::to_string(k) + "]",
                             "T" + std::to_string(t) + "g does not exist (1..7)");
        }
    }
    if (cfg.tamper_t1d) {
        const auto& t = *cfg.tamper_t1d;
        if (t[0] < 1 || t[0] > 4 || t[1] < 1 || t[1] > 4 || t[0] != static_cast<int>(t[0])
            || t[1] != static_cast<int>(t[1]))
            config_error("tamper_t1d", "row and column must be integers in 1..4");
    }
    if (cfg.output_dir.empty())
        config_error("output_dir", "must not be empty");
}

}  // namespace

const char* to_string(Command command)
{
    switch (command) {
    case Command::Matrices:
        return "matrices";
    case Command::Fit:
        return "fit";
    case Command::Derivatives:
        return "derivatives";
    case Command::Sample:
        return "sample";
    case Command::Verify:
        return "verify";
    }
    return "?";
}

double RunConfig::bonnet() const
{
    return bonnet_angle.value_or(sampler_io::default_bonnet_angle(surface));
}

RunConfig parse_config(Command command, const nlohmann::json& doc, const Overrides& overrides)
{
    RunConfig cfg;
    cfg.command = command;

    if (!doc.is_null() && !doc.is_object())
        config_error("<root>", "config must be a JSON object");

    if (doc.is_object()) {
        for (const auto& [key, value] : doc.items()) {
            if (!known_keys().count(key))
                config_error(key, "unknown key '" + key + "'");
            if (key == "command") {
                if (!value.is_string())
                    config_error(key, "expected a string");
                if (parse_command(value.get<std::string>()) != command)
                    config_error(key, "config is for '" + value.get<std::string>() + "', not '"
                                          + to_string(command) + "'");
            } else if (key == "surface") {
                if (!value.is_string())
                    config_error(key, "expected a string");
                cfg.surface = surface_field(value.get<std::string>());
            } else if (key == "n") {
                cfg.n = get_int(value, key);
            } else if (key == "degree") {
                cfg.degree = get_int(value, key);
            } else if (key == "tol") {
                cfg.tol = get_number(value, key);
            } else if (key == "max_iters") {
                cfg.max_iters = get_int(value, key);
            } else if (key == "domain") {
                cfg.domain = get_domain(value);
            } else if (key == "samples") {
                cfg.samples = get_int_array<2>(value, key);
            } else if (key == "output_dir") {
                if (!value.is_string())
                    config_error(key, "expected a string");
                cfg.output_dir = value.get<std::string>();
            } else if (key == "gyroid_assignment") {
                cfg.gyroid_assignment = get_int_array<4>(value, key);
            } else if (key == "seed") {
                if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<long long>() >= 0))
                    config_error(key, "expected a non-negative integer");
                cfg.seed = value.get<std::uint64_t>();
            } else if (key == "bonnet_angle") {
                cfg.bonnet_angle = get_number(value, key);
            } else if (key == "grid") {
                cfg.grid = get_int_array<2>(value, key);
            } else if (key == "refine_levels") {
                cfg.refine_levels = get_int(value, key);
            } else if (key == "matrix") {
                if (!value.is_string())
                    config_error(key, "expected a string");
                cfg.matrix = value.get<std::string>();
            } else if (key == "tamper_t1d") {
                if (!value.is_array() || value.size() != 3)
                    config_error(key, "expected [row, col, value]");
                cfg.tamper_t1d = std::array<double, 3>{get_number(value[0], key + "[0]"),
                                                       get_number(value[1], key + "[1]"),
                                                       get_number(value[2], key + "[2]")};
            }
        }
    }

    if (overrides.surface)
        cfg.surface = surface_field(*overrides.surface);
    if (overrides.n)
        cfg.n = *overrides.n;
    if (overrides.degree)
        cfg.degree = *overrides.degree;
    if (overrides.tol)
        cfg.tol = *overrides.tol;
    if (overrides.max_iters)
        cfg.max_iters = *overrides.max_iters;
    if (overrides.output_dir)
        cfg.output_dir = *overrides.output_dir;
    if (overrides.seed)
        cfg.seed = *overrides.seed;
    if (overrides.bonnet_angle)
        cfg.bonnet_angle = *overrides.bonnet_angle;
    if (overrides.grid)
        cfg.grid = *overrides.grid;
    if (overrides.refine_levels)
        cfg.refine_levels = *overrides.refine_levels;
    if (overrides.matrix)
        cfg.matrix = *overrides.matrix;
    if (overrides.samples)
        cfg.samples = *overrides.samples;

    validate(cfg);
    return cfg;
}

RunConfig load_config(Command command, const std::filesystem::path& path, const Overrides& overrides)
{
    json doc;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in)
            config_error("--config", "cannot read '" + path.string() + "'");
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            config_error("--config", std::string("invalid JSON: ") + e.what());
        }
    }
    return parse_config(command, doc, overrides);
}

}  // namespace tpms::app
