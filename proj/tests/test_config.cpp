#include "tpms/app/commands.hpp"
#include "tpms/app/config.hpp"
#include "tpms/error.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace tpms;
using namespace tpms::app;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

Error config_error_of(Command c, const json& doc, const Overrides& ov = {})
{
    try {
        parse_config(c, doc, ov);
    } catch (const Error& e) {
        return e;
    }
    FAIL("expected ConfigError");
    return Error(ErrorCode::IoError, "");
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "tpms-config-tests";
    fs::create_directories(dir);
    return dir / name;
}

int cli(std::vector<std::string> args, std::string* out_text = nullptr)
{
    args.insert(args.begin(), "tpms-cpia");
    std::vector<const char*> argv;
    for (const auto& a : args)
        argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text)
        *out_text = out.str() + err.str();
    return code;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("empty config fills defaults")
{
    Overrides ov;
    ov.surface = "SchwarzP";
    const RunConfig cfg = parse_config(Command::Fit, json::object(), ov);
    CHECK(cfg.surface == SurfaceKind::SchwarzP);
    CHECK(cfg.n == 8);
    CHECK(cfg.degree == 3);
    CHECK(cfg.tol == 1e-10);
    CHECK(cfg.max_iters == 500);
    CHECK(cfg.seed == 42);
    CHECK(cfg.assignment() == cpia::kDefaultGyroidAssignment);
}

TEST_CASE("fit rejects n below the constraint minimum")
{
    const Error e = config_error_of(Command::Fit, json{{"n", 6}});
    CHECK(e.code() == ErrorCode::ConfigError);
    CHECK(std::string(e.what()).find("n >= 7") != std::string::npos);
    // ρ(I - Bw) checks at n = 6 do not need the constraint matrices.
    CHECK_NOTHROW(parse_config(Command::Sample, json{{"n", 6}}));
}

TEST_CASE("unknown keys are named")
{
    const Error e = config_error_of(Command::Fit, json{{"foo", 1}});
    CHECK(std::string(e.what()).find("foo") != std::string::npos);
    const Error nested = config_error_of(Command::Fit, json{{"domain", {{"re_min", -0.1}, {"bar", 2}}}});
    CHECK(std::string(nested.what()).find("domain.bar") != std::string::npos);
}

TEST_CASE("type and range errors cite the field")
{
    CHECK(std::string(config_error_of(Command::Fit, json{{"n", "eight"}}).what()).find("n") != std::string::npos);
    CHECK(std::string(config_error_of(Command::Fit, json{{"tol", -1.0}}).what()).find("tol") != std::string::npos);
    CHECK(std::string(config_error_of(Command::Fit, json{{"surface", "Neovius"}}).what()).find("surface")
          != std::string::npos);
    CHECK(std::string(config_error_of(Command::Fit, json{{"gyroid_assignment", {1, 2, 3, 8}}}).what())
              .find("gyroid_assignment[3]")
          != std::string::npos);
    CHECK(std::string(config_error_of(Command::Fit, json{{"command", "verify"}}).what()).find("command")
          != std::string::npos);
    CHECK(std::string(config_error_of(Command::Sample, json{{"samples", {1, 4}}}).what()).find("samples")
          != std::string::npos);
}

TEST_CASE("flags override the file")
{
    const json doc{{"surface", "Diamond"}, {"n", 10}, {"gyroid_assignment", {4, 6, 1, 2}}};
    Overrides ov;
    ov.n = 9;
    ov.tol = 1e-8;
    const RunConfig cfg = parse_config(Command::Fit, doc, ov);
    CHECK(cfg.surface == SurfaceKind::Diamond);
    CHECK(cfg.n == 9);
    CHECK(cfg.tol == 1e-8);
    CHECK(cfg.assignment() == cpia::GyroidAssignment{4, 6, 1, 2});
}

TEST_CASE("cli exit codes")
{
    CHECK(cli({"fit", "--n", "6", "--out", scratch("x").string()}) == kExitConfig);
    CHECK(cli({"nonsense"}) == kExitConfig);
    CHECK(cli({"fit", "--bogus-flag", "1"}) == kExitConfig);

    const fs::path cfg = scratch("branch.json");
    std::ofstream(cfg) << R"({"domain": {"re_min": -0.1, "re_max": 0.6, "im_min": -0.1, "im_max": 0.1}})";
    CHECK(cli({"derivatives", "--config", cfg.string(), "--out", scratch("deriv-bad").string()}) == kExitRuntime);
}

TEST_CASE("matrices command writes coordinate lists")
{
    const fs::path out = scratch("matrices");
    fs::remove_all(out);
    REQUIRE(cli({"matrices", "--matrix", "M11", "--n", "8", "--out", out.string()}) == kExitOk);
    CHECK(slurp(out / "M11.csv") == "row,col,value\n58,50,1\n59,51,1\n60,52,1\n61,53,1\n");
    const json report = json::parse(slurp(out / "report.json"));
    CHECK(report["matrices"][0]["rank"] == 4);

    REQUIRE(cli({"matrices", "--surface", "Diamond", "--out", out.string()}) == kExitOk);
    CHECK(fs::exists(out / "T2d.csv"));
    CHECK(fs::exists(out / "N1_N2.csv"));
}

TEST_CASE("sample command writes CSV and OBJ")
{
    const fs::path out = scratch("sample");
    fs::remove_all(out);
    REQUIRE(cli({"sample", "--samples", "3", "2", "--out", out.string()}) == kExitOk);
    CHECK(fs::exists(out / "grid.csv"));
    CHECK(fs::exists(out / "grid.obj"));
}

TEST_CASE("derivatives command writes a table and a maximum")
{
    const fs::path out = scratch("derivatives");
    fs::remove_all(out);
    REQUIRE(cli({"derivatives", "--grid", "8", "8", "--refine", "1", "--out", out.string()}) == kExitOk);
    const std::string table = slurp(out / "derivatives.csv");
    CHECK(table.rfind("re_tau,im_tau,p1,p2,p3,q1,q2,q3,", 0) == 0);
    CHECK(std::count(table.begin(), table.end(), '\n') == 65);
    const json m = json::parse(slurp(out / "max_second_derivative.json"));
    CHECK(m["max_abs"].get<double>() > 0.0);
    CHECK(m["refine_levels"] == 1);
}

TEST_CASE("fit command writes net, log and summary")
{
    const fs::path out = scratch("fit");
    fs::remove_all(out);
    REQUIRE(cli({"fit", "--surface", "SchwarzP", "--max-iters", "20", "--out", out.string()}) == kExitOk);
    const json s = json::parse(slurp(out / "summary.json"));
    for (const char* key : {"converged", "iterations", "contraction_estimate", "spectral_radius", "limit_gap"})
        CHECK(s.contains(key));
    CHECK(slurp(out / "net.csv").rfind("index,x,y,z\n1,", 0) == 0);
    CHECK(slurp(out / "convergence.csv").rfind("k,step_norm,limit_gap\n1,", 0) == 0);
}

TEST_CASE("a tampered transform fails verification")
{
    const fs::path cfg = scratch("tamper.json");
    std::ofstream(cfg) << R"({"tamper_t1d": [3, 3, 2.0]})";
    const fs::path out = scratch("verify-tamper");
    std::string text;
    CHECK(cli({"verify", "--config", cfg.string(), "--out", out.string()}, &text) == kExitVerifyFailed);
    CHECK(text.find("FAIL transform_eigen_moduli") != std::string::npos);
    const json report = json::parse(slurp(out / "verify_report.json"));
    CHECK(report["all_pass"] == false);
}
