#pragma once

#include "tpms/app/config.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace tpms::app {

struct CheckResult {
    std::string name;
    bool pass = false;
    nlohmann::json detail;
};

struct VerifyReport {
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;
    /// Measured facts reported alongside the checks; they do not affect the verdict.
    std::vector<CheckResult> diagnostics;

    bool all_pass() const;
    /// Deterministic for a given config: no timings, no paths.
    nlohmann::json to_json() const;
};

/// Runs the cross-module invariant suite. Failures become report entries;
/// only unexpected exceptions escape.
VerifyReport run_verify(const RunConfig& cfg);

}  // namespace tpms::app
