#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fpk/model.hpp"

namespace fpk::cli {

struct CheckResult {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct SuiteReport {
    std::string suite;
    std::vector<CheckResult> checks;

    bool passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    std::string to_json() const;
};

/// Runs one of the invariant suites {kernels, killed, fractional, all} over
/// the shipped catalog plus an optional extra problem (e.g. from a config
/// file). Throws ConfigError for unknown suite names.
SuiteReport run_validation_suite(const std::string& suite,
                                 const std::optional<model::Problem>& extra,
                                 std::uint64_t seed = 2024, int threads = 1);

}  // namespace fpk::cli
