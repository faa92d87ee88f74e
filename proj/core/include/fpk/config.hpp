#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fpk/fractional.hpp"
#include "fpk/model.hpp"

namespace fpk::cli {

/// Flat INI-style file: [section] headers, key = value lines, '#'/';' comments.
struct IniFile {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static IniFile parse(std::istream& is);
    static IniFile parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key) const;
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const;
};

/// Fully parsed run configuration (problem + solver + output sections).
struct RunConfig {
    model::Problem problem;

    // solver
    std::string backend = "mc";      // mc | quad
    std::string mode = "auto";       // auto | whole | soft | hard
    int n = 64;
    long long samples = 100000;
    std::uint64_t seed = 1;
    bool seed_given = false;
    int batch = 32;
    bool antithetic = false;
    std::string tau = "auto";        // auto | quad | mc
    int tau_nodes = 48;
    int quad_nodes = 257;
    double quad_window = 8.0;
    int interp_order = 3;

    // output
    std::vector<Vec> points;
    std::string csv_name = "solution.csv";
    std::string json_name = "summary.json";
    std::string density_csv_name; // optional tau/density/tail diagnostics dump

    // convergence
    std::vector<int> n_list;
    std::string reference = "oracle"; // oracle | finest

    // raw catalog spec strings, kept for the config echo
    std::string coefficients_spec;
    std::string initial_spec;
    std::string domain_spec;
    std::string fractional_spec;
    std::string points_spec;

    static RunConfig from_ini(const IniFile& ini);
    static RunConfig from_file(const std::string& path);

    /// Canonical INI text reproducing this configuration byte-for-byte.
    std::string echo_ini() const;
};

/// Command options shared by the runners.
struct RunOptions {
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed_override;
    int threads = 1;
    std::string format = "both"; // csv | json | both
    std::ostream* log = nullptr;
};

/// solve: writes the solution CSV and a JSON run summary. Returns the exit
/// code (0 ok); ConfigError and numeric failures are thrown.
int run_solve(const RunConfig& config, const RunOptions& opts);

/// convergence: runs the solver over n_list and writes the error table
/// (columns n, sup_error, stderr) against the oracle or a finest-n reference.
int run_convergence(const RunConfig& config, const RunOptions& opts);

}  // namespace fpk::cli
