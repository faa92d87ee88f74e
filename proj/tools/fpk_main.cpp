#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "fpk/config.hpp"
#include "fpk/errors.hpp"
#include "fpk/validate.hpp"

namespace {

// Exit codes: 0 ok, 1 validation failure, 2 config error, 3 numerical failure.
constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const fpk::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const fpk::ValidationFailed& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const fpk::Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kNumericalError;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chernoff/Feynman solver for killed and time-fractional "
                 "Fokker-Planck-Kolmogorov problems"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", format = "both";
    std::optional<std::uint64_t> seed_override;
    int threads = 1;
    std::uint64_t seed_flag = 0;

    std::vector<CLI::Option*> seed_options;
    auto add_common = [&](CLI::App* cmd, bool needs_config) {
        auto* opt = cmd->add_option("--config", config_path, "run configuration file (INI)");
        if (needs_config) opt->required();
        cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
        seed_options.push_back(cmd->add_option("--seed", seed_flag, "override the config seed"));
        cmd->add_option("--threads", threads, "worker thread cap")->capture_default_str();
        cmd->add_option("--format", format, "artifact format: csv|json|both")
            ->check(CLI::IsMember({"csv", "json", "both"}))
            ->capture_default_str();
    };

    CLI::App* solve = app.add_subcommand("solve", "run one solve and emit CSV/JSON artifacts");
    add_common(solve, true);

    CLI::App* conv = app.add_subcommand("convergence", "error-vs-n study against an oracle");
    add_common(conv, true);

    CLI::App* validate = app.add_subcommand("validate", "run an invariant suite");
    std::string suite = "all";
    validate->add_option("--suite", suite, "kernels|killed|fractional|all")
        ->capture_default_str();
    add_common(validate, false);

    CLI11_PARSE(app, argc, argv);

    for (const CLI::Option* opt : seed_options)
        if (opt->count() > 0) seed_override = seed_flag;

    fpk::cli::RunOptions opts;
    opts.out_dir = out_dir;
    opts.seed_override = seed_override;
    opts.threads = threads;
    opts.format = format;
    opts.log = &std::cout;

    if (solve->parsed()) {
        return guarded([&] {
            const auto config = fpk::cli::RunConfig::from_file(config_path);
            return fpk::cli::run_solve(config, opts);
        });
    }
    if (conv->parsed()) {
        return guarded([&] {
            const auto config = fpk::cli::RunConfig::from_file(config_path);
            return fpk::cli::run_convergence(config, opts);
        });
    }
    // validate
    return guarded([&] {
        std::optional<fpk::model::Problem> extra;
        if (!config_path.empty())
            extra = fpk::cli::RunConfig::from_file(config_path).problem;
        const auto report = fpk::cli::run_validation_suite(suite, extra, 2024, threads);
        std::cout << report.to_json() << "\n";
        return report.passed() ? kOk : kValidationFailure;
    });
}
