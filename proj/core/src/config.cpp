#include "fpk/config.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "fpk/catalog.hpp"
#include "fpk/chernoff.hpp"
#include "fpk/feynman.hpp"
#include "fpk/oracles.hpp"
#include "fpk/solution_field.hpp"

#include "json.hpp"

namespace fpk::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (trim(v.substr(used)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
}

long long parse_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (trim(v.substr(used)).empty()) return x;
    } catch (const std::exception&) {
    }
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<double> parse_args(const std::string& key, const std::string& spec,
                               const std::string& name) {
    const auto open = spec.find('(');
    const auto close = spec.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw ConfigError("key '" + key + "': malformed '" + spec + "'");
    if (trim(spec.substr(0, open)) != name)
        throw ConfigError("key '" + key + "': expected " + name + "(...), got '" + spec + "'");
    std::vector<double> out;
    std::stringstream ss(spec.substr(open + 1, close - open - 1));
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (!tok.empty()) out.push_back(parse_double(key, tok));
    }
    return out;
}

}  // namespace

IniFile IniFile::parse(std::istream& is) {
    IniFile f;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line = line.substr(0, comment);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            f.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        f.sections[section][key] = value;
    }
    return f;
}

IniFile IniFile::parse_string(const std::string& text) {
    std::istringstream ss(text);
    return parse(ss);
}

bool IniFile::has(const std::string& section, const std::string& key) const {
    const auto s = sections.find(section);
    return s != sections.end() && s->second.count(key) > 0;
}

std::string IniFile::get(const std::string& section, const std::string& key) const {
    const auto s = sections.find(section);
    if (s == sections.end() || !s->second.count(key))
        throw ConfigError("missing key '" + section + "." + key + "'");
    return s->second.at(key);
}

std::string IniFile::get_or(const std::string& section, const std::string& key,
                            const std::string& fallback) const {
    return has(section, key) ? sections.at(section).at(key) : fallback;
}

RunConfig RunConfig::from_ini(const IniFile& ini) {
    RunConfig c;

    // [problem]
    c.coefficients_spec = ini.get("problem", "coefficients");
    c.problem.coeffs = catalog::coefficients_by_name(c.coefficients_spec);
    c.initial_spec = ini.get("problem", "initial");
    c.problem.initial = catalog::initial_by_name(c.initial_spec);
    c.domain_spec = ini.get_or("problem", "domain", "");
    if (!c.domain_spec.empty()) {
        const auto args = parse_args("problem.domain", c.domain_spec, "interval");
        if (args.size() < 2)
            throw ConfigError("key 'problem.domain': interval(lo, hi[, gamma]) needs two bounds");
        const double gamma = args.size() > 2 ? args[2] : 1.5;
        c.problem.domain = model::Domain::interval(args[0], args[1], gamma);
    } else if (ini.has("problem", "gamma")) {
        throw ConfigError("key 'problem.gamma' given without a domain");
    }
    if (ini.has("problem", "gamma") && c.problem.domain) {
        // gamma belongs to the domain spec; accept the standalone key too.
        const double gamma = parse_double("problem.gamma", ini.get("problem", "gamma"));
        c.problem.domain = model::Domain::interval(c.problem.domain->lo(), c.problem.domain->hi(),
                                                   gamma);
    }
    // Optional overrides of the declared ellipticity bounds (the validator
    // probes against whatever is declared here).
    if (ini.has("problem", "a0"))
        c.problem.coeffs.a0 = parse_double("problem.a0", ini.get("problem", "a0"));
    if (ini.has("problem", "A0"))
        c.problem.coeffs.A0 = parse_double("problem.A0", ini.get("problem", "A0"));
    c.fractional_spec = ini.get_or("problem", "fractional", "");
    if (!c.fractional_spec.empty()) {
        std::vector<fractional::SubordinationMeasure::Atom> atoms;
        std::stringstream ss(c.fractional_spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            const auto colon = tok.find(':');
            const double beta =
                parse_double("problem.fractional", colon == std::string::npos
                                                       ? tok
                                                       : trim(tok.substr(0, colon)));
            const double w = colon == std::string::npos
                                 ? 1.0
                                 : parse_double("problem.fractional", trim(tok.substr(colon + 1)));
            if (!(beta > 0 && beta < 1))
                throw ConfigError("key 'problem.fractional': atom (" + std::to_string(beta) + "," +
                                  std::to_string(w) + ") has beta outside (0,1)");
            if (!(w > 0))
                throw ConfigError("key 'problem.fractional': atom (" + std::to_string(beta) + "," +
                                  std::to_string(w) + ") has nonpositive weight");
            atoms.push_back({beta, w});
        }
        c.problem.mu = fractional::SubordinationMeasure(std::move(atoms));
    }
    c.problem.horizon = parse_double("problem.horizon", ini.get("problem", "horizon"));
    if (!(c.problem.horizon >= 0)) throw ConfigError("key 'problem.horizon': must be >= 0");

    // [solver]
    c.backend = ini.get_or("solver", "backend", "mc");
    if (c.backend != "mc" && c.backend != "quad")
        throw ConfigError("key 'solver.backend': expected mc|quad, got '" + c.backend + "'");
    c.mode = ini.get_or("solver", "mode", "auto");
    if (c.mode != "auto" && c.mode != "whole" && c.mode != "soft" && c.mode != "hard")
        throw ConfigError("key 'solver.mode': expected auto|whole|soft|hard");
    c.n = static_cast<int>(parse_int("solver.n", ini.get_or("solver", "n", "64")));
    if (c.n < 1) throw ConfigError("key 'solver.n': must be >= 1");
    c.samples = parse_int("solver.samples", ini.get_or("solver", "samples", "100000"));
    if (c.samples < 1) throw ConfigError("key 'solver.samples': must be >= 1");
    c.seed_given = ini.has("solver", "seed");
    if (c.seed_given)
        c.seed = static_cast<std::uint64_t>(parse_int("solver.seed", ini.get("solver", "seed")));
    else if (c.backend == "mc" || c.problem.mu)
        throw ConfigError("key 'solver.seed': required for the mc backend");
    c.batch = static_cast<int>(parse_int("solver.batch", ini.get_or("solver", "batch", "32")));
    c.antithetic = parse_bool("solver.antithetic", ini.get_or("solver", "antithetic", "false"));
    c.tau = ini.get_or("solver", "tau", "auto");
    if (c.tau != "auto" && c.tau != "quad" && c.tau != "mc")
        throw ConfigError("key 'solver.tau': expected auto|quad|mc");
    c.tau_nodes =
        static_cast<int>(parse_int("solver.tau_nodes", ini.get_or("solver", "tau_nodes", "48")));
    c.quad_nodes = static_cast<int>(
        parse_int("solver.quad_nodes", ini.get_or("solver", "quad_nodes", "257")));
    c.quad_window =
        parse_double("solver.quad_window", ini.get_or("solver", "quad_window", "8"));
    c.interp_order = static_cast<int>(
        parse_int("solver.interp_order", ini.get_or("solver", "interp_order", "3")));

    // [output]
    c.points_spec = ini.get("output", "points");
    if (c.points_spec.rfind("list:", 0) == 0) {
        std::stringstream ss(c.points_spec.substr(5));
        double v;
        while (ss >> v) c.points.push_back(Vec::scalar(v));
    } else {
        const auto args = parse_args("output.points", c.points_spec, "linspace");
        if (args.size() != 3)
            throw ConfigError("key 'output.points': linspace(lo, hi, count)");
        const int count = static_cast<int>(args[2]);
        if (count < 1) throw ConfigError("key 'output.points': count must be >= 1");
        for (int i = 0; i < count; ++i) {
            const double x =
                count == 1 ? args[0] : args[0] + (args[1] - args[0]) * i / (count - 1);
            c.points.push_back(Vec::scalar(x));
        }
    }
    if (c.points.empty()) throw ConfigError("key 'output.points': no points given");
    c.csv_name = ini.get_or("output", "csv", "solution.csv");
    c.json_name = ini.get_or("output", "json", "summary.json");
    c.density_csv_name = ini.get_or("output", "density_csv", "");
    if (!c.density_csv_name.empty() && !c.problem.mu)
        throw ConfigError("key 'output.density_csv': needs 'problem.fractional'");

    // Killed problems carry zero exterior data; reject initial conditions
    // that are visibly nonzero outside the closure of the domain.
    if (c.problem.domain) {
        const auto& dom = *c.problem.domain;
        const double r = c.problem.initial.support_radius;
        for (int i = 0; i <= 64; ++i) {
            const double x = -r + 2.0 * r * i / 64.0;
            if (dom.signed_dist(Vec::scalar(x)) < -1e-9 &&
                std::fabs(c.problem.initial(Vec::scalar(x))) > 1e-12)
                throw ConfigError("key 'problem.initial': '" + c.initial_spec +
                                  "' does not vanish outside the domain (x = " +
                                  std::to_string(x) + ")");
        }
    }

    // [convergence]
    const std::string nlist = ini.get_or("convergence", "n_list", "");
    if (!nlist.empty()) {
        std::stringstream ss(nlist);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            tok = trim(tok);
            if (tok.empty()) continue;
            const int v = static_cast<int>(parse_int("convergence.n_list", tok));
            if (v < 1) throw ConfigError("key 'convergence.n_list': entries must be >= 1");
            c.n_list.push_back(v);
        }
    }
    c.reference = ini.get_or("convergence", "reference", "oracle");
    if (c.reference != "oracle" && c.reference != "finest")
        throw ConfigError("key 'convergence.reference': expected oracle|finest");
    return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    return from_ini(IniFile::parse(in));
}

std::string RunConfig::echo_ini() const {
    std::ostringstream os;
    os << "[problem]\n";
    os << "coefficients = " << coefficients_spec << "\n";
    if (!domain_spec.empty()) os << "domain = " << domain_spec << "\n";
    os << "initial = " << initial_spec << "\n";
    if (!fractional_spec.empty()) os << "fractional = " << fractional_spec << "\n";
    os << "horizon = " << format_double(problem.horizon) << "\n\n";
    os << "[solver]\n";
    os << "backend = " << backend << "\n";
    os << "mode = " << mode << "\n";
    os << "n = " << n << "\n";
    os << "samples = " << samples << "\n";
    os << "seed = " << seed << "\n";
    os << "batch = " << batch << "\n";
    os << "antithetic = " << (antithetic ? "true" : "false") << "\n";
    os << "tau = " << tau << "\n";
    os << "tau_nodes = " << tau_nodes << "\n";
    os << "quad_nodes = " << quad_nodes << "\n";
    os << "quad_window = " << format_double(quad_window) << "\n";
    os << "interp_order = " << interp_order << "\n\n";
    os << "[output]\n";
    os << "points = " << points_spec << "\n";
    os << "csv = " << csv_name << "\n";
    os << "json = " << json_name << "\n";
    if (!density_csv_name.empty()) os << "density_csv = " << density_csv_name << "\n";
    if (!n_list.empty()) {
        os << "\n[convergence]\n";
        os << "n_list = ";
        for (std::size_t i = 0; i < n_list.size(); ++i) os << (i ? "," : "") << n_list[i];
        os << "\n";
        os << "reference = " << reference << "\n";
    }
    return os.str();
}

namespace {

chernoff::StepMode resolve_mode(const RunConfig& c) {
    if (c.mode == "whole") return chernoff::StepMode::whole_space;
    if (c.mode == "soft") return chernoff::StepMode::soft_cutoff;
    if (c.mode == "hard") return chernoff::StepMode::hard_kill;
    return c.problem.domain ? chernoff::StepMode::hard_kill : chernoff::StepMode::whole_space;
}

chernoff::ChernoffStep make_step(const RunConfig& c) {
    const chernoff::StepMode mode = resolve_mode(c);
    if (mode == chernoff::StepMode::whole_space)
        return chernoff::ChernoffStep(c.problem.coeffs);
    if (!c.problem.domain)
        throw ConfigError("key 'solver.mode': killed mode requires 'problem.domain'");
    return chernoff::ChernoffStep(c.problem.coeffs, c.problem.domain, mode);
}

chernoff::QuadratureSpec make_quad(const RunConfig& c) {
    chernoff::QuadratureSpec q;
    q.nodes = c.quad_nodes;
    q.window = c.quad_window;
    q.interp_order = c.interp_order;
    return q;
}

fractional::TauSpec make_tau(const RunConfig& c) {
    fractional::TauSpec t;
    if (c.tau == "quad") t.kind = fractional::TauSpec::Kind::quadrature;
    if (c.tau == "mc") t.kind = fractional::TauSpec::Kind::monte_carlo;
    t.nodes = c.tau_nodes;
    return t;
}

SolutionField solve_field(const RunConfig& c, std::uint64_t seed, int n, int threads) {
    feynman::MCSpec mc;
    mc.samples = c.samples;
    mc.seed = seed;
    mc.batch = c.batch;
    mc.antithetic = c.antithetic;

    if (c.problem.mu)
        return fractional::subordinated_solution(c.problem, n, c.points, mc, make_tau(c),
                                                 threads);
    const chernoff::ChernoffStep step = make_step(c);
    if (c.backend == "quad")
        return chernoff::chernoff_iterate(step, n, c.problem.horizon, c.problem.initial, c.points,
                                          make_quad(c));
    return feynman::feynman_estimate(step, n, c.problem.horizon, c.problem.initial, c.points, mc,
                                     threads);
}

/// Closed-form reference for problems the oracles cover: constant diffusion,
/// zero drift, constant killing; Gaussian initial on the whole space or any
/// initial on an interval.
std::optional<std::function<double(double tau, double x)>> oracle_for(const RunConfig& c) {
    const std::string& spec = c.coefficients_spec;
    const bool plain_heat = spec.rfind("heat", 0) == 0;
    const bool killing = spec.rfind("killing", 0) == 0 || spec.rfind("constant-killing", 0) == 0;
    if (!plain_heat && !killing) return std::nullopt;
    const double a = c.problem.coeffs.diffusion(Vec::scalar(0))(0, 0);
    const double kill = c.problem.coeffs.killing(Vec::scalar(0));

    if (c.problem.domain) {
        auto exp_ptr = std::make_shared<oracles::EigenExpansion>(
            oracles::EigenExpansion::build_interval(
                a, c.problem.domain->lo(), c.problem.domain->hi(),
                [f = c.problem.initial.f](double x) { return f(Vec::scalar(x)); }, 64));
        return [exp_ptr, kill](double tau, double x) {
            return std::exp(-kill * tau) * exp_ptr->value(tau, x);
        };
    }
    if (c.initial_spec.rfind("gaussian", 0) != 0) return std::nullopt;
    const auto args = parse_args("problem.initial", c.initial_spec, "gaussian");
    oracles::GaussianParams g;
    if (args.size() > 0) g.amplitude = args[0];
    if (args.size() > 1) g.center = args[1];
    if (args.size() > 2) g.sigma = args[2];
    return [a, kill, g](double tau, double x) {
        return std::exp(-kill * tau) * oracles::heat_exact(a, tau, x, g);
    };
}

void write_summary(const RunConfig& c, const RunOptions& opts, const SolutionField& field,
                   const std::string& command, double wall_s, const std::string& csv_path,
                   const std::string& json_path) {
    nlohmann::json j;
    j["command"] = command;
    j["config_echo"] = c.echo_ini();
    j["seed"] = field.seed;
    j["threads"] = opts.threads;
    j["n"] = field.n;
    j["samples"] = field.samples;
    j["backend"] = field.backend;
    j["wall_time_s"] = wall_s;
    j["csv"] = csv_path;
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < field.points.size(); ++r)
        rows.push_back({{"x", field.points[r][0]},
                        {"value", field.values[r]},
                        {"stderr", field.std_errors[r]}});
    j["rows"] = rows;
    std::ofstream out(json_path);
    out << j.dump(2) << "\n";
}

}  // namespace

namespace {

/// tau/density/tail table for the problem's subordination measure.
void write_density_diagnostics(const RunConfig& c, std::uint64_t seed, const std::string& path) {
    const auto& mu = *c.problem.mu;
    const double t = std::max(c.problem.horizon, 1e-6);
    const double radius = fractional::truncation_radius(mu, t, 1e-9);
    std::ofstream out(path);
    out << "tau,density,tail\n";
    const int rows = 128;
    if (mu.is_half()) {
        for (int i = 0; i <= rows; ++i) {
            const double tau = radius * i / rows;
            out << format_double(tau) << ","
                << format_double(fractional::inverse_subordinator_density(mu, t, tau)) << ","
                << format_double(fractional::tail_mass_half(t, tau)) << "\n";
        }
        return;
    }
    // General measures: one set of common stable draws serves every row.
    const long long samples = 50000;
    std::vector<std::vector<double>> draws(mu.atoms.size());
    RngStream rng(seed, StreamPurpose::tau, 7, 0);
    for (auto& v : draws) v.reserve(samples);
    for (long long i = 0; i < samples; ++i)
        for (std::size_t a = 0; a < mu.atoms.size(); ++a)
            draws[a].push_back(rng.stable_one_sided(mu.atoms[a].beta));
    auto subordinator_at = [&](double tau, long long i) {
        double d = 0;
        for (std::size_t a = 0; a < mu.atoms.size(); ++a)
            d += mu.component_scale(a) * std::pow(tau, 1.0 / mu.atoms[a].beta)
                 * draws[a][static_cast<std::size_t>(i)];
        return d;
    };
    const double h = radius / rows;
    for (int i = 0; i <= rows; ++i) {
        const double tau = h * i;
        long long tail_count = 0, window = 0;
        const double lo = std::max(tau - 0.5 * h, 0.0), hi = tau + 0.5 * h;
        for (long long j = 0; j < samples; ++j) {
            const double d_hi = subordinator_at(hi, j);
            if (subordinator_at(tau, j) <= t) ++tail_count;
            if (subordinator_at(lo, j) <= t && d_hi > t) ++window;
        }
        const double density = static_cast<double>(window) / samples / (hi - lo);
        const double tail = static_cast<double>(tail_count) / samples;
        out << format_double(tau) << "," << format_double(density) << ","
            << format_double(tail) << "\n";
    }
}

}  // namespace

int run_solve(const RunConfig& config, const RunOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::uint64_t seed = opts.seed_override.value_or(config.seed);
    const SolutionField field = solve_field(config, seed, config.n, opts.threads);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::filesystem::create_directories(opts.out_dir);
    if (!config.density_csv_name.empty())
        write_density_diagnostics(config, seed, opts.out_dir + "/" + config.density_csv_name);
    const std::string csv_path = opts.out_dir + "/" + config.csv_name;
    const std::string json_path = opts.out_dir + "/" + config.json_name;
    if (opts.format == "csv" || opts.format == "both") {
        std::ofstream csv(csv_path);
        field.write_csv(csv);
    }
    if (opts.format == "json" || opts.format == "both") {
        RunConfig echoed = config;
        echoed.seed = seed;
        echoed.seed_given = true;
        write_summary(echoed, opts, field, "solve", wall, csv_path, json_path);
    }
    if (opts.log) {
        *opts.log << "solve: " << field.points.size() << " points, backend " << field.backend
                  << ", wall " << wall << " s\n";
    }
    return 0;
}

int run_convergence(const RunConfig& config, const RunOptions& opts) {
    if (config.n_list.size() < 2)
        throw ConfigError("key 'convergence.n_list': need at least two n values");
    const std::uint64_t seed = opts.seed_override.value_or(config.seed);

    // Reference values per point.
    std::vector<double> ref(config.points.size(), 0.0);
    std::vector<double> ref_err(config.points.size(), 0.0);
    std::string ref_kind = config.reference;
    auto oracle = config.reference == "oracle"
                      ? oracle_for(config)
                      : std::nullopt;
    if (config.reference == "oracle" && !oracle) ref_kind = "finest";
    if (oracle) {
        for (std::size_t p = 0; p < config.points.size(); ++p) {
            const double x = config.points[p][0];
            if (config.problem.mu) {
                ref[p] = oracles::subordinated_oracle(
                    [&](double tau) { return (*oracle)(tau, x); }, *config.problem.mu,
                    config.problem.horizon);
            } else {
                ref[p] = (*oracle)(config.problem.horizon, x);
            }
        }
    } else {
        const int finest = 4 * *std::max_element(config.n_list.begin(), config.n_list.end());
        const SolutionField f = solve_field(config, seed, finest, opts.threads);
        ref = f.values;
        ref_err = f.std_errors;
    }

    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream table;
    table << "n,sup_error,stderr\n";
    nlohmann::json rows = nlohmann::json::array();
    for (const int n : config.n_list) {
        const SolutionField f = solve_field(config, seed, n, opts.threads);
        double sup = 0, sup_se = 0;
        for (std::size_t p = 0; p < config.points.size(); ++p) {
            const double e = std::fabs(f.values[p] - ref[p]);
            if (e >= sup) {
                sup = e;
                sup_se = std::sqrt(f.std_errors[p] * f.std_errors[p] + ref_err[p] * ref_err[p]);
            }
        }
        table << n << "," << format_double(sup) << "," << format_double(sup_se) << "\n";
        rows.push_back({{"n", n}, {"sup_error", sup}, {"stderr", sup_se}});
    }
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::filesystem::create_directories(opts.out_dir);
    const std::string csv_path = opts.out_dir + "/" + config.csv_name;
    if (opts.format == "csv" || opts.format == "both") {
        std::ofstream csv(csv_path);
        csv << table.str();
    }
    if (opts.format == "json" || opts.format == "both") {
        nlohmann::json j;
        j["command"] = "convergence";
        j["config_echo"] = config.echo_ini();
        j["seed"] = seed;
        j["reference"] = ref_kind;
        j["wall_time_s"] = wall;
        j["rows"] = rows;
        std::ofstream out(opts.out_dir + "/" + config.json_name);
        out << j.dump(2) << "\n";
    }
    if (opts.log) *opts.log << "convergence: reference " << ref_kind << ", wall " << wall << " s\n";
    return 0;
}

}  // namespace fpk::cli
