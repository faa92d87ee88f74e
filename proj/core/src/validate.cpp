#include "fpk/validate.hpp"

#include <cmath>
#include <sstream>

#include "fpk/catalog.hpp"
#include "fpk/chernoff.hpp"
#include "fpk/feynman.hpp"
#include "fpk/fractional.hpp"
#include "fpk/quadrature.hpp"

#include "json.hpp"

namespace fpk::cli {

namespace {

using model::BoundedFunction;
using model::CoefficientSet;
using model::Domain;

void add(SuiteReport& rep, const std::string& name, bool ok, const std::string& detail) {
    rep.checks.push_back({name, ok, detail});
}

std::vector<CoefficientSet> catalog_sets() {
    return {catalog::heat(0.5), catalog::ou(1.0, 0.5), catalog::variable_a(1.0, 0.25),
            catalog::constant_killing(0.3, 0.5),
            catalog::compound_poisson(1.0, 0.4, 0.5, -0.3, 0.5)};
}

/// Random mixture of Gaussians with a computable sup bound; nonnegative when
/// requested.
BoundedFunction random_test_function(RngStream& rng, bool nonnegative, double& sup_bound) {
    struct Bumpy {
        double amp, center, sigma;
    };
    std::vector<Bumpy> parts;
    const int k = 1 + static_cast<int>(rng.uniform() * 3);
    double bound = 0;
    for (int i = 0; i < k; ++i) {
        double amp = 2.0 * rng.uniform() - (nonnegative ? 0.0 : 1.0);
        if (nonnegative) amp = std::fabs(amp);
        const double center = 4.0 * rng.uniform() - 2.0;
        const double sigma = 0.3 + 1.5 * rng.uniform();
        parts.push_back({amp, center, sigma});
        bound += std::fabs(amp);
    }
    sup_bound = bound;
    BoundedFunction f;
    f.f = [parts](const Vec& x) {
        double v = 0;
        for (const auto& p : parts) {
            const double u = (x[0] - p.center) / p.sigma;
            v += p.amp * std::exp(-0.5 * u * u);
        }
        return v;
    };
    f.support_radius = 2.0 + 40.0 * 1.8;
    f.name = "random-mixture";
    return f;
}

void kernels_suite(SuiteReport& rep, std::uint64_t seed, int probes_per_set) {
    // Ellipticity / symmetry / killing spot checks on the whole catalog.
    for (const CoefficientSet& cs : catalog_sets()) {
        const model::CoefficientCheck chk = model::check_coefficients(cs, 1000, 6.0, seed);
        add(rep, "ellipticity:" + cs.name, chk.passed,
            chk.passed ? "range [" + std::to_string(chk.worst_ellipticity_low) + "," +
                             std::to_string(chk.worst_ellipticity_high) + "]"
                       : chk.failure);
    }

    // Kernel symmetry for constant coefficients.
    {
        const CoefficientSet cs = catalog::heat(0.5);
        RngStream rng(seed, StreamPurpose::probe, 10, 0);
        double worst = 0;
        for (int i = 0; i < 200; ++i) {
            const Vec x = Vec::scalar(4 * rng.uniform() - 2);
            const Vec y = Vec::scalar(4 * rng.uniform() - 2);
            const double t = 0.1 + rng.uniform();
            worst = std::max(worst, std::fabs(chernoff::gaussian_kernel(cs, t, x, y) -
                                              chernoff::gaussian_kernel(cs, t, y, x)));
        }
        add(rep, "kernel-symmetry:heat", worst < 1e-13, "max asymmetry " + std::to_string(worst));
    }

    // Chapman-Kolmogorov semigroup identity of the kernel by quadrature.
    {
        const CoefficientSet cs = catalog::heat(0.5);
        const GaussLegendre& rule = GaussLegendre::get(257);
        const double s = 0.5, t = 0.5;
        const Vec x = Vec::scalar(0.0), y = Vec::scalar(1.0);
        double conv = 0;
        for (int q = 0; q < 257; ++q) {
            const double z = rule.node_on(q, -10, 11);
            conv += rule.weight_on(q, -10, 11) * chernoff::gaussian_kernel(cs, s, x, Vec::scalar(z)) *
                    chernoff::gaussian_kernel(cs, t, Vec::scalar(z), y);
        }
        const double direct = chernoff::gaussian_kernel(cs, s + t, x, y);
        add(rep, "kernel-convolution", std::fabs(conv - direct) < 1e-10,
            "|conv - direct| = " + std::to_string(std::fabs(conv - direct)));
    }

    // Sub-Markov mass: F(t)1 = exp(-t C(x)) (eta mass is 1), quadrature route.
    {
        BoundedFunction one;
        one.f = [](const Vec&) { return 1.0; };
        one.support_radius = 1e9;
        one.name = "one";
        double worst = 0;
        for (const CoefficientSet& cs : catalog_sets()) {
            chernoff::ChernoffStep step(cs);
            RngStream rng(seed, StreamPurpose::probe, 11, 0);
            for (int i = 0; i < 8; ++i) {
                const Vec x = Vec::scalar(2 * rng.uniform() - 1);
                const double t = 0.25 + rng.uniform();
                const double got = chernoff::apply_step(step, t, one, x);
                const double want = std::exp(-t * cs.killing(x));
                worst = std::max(worst, std::fabs(got - want));
            }
        }
        add(rep, "step-mass", worst < 1e-9, "max |F(t)1 - exp(-tC)| = " + std::to_string(worst));
    }

    // Contraction and positivity preservation on randomized probes.
    {
        RngStream rng(seed, StreamPurpose::probe, 12, 0);
        bool ok = true;
        std::string detail = "all probes inside bounds";
        for (const CoefficientSet& cs : catalog_sets()) {
            chernoff::ChernoffStep step(cs);
            for (int i = 0; i < probes_per_set && ok; ++i) {
                double sup = 0;
                const bool want_positive = (i % 2) == 0;
                const BoundedFunction f = random_test_function(rng, want_positive, sup);
                const double t = 0.05 + rng.uniform();
                const Vec x = Vec::scalar(4 * rng.uniform() - 2);
                const double v = chernoff::apply_step(step, t, f, x);
                if (std::fabs(v) > sup * (1 + 1e-9) + 1e-12) {
                    ok = false;
                    detail = "contraction violated on " + cs.name + ": |" + std::to_string(v) +
                             "| > sup " + std::to_string(sup);
                }
                if (want_positive && v < -1e-12) {
                    ok = false;
                    detail = "positivity violated on " + cs.name + ": " + std::to_string(v);
                }
            }
        }
        add(rep, "contraction-positivity", ok, detail);
    }
}

void killed_suite(SuiteReport& rep, std::uint64_t seed, int threads) {
    const Domain g = Domain::interval(0.0, 3.14159265358979323846);

    // Cutoff sandwich 1_{G_{s(t)}} <= cutoff <= 1_G and convergence to 1_G.
    {
        bool ok = true;
        std::string detail = "sandwich holds";
        for (double t : {0.01, 0.1, 0.5, 1.0}) {
            const double s = g.shrink(t);
            for (int i = 0; i <= 300 && ok; ++i) {
                const Vec x = Vec::scalar(-0.5 + 4.2 * i / 300.0);
                const double c = model::cutoff(g, t, x);
                const double inside_shrunk = g.signed_dist(x) > s ? 1.0 : 0.0;
                const double inside = g.contains(x) ? 1.0 : 0.0;
                if (c < inside_shrunk - 1e-12 || c > inside + 1e-12) {
                    ok = false;
                    detail = "violated at t=" + std::to_string(t) + ", x=" + std::to_string(x[0]);
                }
            }
        }
        for (const double x0 : {0.05, 0.3, 1.5, 3.0}) {
            double t = 0.5;
            for (int k = 0; k < 12; ++k) t *= 0.5;
            const double c = model::cutoff(g, t, Vec::scalar(x0));
            if (std::fabs(c - 1.0) > 1e-12) {
                ok = false;
                detail = "cutoff(t->0) != 1 at interior x=" + std::to_string(x0);
            }
        }
        add(rep, "cutoff-sandwich", ok, detail);
    }

    // Extension operator: agreement, linearity, sup-norm preservation.
    {
        auto phi = [](const Vec& x) { return std::sin(x[0]); };
        auto psi = [](const Vec& x) { return std::sin(2 * x[0]); };
        const auto e_phi = model::extend(g, phi);
        const auto e_psi = model::extend(g, psi);
        const auto e_mix = model::extend(g, [&](const Vec& x) { return 2 * phi(x) - 3 * psi(x); });
        bool ok = true;
        std::string detail = "agreement, linearity, sup-norm all pass";
        double sup_in = 0, sup_ext = 0;
        for (int i = 0; i <= 2000; ++i) {
            const Vec x = Vec::scalar(-2.0 + (3.14159265358979323846 + 4.0) * i / 2000.0);
            if (g.signed_dist(x) >= 0 && std::fabs(e_phi(x) - phi(x)) > 1e-12) {
                ok = false;
                detail = "extension disagrees on the closure at x=" + std::to_string(x[0]);
            }
            if (std::fabs(e_mix(x) - (2 * e_phi(x) - 3 * e_psi(x))) > 1e-12) {
                ok = false;
                detail = "extension not linear at x=" + std::to_string(x[0]);
            }
            if (g.signed_dist(x) >= 0) sup_in = std::max(sup_in, std::fabs(phi(Vec::scalar(x[0]))));
            sup_ext = std::max(sup_ext, std::fabs(e_phi(x)));
        }
        if (std::fabs(sup_in - sup_ext) > 1e-10) {
            ok = false;
            detail = "sup-norm not preserved: " + std::to_string(sup_in) + " vs " +
                     std::to_string(sup_ext);
        }
        add(rep, "extension-properties", ok, detail);
    }

    // Hard-kill domination and domain monotonicity with paired seeds.
    {
        const CoefficientSet cs = catalog::heat(0.5);
        BoundedFunction f0 = catalog::sine_mode(1);
        feynman::MCSpec mc;
        mc.samples = 20000;
        mc.seed = seed;
        const std::vector<Vec> pts{Vec::scalar(1.2), Vec::scalar(2.0)};
        chernoff::ChernoffStep whole(cs);
        chernoff::ChernoffStep killed(cs, g, chernoff::StepMode::hard_kill);
        const Domain g_small = Domain::interval(0.5, 2.6);
        chernoff::ChernoffStep killed_small(cs, g_small, chernoff::StepMode::hard_kill);
        const auto fw = feynman::feynman_estimate(whole, 32, 0.5, f0, pts, mc, threads);
        const auto fk = feynman::feynman_estimate(killed, 32, 0.5, f0, pts, mc, threads);
        const auto fs = feynman::feynman_estimate(killed_small, 32, 0.5, f0, pts, mc, threads);
        bool ok = true;
        std::string detail = "killed <= whole and monotone in G (pathwise)";
        for (std::size_t p = 0; p < pts.size(); ++p) {
            if (fk.values[p] > fw.values[p] + 1e-12) {
                ok = false;
                detail = "domination violated at x=" + std::to_string(pts[p][0]);
            }
            if (fs.values[p] > fk.values[p] + 1e-12) {
                ok = false;
                detail = "domain monotonicity violated at x=" + std::to_string(pts[p][0]);
            }
        }
        add(rep, "killed-domination", ok, detail);
    }

    // Large-jump validator: far jumps pass, short jumps near the boundary fail.
    {
        CoefficientSet far = catalog::heat(0.5);
        far.jump = model::make_compound_poisson(1.0, {{Vec::scalar(30.0), 0.5},
                                                      {Vec::scalar(-30.0), 0.5}});
        const auto rep_far = model::check_jump_domain(far, g, 0.5);
        CoefficientSet close = catalog::heat(0.5);
        close.jump = model::make_compound_poisson(1.0, {{Vec::scalar(0.2), 1.0}});
        const auto rep_close = model::check_jump_domain(close, g, 0.5);
        add(rep, "jump-domain-validator", rep_far.passed && !rep_close.passed,
            "far-jump mass " + std::to_string(rep_far.max_mass) + ", short-jump mass " +
                std::to_string(rep_close.max_mass));
    }
}

void fractional_suite(SuiteReport& rep, std::uint64_t seed) {
    using fractional::SubordinationMeasure;
    constexpr double kPi = 3.14159265358979323846;

    // Density mass and first moment for mu = delta_{1/2}.
    {
        const SubordinationMeasure mu = SubordinationMeasure::half();
        const GaussLegendre& rule = GaussLegendre::get(513);
        double mass = 0, moment = 0;
        for (int q = 0; q < 513; ++q) {
            const double tau = rule.node_on(q, 0.0, 30.0);
            const double p = fractional::inverse_subordinator_density(mu, 1.0, tau);
            mass += rule.weight_on(q, 0.0, 30.0) * p;
            moment += rule.weight_on(q, 0.0, 30.0) * tau * p;
        }
        add(rep, "half-density-mass", std::fabs(mass - 1.0) < 1e-10,
            "mass = " + std::to_string(mass));
        add(rep, "half-density-moment", std::fabs(moment - 2.0 / std::sqrt(kPi)) < 1e-9,
            "first moment = " + std::to_string(moment));
    }

    // Stable-generator Laplace identity on the (s, beta) grid.
    {
        bool ok = true;
        std::string detail = "|mean - exp(-s^beta)| <= 4 stderr on all 9 points";
        int idx = 0;
        for (double s : {0.5, 1.0, 2.0}) {
            for (double beta : {0.3, 0.5, 0.7}) {
                RngStream rng(seed, StreamPurpose::probe, 20, static_cast<std::uint32_t>(idx++));
                const long long n = 100000;
                double sum = 0, sum2 = 0;
                for (long long i = 0; i < n; ++i) {
                    const double v = std::exp(-s * rng.stable_one_sided(beta));
                    sum += v;
                    sum2 += v * v;
                }
                const double mean = sum / n;
                const double se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
                const double want = std::exp(-std::pow(s, beta));
                if (std::fabs(mean - want) > 4 * se) {
                    ok = false;
                    detail = "failed at s=" + std::to_string(s) + ", beta=" + std::to_string(beta) +
                             ": |" + std::to_string(mean) + " - " + std::to_string(want) +
                             "| > 4*" + std::to_string(se);
                }
            }
        }
        add(rep, "stable-laplace-identity", ok, detail);
    }

    // Tail monotonicity in t at fixed R (closed form and two-atom MC).
    {
        bool ok = true;
        std::string detail = "tail nondecreasing in t";
        double prev = -1;
        for (int i = 1; i <= 10; ++i) {
            const double t = 0.1 * i;
            const double tail = fractional::tail_mass_half(t, 2.0);
            if (tail < prev - 1e-15) ok = false;
            prev = tail;
        }
        const SubordinationMeasure two({{0.3, 0.5}, {0.7, 0.5}});
        RngStream rng(seed, StreamPurpose::probe, 21, 0);
        const long long n = 40000;
        std::vector<double> d(static_cast<std::size_t>(n));
        for (long long i = 0; i < n; ++i)
            d[static_cast<std::size_t>(i)] = fractional::sample_mixture_subordinator_at(two, 2.0, rng);
        prev = -1;
        for (int i = 1; i <= 10; ++i) {
            const double t = 0.1 * i;
            long long cnt = 0;
            for (double v : d)
                if (v <= t) ++cnt;
            const double tail = static_cast<double>(cnt) / n;
            if (tail < prev) {
                ok = false;
                detail = "two-atom MC tail decreased at t=" + std::to_string(t);
            }
            prev = tail;
        }
        add(rep, "tail-monotonicity", ok, detail);
    }

    // Fractional-derivative closed forms.
    {
        const int m = 4000;
        const double dt = 1.0 / m;
        std::vector<double> u(m + 1);
        for (int i = 0; i <= m; ++i) u[static_cast<std::size_t>(i)] = i * dt;
        const auto cap = fractional::caputo(u, dt, 0.5);
        const double want = 2.0 / std::sqrt(kPi);
        const bool ok1 = std::fabs(cap.back() - want) < 2e-3;

        for (int i = 0; i <= m; ++i) u[static_cast<std::size_t>(i)] = 1.0 + i * dt;
        const auto rl = fractional::riemann_liouville(u, dt, 0.5);
        const auto cap2 = fractional::caputo(u, dt, 0.5);
        const double rel = rl.back() - cap2.back();
        const double want_rel = 1.0 / std::sqrt(kPi);
        const bool ok2 = std::fabs(rel - want_rel) < 5e-3;
        add(rep, "caputo-rl-closed-forms", ok1 && ok2,
            "caputo(t)=" + std::to_string(cap.back()) + " (want " + std::to_string(want) +
                "), RL-Caputo=" + std::to_string(rel) + " (want " + std::to_string(want_rel) + ")");
    }
}

}  // namespace

std::string SuiteReport::to_json() const {
    nlohmann::json j;
    j["suite"] = suite;
    j["passed"] = passed();
    auto arr = nlohmann::json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = arr;
    return j.dump(2);
}

SuiteReport run_validation_suite(const std::string& suite,
                                 const std::optional<model::Problem>& extra, std::uint64_t seed,
                                 int threads) {
    SuiteReport rep;
    rep.suite = suite;
    const bool all = suite == "all";
    if (!all && suite != "kernels" && suite != "killed" && suite != "fractional")
        throw ConfigError("unknown validation suite '" + suite +
                          "' (expected kernels|killed|fractional|all)");
    if (all || suite == "kernels") kernels_suite(rep, seed, 40);
    if (all || suite == "killed") killed_suite(rep, seed, threads);
    if (all || suite == "fractional") fractional_suite(rep, seed);
    if (extra) {
        const model::CoefficientCheck chk = model::check_coefficients(extra->coeffs, 1000, 6.0, seed);
        add(rep, "ellipticity:config:" + extra->coeffs.name, chk.passed,
            chk.passed ? "ok" : chk.failure);
        if (extra->coeffs.jump && extra->domain) {
            const auto jrep = model::check_jump_domain(extra->coeffs, *extra->domain,
                                                       extra->domain->extension_delta());
            add(rep, "jump-domain:config", jrep.passed,
                "max shell mass " + std::to_string(jrep.max_mass));
        }
    }
    return rep;
}

}  // namespace fpk::cli
