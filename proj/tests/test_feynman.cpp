#include "doctest.h"

#include <cmath>

#include "fpk/catalog.hpp"
#include "fpk/feynman.hpp"
#include "fpk/oracles.hpp"

using namespace fpk;
using chernoff::ChernoffStep;
using chernoff::StepMode;
using feynman::MCSpec;

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("sample_chain weights and killing") {
    ChernoffStep heat(catalog::heat(0.5));
    RngStream rng(3, StreamPurpose::chain, 0, 0);
    const auto chain = feynman::sample_chain(heat, 16, 1.0, Vec::scalar(0), rng);
    CHECK(chain.weight == 1.0); // C = 0, no domain
    CHECK(chain.alive);
    CHECK(chain.positions.size() == 17);
    CHECK(chain.jumps.size() == 16);
    for (const Vec& z : chain.jumps) CHECK(z[0] == 0.0);

    const model::Domain g = model::Domain::interval(0.0, kPi);
    ChernoffStep hard(catalog::heat(0.5), g, StepMode::hard_kill);
    RngStream rng2(3, StreamPurpose::chain, 0, 1);
    const auto dead = feynman::sample_chain(hard, 8, 1.0, Vec::scalar(-2.0), rng2);
    CHECK_FALSE(dead.alive);
    CHECK(dead.weight == 0.0);
}

TEST_CASE("chain weights stay in [0,1] for nonnegative killing") {
    const model::Domain g = model::Domain::interval(0.0, kPi);
    model::CoefficientSet cs = catalog::compound_poisson(1.5, 0.4, 0.5, -0.3, 0.5);
    cs.killing = [](const Vec& x) { return 0.2 + 0.1 * std::sin(x[0]); };
    for (auto mode : {StepMode::whole_space, StepMode::soft_cutoff, StepMode::hard_kill}) {
        ChernoffStep step(cs, mode == StepMode::whole_space
                                  ? std::optional<model::Domain>{}
                                  : std::optional<model::Domain>{g},
                          mode);
        for (int j = 0; j < 200; ++j) {
            RngStream rng(91, StreamPurpose::chain, 5, static_cast<std::uint32_t>(j));
            const auto chain = feynman::sample_chain(step, 16, 0.7, Vec::scalar(1.3), rng);
            CHECK(chain.weight >= 0.0);
            CHECK(chain.weight <= 1.0);
            if (!chain.alive) CHECK(step.mode == StepMode::hard_kill);
        }
    }
}

TEST_CASE("single-step increment moments match the Gaussian law") {
    // n=1, B=C=0, A=1/2: x1 - x0 ~ N(0, t).
    ChernoffStep heat(catalog::heat(0.5));
    const int n_chains = 100000;
    double sum = 0, sum2 = 0;
    for (int j = 0; j < n_chains; ++j) {
        RngStream rng(17, StreamPurpose::chain, 0, static_cast<std::uint32_t>(j));
        const auto chain = feynman::sample_chain(heat, 1, 1.0, Vec::scalar(0), rng);
        const double dx = chain.positions[1][0] - chain.positions[0][0];
        sum += dx;
        sum2 += dx * dx;
    }
    CHECK(sum / n_chains == doctest::Approx(0.0).epsilon(0.02));
    CHECK(sum2 / n_chains == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("constant killing estimate hits the closed form") {
    ChernoffStep step(catalog::constant_killing(0.3, 0.5));
    model::BoundedFunction one;
    one.f = [](const Vec&) { return 1.0; };
    one.support_radius = 1e9;
    MCSpec mc;
    mc.samples = 20000;
    mc.seed = 5;
    const auto f = feynman::feynman_estimate(step, 16, 2.0, one, {Vec::scalar(0.3)}, mc);
    // Weight is deterministic for constant C: exact equality up to rounding.
    CHECK(f.values[0] == doctest::Approx(std::exp(-0.6)).epsilon(1e-12));

    const auto zero = feynman::feynman_estimate(step, 4, 1.0, catalog::zero_initial(),
                                                {Vec::scalar(0)}, mc);
    CHECK(zero.values[0] == 0.0);
    CHECK(zero.std_errors[0] == 0.0);
}

TEST_CASE("whole-space heat estimator is unbiased at every n") {
    ChernoffStep step(catalog::heat(0.5));
    const auto f0 = catalog::gaussian_initial();
    MCSpec mc;
    mc.samples = 100000;
    mc.seed = 11;
    const std::vector<Vec> pts{Vec::scalar(-1), Vec::scalar(0), Vec::scalar(1)};
    for (int n : {1, 4, 16}) {
        const auto f = feynman::feynman_estimate(step, n, 1.0, f0, pts, mc, 2);
        for (std::size_t p = 0; p < pts.size(); ++p) {
            const double exact = oracles::heat_exact(0.5, 1.0, pts[p][0], {});
            CHECK_MESSAGE(std::fabs(f.values[p] - exact) < 4 * f.std_errors[p],
                          "n=", n, " x=", pts[p][0], " got ", f.values[p], " want ", exact,
                          " se ", f.std_errors[p]);
        }
    }
}

TEST_CASE("estimates at n and 2n agree on the heat benchmark") {
    ChernoffStep step(catalog::heat(0.5));
    const auto f0 = catalog::gaussian_initial();
    MCSpec mc;
    mc.samples = 50000;
    mc.seed = 23;
    const std::vector<Vec> pts{Vec::scalar(0.5)};
    const auto a = feynman::feynman_estimate(step, 8, 1.0, f0, pts, mc);
    const auto b = feynman::feynman_estimate(step, 16, 1.0, f0, pts, mc);
    const double band = 4 * std::sqrt(a.std_errors[0] * a.std_errors[0] +
                                      b.std_errors[0] * b.std_errors[0]);
    CHECK(std::fabs(a.values[0] - b.values[0]) < band);
}

TEST_CASE("killed interval estimator matches the discrete-kill oracle") {
    const model::Domain g = model::Domain::interval(0.0, kPi);
    ChernoffStep step(catalog::heat(1.0), g, StepMode::hard_kill);
    const auto f0 = catalog::sine_mode(1);
    MCSpec mc;
    mc.samples = 100000;
    mc.seed = 31;
    const auto f = feynman::feynman_estimate(step, 64, 0.5, f0, {Vec::scalar(kPi / 2)}, mc, 2);
    // The estimator is unbiased for Theta_64; frozen dense-matrix value.
    CHECK_MESSAGE(std::fabs(f.values[0] - 0.619113) < 4 * f.std_errors[0], "got ",
                  f.values[0], " se ", f.std_errors[0]);
    // The continuum limit exp(-0.5) sits one discrete-kill bias away.
    CHECK(std::fabs(f.values[0] - std::exp(-0.5)) < 0.02);
}

TEST_CASE("estimator is deterministic in the thread count and contraction-bounded") {
    const model::Domain g = model::Domain::interval(0.0, kPi);
    ChernoffStep step(catalog::constant_killing(0.2, 0.5), g, StepMode::hard_kill);
    const auto f0 = catalog::sine_mode(2);
    MCSpec mc;
    mc.samples = 30000;
    mc.seed = 77;
    const std::vector<Vec> pts{Vec::scalar(0.7), Vec::scalar(1.9), Vec::scalar(2.6)};
    const auto f1 = feynman::feynman_estimate(step, 32, 0.8, f0, pts, mc, 1);
    const auto f3 = feynman::feynman_estimate(step, 32, 0.8, f0, pts, mc, 3);
    const auto f8 = feynman::feynman_estimate(step, 32, 0.8, f0, pts, mc, 8);
    for (std::size_t p = 0; p < pts.size(); ++p) {
        CHECK(f1.values[p] == f3.values[p]);
        CHECK(f1.values[p] == f8.values[p]);
        CHECK(f1.std_errors[p] == f8.std_errors[p]);
        CHECK(std::fabs(f1.values[p]) <= 1.0);
    }
}

TEST_CASE("domain monotonicity with shared seeds") {
    const model::Domain big = model::Domain::interval(0.0, kPi);
    const model::Domain small = model::Domain::interval(0.4, 2.8);
    ChernoffStep step_big(catalog::heat(0.5), big, StepMode::hard_kill);
    ChernoffStep step_small(catalog::heat(0.5), small, StepMode::hard_kill);
    const auto f0 = catalog::sine_mode(1);
    MCSpec mc;
    mc.samples = 20000;
    mc.seed = 41;
    const std::vector<Vec> pts{Vec::scalar(1.2), Vec::scalar(2.0)};
    const auto fb = feynman::feynman_estimate(step_big, 32, 0.5, f0, pts, mc);
    const auto fs = feynman::feynman_estimate(step_small, 32, 0.5, f0, pts, mc);
    for (std::size_t p = 0; p < pts.size(); ++p) CHECK(fs.values[p] <= fb.values[p] + 1e-12);
}

TEST_CASE("antithetic pairing keeps the estimator unbiased") {
    ChernoffStep step(catalog::heat(0.5));
    const auto f0 = catalog::gaussian_initial();
    MCSpec mc;
    mc.samples = 60000;
    mc.seed = 53;
    mc.antithetic = true;
    const auto f = feynman::feynman_estimate(step, 8, 1.0, f0, {Vec::scalar(0)}, mc, 2);
    CHECK(std::fabs(f.values[0] - 1.0 / std::sqrt(2.0)) < 4 * f.std_errors[0] + 1e-4);
}

TEST_CASE("MC agrees with the deterministic backend on shipped benchmarks") {
    struct Bench {
        ChernoffStep step;
        model::BoundedFunction f0;
        double t;
        Vec x;
    };
    const model::Domain g = model::Domain::interval(0.0, kPi);
    std::vector<Bench> benches;
    benches.push_back({ChernoffStep(catalog::heat(0.5)), catalog::gaussian_initial(), 1.0,
                       Vec::scalar(0.0)});
    benches.push_back({ChernoffStep(catalog::ou(1.0, 0.5)), catalog::gaussian_initial(), 0.5,
                       Vec::scalar(1.0)});
    benches.push_back({ChernoffStep(catalog::constant_killing(0.3, 0.5)),
                       catalog::gaussian_initial(), 0.8, Vec::scalar(-0.3)});
    benches.push_back({ChernoffStep(catalog::heat(1.0), g, StepMode::hard_kill),
                       catalog::sine_mode(1), 0.5, Vec::scalar(1.2)});
    MCSpec mc;
    mc.samples = 80000;
    mc.seed = 67;
    for (const auto& b : benches) {
        const auto mc_field = feynman::feynman_estimate(b.step, 24, b.t, b.f0, {b.x}, mc, 2);
        const auto quad_field = chernoff::chernoff_iterate(b.step, 24, b.t, b.f0, {b.x});
        CHECK_MESSAGE(std::fabs(mc_field.values[0] - quad_field.values[0]) <
                          4 * mc_field.std_errors[0] + 1e-6,
                      b.step.coeffs.name, ": mc ", mc_field.values[0], " quad ",
                      quad_field.values[0], " se ", mc_field.std_errors[0]);
    }
}

TEST_CASE("two-dimensional chains match the quadrature step") {
    model::CoefficientSet cs;
    cs.dim = 2;
    cs.diffusion = [](const Vec&) {
        SymMat a(2);
        a(0, 0) = 0.6;
        a(1, 1) = 0.4;
        a(0, 1) = a(1, 0) = 0.15;
        return a;
    };
    cs.drift = [](const Vec& x) { return Vec{0.3 * x[1], -0.2 * x[0]}; };
    cs.killing = [](const Vec&) { return 0.1; };
    cs.a0 = 0.3;
    cs.A0 = 0.7;

    // Increment covariance of a single step.
    {
        ChernoffStep step(cs);
        const int n_chains = 40000;
        double c00 = 0, c11 = 0, c01 = 0;
        for (int j = 0; j < n_chains; ++j) {
            RngStream rng(97, StreamPurpose::chain, 6, static_cast<std::uint32_t>(j));
            const auto chain = feynman::sample_chain(step, 1, 0.5, Vec{0, 0}, rng);
            const Vec d = chain.positions[1] - chain.positions[0];
            c00 += d[0] * d[0];
            c11 += d[1] * d[1];
            c01 += d[0] * d[1];
        }
        CHECK(c00 / n_chains == doctest::Approx(2 * 0.5 * 0.6).epsilon(0.05));
        CHECK(c11 / n_chains == doctest::Approx(2 * 0.5 * 0.4).epsilon(0.05));
        CHECK(c01 / n_chains == doctest::Approx(2 * 0.5 * 0.15).epsilon(0.2));
    }

    // Box-killed single step: MC vs deterministic quadrature.
    const model::Domain box = model::Domain::box({0.0, 0.0}, {1.0, 1.0});
    ChernoffStep hard(cs, box, chernoff::StepMode::hard_kill);
    model::BoundedFunction f0;
    f0.f = [](const Vec& x) {
        if (x[0] <= 0 || x[0] >= 1 || x[1] <= 0 || x[1] >= 1) return 0.0;
        constexpr double pi = 3.14159265358979323846;
        return std::sin(pi * x[0]) * std::sin(pi * x[1]);
    };
    f0.support_radius = 2;
    MCSpec mc;
    mc.samples = 60000;
    mc.seed = 83;
    chernoff::QuadratureSpec quad;
    quad.nodes = 161;
    const Vec x0{0.4, 0.55};
    const auto f = feynman::feynman_estimate(hard, 1, 0.05, f0, {x0}, mc, 2);
    const double q = chernoff::apply_step(hard, 0.05, f0, x0, quad);
    CHECK_MESSAGE(std::fabs(f.values[0] - q) < 4 * f.std_errors[0] + 1e-4, "mc ",
                  f.values[0], " quad ", q, " se ", f.std_errors[0]);
}

TEST_CASE("soft and hard estimators converge together") {
    model::Problem problem;
    problem.coeffs = catalog::heat(1.0);
    problem.domain = model::Domain::interval(0.0, kPi);
    problem.initial = catalog::sine_mode(1);
    problem.horizon = 0.5;
    MCSpec mc;
    mc.samples = 40000;
    mc.seed = 71;
    const std::vector<Vec> pts{Vec::scalar(kPi / 2)};

    // Interior point, small t: cutoffs are 1 on almost every path.
    const auto small_t = feynman::soft_vs_hard_compare(problem, 16, 0.05, pts, mc, 2);
    CHECK(std::fabs(small_t.gap[0]) <= 4 * small_t.gap_stderr[0] + 1e-4);

    // The paired gap shrinks as n grows.
    double prev = 1e9;
    for (int n : {8, 32, 128}) {
        const auto rep = feynman::soft_vs_hard_compare(problem, n, 0.5, pts, mc, 2);
        const double gap = std::fabs(rep.gap[0]);
        CHECK(gap < prev + 2 * rep.gap_stderr[0]);
        prev = gap;
        // Soft never exceeds hard for nonnegative data (cutoff <= indicator).
        CHECK(rep.soft.values[0] <= rep.hard.values[0] + 2 * rep.gap_stderr[0]);
    }
}
