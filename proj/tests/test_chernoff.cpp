#include "doctest.h"

#include <cmath>

#include "fpk/catalog.hpp"
#include "fpk/chernoff.hpp"
#include "fpk/oracles.hpp"
#include "fpk/quadrature.hpp"

using namespace fpk;
using chernoff::ChernoffStep;
using chernoff::StepMode;

namespace {
constexpr double kPi = 3.14159265358979323846;

model::BoundedFunction unit_gaussian() { return catalog::gaussian_initial(1.0, 0.0, 1.0); }

model::BoundedFunction constant_one() {
    model::BoundedFunction f;
    f.f = [](const Vec&) { return 1.0; };
    f.support_radius = 1e9;
    f.name = "one";
    return f;
}
}  // namespace

TEST_CASE("gaussian kernel closed form") {
    const auto cs = catalog::heat(0.5);
    // (4 pi t A)^{-1/2} at t=1, A=1/2: 1/sqrt(2 pi).
    CHECK(chernoff::gaussian_kernel(cs, 1.0, Vec::scalar(0), Vec::scalar(0)) ==
          doctest::Approx(1.0 / std::sqrt(2 * kPi)).epsilon(1e-13));
    // Gaussian decay.
    CHECK(chernoff::gaussian_kernel(cs, 0.7, Vec::scalar(0), Vec::scalar(40.0)) < 1e-300);
    CHECK_THROWS_AS(chernoff::gaussian_kernel(cs, 0.0, Vec::scalar(0), Vec::scalar(0)),
                    ValidationFailed);
}

TEST_CASE("kernel Chapman-Kolmogorov identity by quadrature") {
    const auto cs = catalog::heat(0.5);
    const GaussLegendre& rule = GaussLegendre::get(301);
    double conv = 0;
    for (int q = 0; q < 301; ++q) {
        const double z = rule.node_on(q, -12, 13);
        conv += rule.weight_on(q, -12, 13) *
                chernoff::gaussian_kernel(cs, 0.5, Vec::scalar(0), Vec::scalar(z)) *
                chernoff::gaussian_kernel(cs, 0.5, Vec::scalar(z), Vec::scalar(1.0));
    }
    const double direct = chernoff::gaussian_kernel(cs, 1.0, Vec::scalar(0), Vec::scalar(1.0));
    CHECK(direct == doctest::Approx(0.24197072).epsilon(1e-7));
    CHECK(conv == doctest::Approx(direct).epsilon(1e-11));
}

TEST_CASE("kernel rejects a broken coefficient set") {
    model::CoefficientSet bad = catalog::heat(0.5);
    bad.diffusion = [](const Vec&) { return SymMat::scalar1d(-1.0); };
    CHECK_THROWS_AS(chernoff::gaussian_kernel(bad, 1.0, Vec::scalar(0), Vec::scalar(0)),
                    SingularMatrix);
}

TEST_CASE("apply_step basics") {
    ChernoffStep killing(catalog::constant_killing(0.3, 0.5));
    // F(t)1 = exp(-t C).
    CHECK(chernoff::apply_step(killing, 2.0, constant_one(), Vec::scalar(0.4)) ==
          doctest::Approx(std::exp(-0.6)).epsilon(1e-10));

    // Linearity at zero.
    ChernoffStep heat(catalog::heat(0.5));
    CHECK(chernoff::apply_step(heat, 1.0, catalog::zero_initial(), Vec::scalar(0.2)) == 0.0);

    // t = 0 is the identity.
    const auto f0 = unit_gaussian();
    CHECK(chernoff::apply_step(heat, 0.0, f0, Vec::scalar(0.3)) ==
          doctest::Approx(f0(Vec::scalar(0.3))).epsilon(1e-15));

    // Gaussian convolution closed form: (1+t)^{-1/2} at x = 0, t = 1.
    CHECK(chernoff::apply_step(heat, 1.0, f0, Vec::scalar(0)) ==
          doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    // And against the oracle elsewhere.
    CHECK(chernoff::apply_step(heat, 0.7, f0, Vec::scalar(1.1)) ==
          doctest::Approx(oracles::heat_exact(0.5, 0.7, 1.1, {})).epsilon(1e-12));
}

TEST_CASE("apply_step agrees with the Girsanov-weighted second kernel form") {
    // Second displayed form of the local step, implemented independently:
    //   exp(-tC) int exp(A^{-1}B.(x-y)/2) exp(-t|A^{-1/2}B|^2/4) phi(y) p_A dy.
    const auto cs = catalog::ou(1.0, 0.5);
    ChernoffStep step(cs);
    const auto f0 = unit_gaussian();
    const GaussLegendre& rule = GaussLegendre::get(513);
    for (double t : {0.1, 0.5}) {
        for (double x0 : {-0.7, 0.0, 1.3}) {
            const double a = 0.5, b = x0;
            double alt = 0;
            const double lo = x0 - 14, hi = x0 + 14;
            for (int q = 0; q < 513; ++q) {
                const double y = rule.node_on(q, lo, hi);
                const double pa = chernoff::gaussian_kernel(cs, t, Vec::scalar(x0),
                                                            Vec::scalar(y));
                alt += rule.weight_on(q, lo, hi) * std::exp(0.5 * (b / a) * (x0 - y)) *
                       std::exp(-t * b * b / a / 4.0) * f0(Vec::scalar(y)) * pa;
            }
            const double direct = chernoff::apply_step(step, t, f0, Vec::scalar(x0));
            CHECK(direct == doctest::Approx(alt).epsilon(1e-9));
        }
    }
}

TEST_CASE("apply_step contraction, positivity, domination, sub-Markov mass") {
    const model::Domain g = model::Domain::interval(0.0, kPi);
    const auto f0 = catalog::sine_mode(1);
    ChernoffStep whole(catalog::heat(0.5));
    ChernoffStep hard(catalog::heat(0.5), g, StepMode::hard_kill);
    ChernoffStep soft(catalog::heat(0.5), g, StepMode::soft_cutoff);
    for (double t : {0.05, 0.3, 1.0}) {
        for (double x0 : {0.2, 1.0, kPi / 2, 2.8}) {
            const double vw = chernoff::apply_step(whole, t, f0, Vec::scalar(x0));
            const double vh = chernoff::apply_step(hard, t, f0, Vec::scalar(x0));
            const double vs = chernoff::apply_step(soft, t, f0, Vec::scalar(x0));
            CHECK(std::fabs(vw) <= 1.0 + 1e-12);
            CHECK(vh >= -1e-14);
            CHECK(vs >= -1e-14);
            // The whole-space quadrature integrates across the kink of the
            // zero-extended sine; both sides carry O(1e-4) node error.
            CHECK(vh <= vw + 1e-3);
            CHECK(chernoff::apply_step(whole, t, constant_one(), Vec::scalar(x0)) <=
                  1.0 + 1e-12);
        }
    }
    // Hard kill outside the domain.
    CHECK(chernoff::apply_step(hard, 0.2, f0, Vec::scalar(-0.5)) == 0.0);
}

TEST_CASE("compound-Poisson eta expansion and the jump step") {
    const auto cs = catalog::compound_poisson(1.0, 0.4, 0.5, -0.3, 0.5);
    const auto atoms = chernoff::enumerate_eta_atoms(*cs.jump, 0.8);
    double mass = 0, mean = 0;
    for (const auto& a : atoms) {
        mass += a.w;
        mean += a.w * a.z[0];
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    // E[eta_t] = t (lambda E[Y] - drift_correction).
    const double want_mean =
        0.8 * (1.0 * (0.5 * 0.4 + 0.5 * -0.3) - cs.jump->drift_correction[0]);
    CHECK(mean == doctest::Approx(want_mean).epsilon(1e-10));

    // Sub-Markov mass carries over to the jump-augmented step.
    ChernoffStep step(cs);
    CHECK(chernoff::apply_step(step, 0.8, constant_one(), Vec::scalar(0.1)) ==
          doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("chernoff_iterate n=1 equals apply_step") {
    ChernoffStep step(catalog::ou(0.7, 0.5));
    const auto f0 = unit_gaussian();
    const std::vector<Vec> grid{Vec::scalar(-0.4), Vec::scalar(0.0), Vec::scalar(0.9)};
    const SolutionField field = chernoff::chernoff_iterate(step, 1, 0.6, f0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(field.values[i] ==
              doctest::Approx(chernoff::apply_step(step, 0.6, f0, grid[i])).epsilon(1e-14));
}

TEST_CASE("chernoff_iterate is exact on the heat benchmark for every n") {
    ChernoffStep step(catalog::heat(0.5));
    const auto f0 = unit_gaussian();
    const std::vector<Vec> grid{Vec::scalar(0.0)};
    for (int n : {1, 2, 5}) {
        const SolutionField field = chernoff::chernoff_iterate(step, n, 1.0, f0, grid);
        const double tol = std::max(10 * field.std_errors[0], 1e-9);
        CHECK_MESSAGE(std::fabs(field.values[0] - 1.0 / std::sqrt(2.0)) < tol,
                      "n=", n, " value=", field.values[0], " interp_est=", field.std_errors[0]);
    }
}

TEST_CASE("chernoff_iterate error decreases in n on the OU benchmark") {
    ChernoffStep step(ChernoffStep(catalog::ou(1.0, 0.5)));
    const auto f0 = unit_gaussian();
    const std::vector<Vec> grid{Vec::scalar(1.0)};
    chernoff::QuadratureSpec quad;
    quad.nodes = 161;
    const double reference =
        chernoff::chernoff_iterate(step, 1024, 0.5, f0, grid, quad).values[0];
    double prev = 1e9;
    for (int n : {4, 8, 16, 32, 64}) {
        const double v = chernoff::chernoff_iterate(step, n, 0.5, f0, grid, quad).values[0];
        const double err = std::fabs(v - reference);
        CHECK(err < prev * 1.05 + 1e-12);
        prev = err;
    }
}

TEST_CASE("chernoff_iterate hard kill reproduces the discrete-kill values") {
    // Frozen oracle: dense transition-matrix iteration (trapezoid rule, 4001
    // nodes) of the killed heat step on (0, pi), evaluated at x = pi/2,
    // t = 0.5. The discrete-kill values sit above exp(-0.5) by O(n^{-1/2}).
    const model::Domain g = model::Domain::interval(0.0, kPi);
    ChernoffStep step(catalog::heat(1.0), g, StepMode::hard_kill);
    const auto f0 = catalog::sine_mode(1);
    const std::vector<Vec> grid{Vec::scalar(kPi / 2)};
    const struct {
        int n;
        double value;
    } frozen[] = {{8, 0.634361}, {32, 0.623344}, {64, 0.619113}, {128, 0.615794}};
    const double exact = std::exp(-0.5);
    double prev_err = 1e9;
    for (const auto& fz : frozen) {
        const SolutionField f = chernoff::chernoff_iterate(step, fz.n, 0.5, f0, grid);
        CHECK_MESSAGE(std::fabs(f.values[0] - fz.value) < 5e-4, "n=", fz.n, " got ",
                      f.values[0], " frozen ", fz.value);
        const double err = std::fabs(f.values[0] - exact);
        CHECK(err < prev_err);
        prev_err = err;
    }
    // Outside the domain the killed solution vanishes identically.
    const SolutionField out = chernoff::chernoff_iterate(step, 8, 0.5, f0,
                                                         {Vec::scalar(-1.0)});
    CHECK(out.values[0] == 0.0);
}

TEST_CASE("killed step families are Chernoff-consistent with the generator") {
    // (F_o(s) sin - sin)/s -> d^2/dx^2 sin = -sin at interior points as s -> 0,
    // for both the cutoff-damped and hard-killed one-step families.
    const model::Domain g = model::Domain::interval(0.0, kPi);
    const auto f0 = catalog::sine_mode(1);
    for (auto mode : {StepMode::soft_cutoff, StepMode::hard_kill}) {
        ChernoffStep step(catalog::heat(1.0), g, mode);
        for (double x0 : {1.0, kPi / 2}) {
            double prev = 1e9;
            for (double s : {0.01, 0.0025, 0.000625}) {
                const double q =
                    (chernoff::apply_step(step, s, f0, Vec::scalar(x0)) - std::sin(x0)) / s;
                const double err = std::fabs(q + std::sin(x0));
                CHECK(err < prev);
                prev = err;
            }
            CHECK(prev < 0.01);
        }
    }
}

TEST_CASE("soft cutoff stays near hard kill deep inside the domain") {
    const model::Domain g = model::Domain::interval(0.0, kPi);
    ChernoffStep soft(catalog::heat(0.5), g, StepMode::soft_cutoff);
    ChernoffStep hard(catalog::heat(0.5), g, StepMode::hard_kill);
    const auto f0 = catalog::sine_mode(1);
    const double vs = chernoff::apply_step(soft, 0.1, f0, Vec::scalar(kPi / 2));
    const double vh = chernoff::apply_step(hard, 0.1, f0, Vec::scalar(kPi / 2));
    CHECK(std::fabs(vs - vh) < 1e-4);
}

TEST_CASE("apply_step in two dimensions") {
    model::CoefficientSet cs;
    cs.dim = 2;
    cs.diffusion = [](const Vec&) { return SymMat::identity(2, 0.5); };
    cs.drift = [](const Vec&) { return Vec::zero(2); };
    cs.killing = [](const Vec&) { return 0.0; };
    cs.a0 = cs.A0 = 0.5;
    ChernoffStep step(cs);
    model::BoundedFunction f0;
    f0.f = [](const Vec& x) { return std::exp(-0.5 * (x[0] * x[0] + x[1] * x[1])); };
    f0.support_radius = 9;
    chernoff::QuadratureSpec quad;
    quad.nodes = 129;
    // Product structure of the isotropic heat step.
    const double got = chernoff::apply_step(step, 0.6, f0, Vec{0.3, -0.2}, quad);
    const double want = oracles::heat_exact(0.5, 0.6, 0.3, {}) *
                        oracles::heat_exact(0.5, 0.6, -0.2, {});
    CHECK(got == doctest::Approx(want).epsilon(1e-9));

    // Anisotropic coefficients still integrate to the sub-Markov mass.
    model::CoefficientSet an = cs;
    an.diffusion = [](const Vec&) {
        SymMat a(2);
        a(0, 0) = 0.8;
        a(1, 1) = 0.3;
        a(0, 1) = a(1, 0) = 0.2;
        return a;
    };
    an.a0 = 0.2;
    an.A0 = 0.9;
    ChernoffStep astep(an);
    model::BoundedFunction one;
    one.f = [](const Vec&) { return 1.0; };
    one.support_radius = 1e9;
    CHECK(chernoff::apply_step(astep, 0.4, one, Vec{0.1, 0.2}, quad) ==
          doctest::Approx(1.0).epsilon(1e-10));

    // Kernel symmetry carries over for constant A in d = 2.
    CHECK(chernoff::gaussian_kernel(an, 0.5, Vec{0.1, 0.3}, Vec{-0.4, 0.2}) ==
          doctest::Approx(chernoff::gaussian_kernel(an, 0.5, Vec{-0.4, 0.2}, Vec{0.1, 0.3}))
              .epsilon(1e-13));
}

TEST_CASE("quadrature guards") {
    model::CoefficientSet cs3;
    cs3.dim = 3;
    cs3.diffusion = [](const Vec&) { return SymMat::identity(3, 0.5); };
    cs3.drift = [](const Vec&) { return Vec::zero(3); };
    cs3.killing = [](const Vec&) { return 0.0; };
    cs3.a0 = cs3.A0 = 0.5;
    ChernoffStep step3(cs3);
    model::BoundedFunction f0;
    f0.f = [](const Vec&) { return 1.0; };
    f0.support_radius = 1;
    CHECK_THROWS_AS(chernoff::apply_step(step3, 0.5, f0, Vec::zero(3)), UnsupportedQuadDim);
    CHECK_THROWS_AS(chernoff::chernoff_iterate(step3, 4, 0.5, f0, {Vec::zero(3)}),
                    UnsupportedQuadDim);

    ChernoffStep heat(catalog::heat(0.5));
    chernoff::QuadratureSpec tiny;
    tiny.budget = 100;
    CHECK_THROWS_AS(chernoff::chernoff_iterate(heat, 64, 1.0, unit_gaussian(),
                                               {Vec::scalar(0)}, tiny),
                    BudgetExceeded);

    CHECK_THROWS_AS(ChernoffStep(catalog::heat(0.5), model::Domain::interval(0, 1),
                                 StepMode::whole_space),
                    ValidationFailed);
    CHECK_THROWS_AS(ChernoffStep(catalog::heat(0.5), std::nullopt, StepMode::hard_kill),
                    ValidationFailed);
}
