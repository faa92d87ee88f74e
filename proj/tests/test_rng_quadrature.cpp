#include "doctest.h"

#include <cmath>

#include "fpk/oracles.hpp"
#include "fpk/quadrature.hpp"
#include "fpk/rng.hpp"

using namespace fpk;

TEST_CASE("philox streams are reproducible and independent") {
    RngStream a(42, StreamPurpose::chain, 3, 17);
    RngStream b(42, StreamPurpose::chain, 3, 17);
    for (int i = 0; i < 64; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream c(42, StreamPurpose::chain, 3, 18);
    RngStream d(43, StreamPurpose::chain, 3, 17);
    RngStream e(42, StreamPurpose::tau, 3, 17);
    RngStream base(42, StreamPurpose::chain, 3, 17);
    base.next_u64();
    CHECK(base.next_u64() != c.next_u64());
    CHECK(c.next_u64() != d.next_u64());
    CHECK(d.next_u64() != e.next_u64());
}

TEST_CASE("uniform lies in (0,1] and has the right first moments") {
    RngStream rng(7, StreamPurpose::probe, 0, 1);
    double sum = 0, sum2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
        sum += u;
        sum2 += u * u;
    }
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
    CHECK(sum2 / n == doctest::Approx(1.0 / 3.0).epsilon(0.01));
}

TEST_CASE("normal moments and antithetic negation") {
    RngStream rng(11, StreamPurpose::probe, 0, 2);
    double sum = 0, sum2 = 0, sum4 = 0;
    const int n = 400000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sum2 += z * z;
        sum4 += z * z * z * z;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.02));
    CHECK(std::fabs(sum / n) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(sum2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(sum4 / n == doctest::Approx(3.0).epsilon(0.05));

    RngStream plain(5, StreamPurpose::chain, 1, 9);
    RngStream anti(5, StreamPurpose::chain, 1, 9);
    anti.set_negate_normals(true);
    for (int i = 0; i < 32; ++i) CHECK(plain.normal() == doctest::Approx(-anti.normal()));
}

TEST_CASE("poisson counts match the mean and variance") {
    RngStream rng(13, StreamPurpose::probe, 0, 3);
    for (double lambda : {0.05, 1.7, 45.0}) {
        double sum = 0, sum2 = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) {
            const double k = static_cast<double>(rng.poisson(lambda));
            sum += k;
            sum2 += k * k;
        }
        const double mean = sum / n;
        const double var = sum2 / n - mean * mean;
        const double se = std::sqrt(lambda / n);
        CHECK(std::fabs(mean - lambda) < 5 * se);
        CHECK(var == doctest::Approx(lambda).epsilon(0.05));
    }
}

TEST_CASE("one-sided stable generator satisfies the Laplace identity") {
    int idx = 0;
    for (double beta : {0.3, 0.5, 0.7}) {
        for (double s : {0.5, 1.0, 2.0}) {
            RngStream rng(17, StreamPurpose::probe, 7, static_cast<std::uint32_t>(idx++));
            const int n = 100000;
            double sum = 0, sum2 = 0;
            for (int i = 0; i < n; ++i) {
                const double v = std::exp(-s * rng.stable_one_sided(beta));
                sum += v;
                sum2 += v * v;
            }
            const double mean = sum / n;
            const double se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
            CHECK(std::fabs(mean - std::exp(-std::pow(s, beta))) < 4 * se);
        }
    }
}

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
    const GaussLegendre& rule = GaussLegendre::get(8);
    // x^15 on [0,1]: exact 1/16.
    double acc = 0;
    for (int q = 0; q < 8; ++q)
        acc += rule.weight_on(q, 0, 1) * std::pow(rule.node_on(q, 0, 1), 15);
    CHECK(acc == doctest::Approx(1.0 / 16.0).epsilon(1e-13));

    const GaussLegendre& big = GaussLegendre::get(257);
    double mass = 0;
    for (int q = 0; q < 257; ++q) {
        const double x = big.node_on(q, -8, 8);
        mass += big.weight_on(q, -8, 8) * std::exp(-0.5 * x * x) / std::sqrt(2 * 3.14159265358979323846);
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("adaptive Gauss-Kronrod hits analytic values") {
    const double two = oracles::integrate_adaptive(
        [](double x) { return std::sin(x); }, 0.0, 3.14159265358979323846, 1e-12);
    CHECK(two == doctest::Approx(2.0).epsilon(1e-12));

    // Integrable endpoint singularity.
    const double v = oracles::integrate_adaptive(
        [](double x) { return 1.0 / std::sqrt(x); }, 1e-12, 1.0, 1e-9);
    CHECK(v == doctest::Approx(2.0).epsilon(1e-5));

    CHECK_THROWS_AS(oracles::integrate_adaptive([](double x) { return std::sin(1e4 * x); }, 0.0,
                                                10.0, 1e-14, 3),
                    ToleranceNotMet);
}
