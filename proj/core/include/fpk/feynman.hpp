#pragma once

#include <cstdint>
#include <vector>

#include "fpk/chernoff.hpp"
#include "fpk/model.hpp"
#include "fpk/rng.hpp"
#include "fpk/solution_field.hpp"

namespace fpk::feynman {

/// Monte Carlo controls. Identical (seed, samples, n, point order) give
/// bitwise identical results regardless of thread count.
struct MCSpec {
    long long samples = 10000;
    std::uint64_t seed = 1;
    bool antithetic = false; // negate Gaussian increments on odd chains
    int batch = 32;          // batch count for batch-means standard errors
};

/// One Monte Carlo realization of the iterated-integral chain.
struct WeightedChain {
    std::vector<Vec> positions; // x_0 .. x_n
    std::vector<Vec> jumps;     // z_1 .. z_n (zero when no jump component)
    double weight = 1;          // product of exp(-(t/n) C) and soft cutoffs
    bool alive = true;          // hard mode: false once the chain exits G
};

/// Runs one chain of n steps to horizon t:
///   x_k = x_{k-1} - (t/n) B(x_{k-1}) - z_k + Normal(0, 2 (t/n) A(x_{k-1})).
/// Hard mode kills when any of x_1..x_n leaves G; soft mode multiplies the
/// weight by cutoff(t/n, x_{k-1}).
WeightedChain sample_chain(const chernoff::ChernoffStep& step, int n, double t, const Vec& x0,
                           RngStream& rng);

/// Mean over chains of weight * f0(x_n) for each evaluation point (hard mode
/// drops dead chains; killed problems carry zero-extended initial data, so a
/// terminal outside G contributes nothing in soft mode too).
SolutionField feynman_estimate(const chernoff::ChernoffStep& step, int n, double t,
                               const model::BoundedFunction& f0, const std::vector<Vec>& points,
                               const MCSpec& mc, int threads = 1);

/// Estimator variant where every chain draws its own horizon before running
/// (the subordination layer feeds tau ~ E^mu_t or s ~ eta_t here). A zero
/// horizon contributes f0(x0) (killed modes: 0 outside G).
SolutionField feynman_estimate_mixed_horizon(
    const chernoff::ChernoffStep& step, int n,
    const std::function<double(std::size_t point, long long chain)>& horizon_fn,
    const model::BoundedFunction& f0, const std::vector<Vec>& points, const MCSpec& mc,
    int threads = 1);

/// Paired-seed comparison of the cutoff-damped and killed estimators on the
/// same chains; the gap should vanish as n grows.
struct SoftHardReport {
    SolutionField soft;
    SolutionField hard;
    std::vector<double> gap;        // soft - hard per point
    std::vector<double> gap_stderr; // batch-means error of the paired gap
};
SoftHardReport soft_vs_hard_compare(const model::Problem& problem, int n, double t,
                                    const std::vector<Vec>& points, const MCSpec& mc,
                                    int threads = 1);

}  // namespace fpk::feynman
