#pragma once

#include <functional>
#include <span>
#include <vector>

#include "fpk/feynman.hpp"
#include "fpk/model.hpp"
#include "fpk/rng.hpp"
#include "fpk/solution_field.hpp"
#include "fpk/subordination_measure.hpp"

namespace fpk::fractional {

/// Caputo derivative of order beta on a uniform time grid (L1 scheme):
/// d_m approximates (1/Gamma(1-beta)) int_0^{t_m} u'(r) (t_m - r)^{-beta} dr.
/// First entry is 0.
std::vector<double> caputo(std::span<const double> u, double dt, double beta);

/// Riemann-Liouville derivative: backward difference of the exactly
/// integrated piecewise-linear memory integral. First entry is 0.
std::vector<double> riemann_liouville(std::span<const double> u, double dt, double beta);

/// Distributed-order derivative: weighted sum of Caputo derivatives over the
/// atoms of mu.
std::vector<double> distributed_derivative(std::span<const double> u, double dt,
                                           const SubordinationMeasure& mu);

/// Marginal density p^mu(t, tau) of the inverse subordinator E^mu_t.
/// Closed form (pi t)^{-1/2} exp(-tau^2/(4t)) for mu = delta_{1/2}; other
/// measures need the Monte Carlo overload.
double inverse_subordinator_density(const SubordinationMeasure& mu, double t, double tau);

/// Budget for the general-measure density estimate (central difference of the
/// first-passage CDF P(D^mu_tau <= t) with common random numbers).
struct DensityBudget {
    long long samples = 200000;
    double rel_step = 0.05;  // CDF difference half-width, relative to tau
    double abs_step = 1e-3;  // floor for the half-width
    double tol = 0.02;       // absolute stderr tolerance on the density
};
double inverse_subordinator_density(const SubordinationMeasure& mu, double t, double tau,
                                    const DensityBudget& budget, std::uint64_t seed);

/// One draw of the mixture subordinator D^mu at a fixed time:
/// sum_i w_i^{1/beta_i} tau^{1/beta_i} S_i with independent one-sided stable
/// draws S_i.
double sample_mixture_subordinator_at(const SubordinationMeasure& mu, double tau, RngStream& rng);

/// One draw of E^mu_t. mu = delta_{1/2} uses the exact half-Gaussian
/// |xi| sqrt(2t); general measures walk the subordinator path forward with
/// exact stable increments on a fine grid (first-passage bias is at most one
/// grid cell; resolution = 0 picks scale/512 automatically).
double sample_inverse_subordinator(const SubordinationMeasure& mu, double t, RngStream& rng,
                                   double resolution = 0);

/// Smallest radius R with int_R^inf p^mu(T, tau) dtau < eps; valid for every
/// t <= T by tail monotonicity.
double truncation_radius(const SubordinationMeasure& mu, double T, double eps,
                         long long mc_budget = 400000, std::uint64_t seed = 99);

/// Tail mass int_R^inf p^mu(t, tau) dtau (closed form for delta_{1/2}).
double tail_mass_half(double t, double radius);

/// Outer time-integration controls for the subordinated solution.
struct TauSpec {
    enum class Kind { automatic, quadrature, monte_carlo };
    Kind kind = Kind::automatic;  // automatic: quadrature iff mu = delta_{1/2}
    int nodes = 48;               // Gauss-Legendre nodes for the quadrature route
    double tail_eps = 1e-9;       // tail mass dropped by truncation
    double resolution = 0;        // forward-walk resolution for general mu
};

/// Deterministic tau-mixture against p^mu(t, .): nodes/weights on
/// [0, truncation radius], or sampled E^mu_t values for the MC route.
struct TimeMixture {
    std::vector<double> tau_nodes;
    std::vector<double> tau_weights;
    std::vector<double> tau_samples;
    bool deterministic() const { return !tau_nodes.empty(); }
};
TimeMixture build_time_mixture(const SubordinationMeasure& mu, double t, const TauSpec& spec,
                               long long mc_samples, std::uint64_t seed);

/// Approximant f_n(t) = int_0^inf F^n(tau/n) f0 p^mu(t, tau) dtau of the
/// distributed-order solution, evaluated at the problem's horizon. The outer
/// integral runs by Gauss-Legendre against the closed-form density
/// (mu = delta_{1/2}) or by sampling tau ~ E^mu_t per chain; the inner
/// evaluation is the weighted-chain estimator.
SolutionField subordinated_solution(const model::Problem& problem, int n,
                                    const std::vector<Vec>& points, const feynman::MCSpec& mc,
                                    const TauSpec& tau = {}, int threads = 1);

/// Draws s ~ eta_t for a known convolution semigroup.
using EtaSampler = std::function<double(double t, RngStream&)>;

/// Subordinate-semigroup approximant: mixes F^n(s/n) f0 against eta_t by
/// Monte Carlo over s-draws.
SolutionField subordinate_semigroup(const chernoff::ChernoffStep& step, const EtaSampler& eta,
                                    int n, double t, const model::BoundedFunction& f0,
                                    const std::vector<Vec>& points, const feynman::MCSpec& mc,
                                    int threads = 1);

}  // namespace fpk::fractional
