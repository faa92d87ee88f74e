#include "fpk/fractional.hpp"

#include <algorithm>
#include <cmath>

#include "fpk/quadrature.hpp"

namespace fpk::fractional {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_uniform(std::span<const double> u, double dt) {
    if (u.size() < 2) throw BadGrid("time series needs at least two nodes");
    if (!(dt > 0)) throw BadGrid("time series needs positive grid spacing");
}

void require_beta(double beta) {
    if (!(beta > 0 && beta < 1)) throw BadGrid("fractional order beta must lie in (0,1)");
}

}  // namespace

std::vector<double> caputo(std::span<const double> u, double dt, double beta) {
    require_uniform(u, dt);
    require_beta(beta);
    const std::size_t m = u.size();
    // a_k = (k+1)^{1-beta} - k^{1-beta}
    std::vector<double> a(m);
    for (std::size_t k = 0; k < m; ++k)
        a[k] = std::pow(k + 1.0, 1.0 - beta) - std::pow(static_cast<double>(k), 1.0 - beta);
    const double scale = std::pow(dt, -beta) / std::tgamma(2.0 - beta);
    std::vector<double> d(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) {
        double acc = 0;
        for (std::size_t j = 0; j < i; ++j) acc += a[i - 1 - j] * (u[j + 1] - u[j]);
        d[i] = scale * acc;
    }
    return d;
}

std::vector<double> riemann_liouville(std::span<const double> u, double dt, double beta) {
    require_uniform(u, dt);
    require_beta(beta);
    const std::size_t m = u.size();
    // Memory integral I(t_i) = (1/Gamma(1-beta)) int_0^{t_i} u(r)(t_i - r)^{-beta} dr
    // with u piecewise linear; per-subinterval antiderivatives in closed form.
    std::vector<double> p1(m + 1), p2(m + 1); // k^{1-beta}, k^{2-beta}
    for (std::size_t k = 0; k <= m; ++k) {
        p1[k] = std::pow(static_cast<double>(k), 1.0 - beta);
        p2[k] = std::pow(static_cast<double>(k), 2.0 - beta);
    }
    const double g1 = 1.0 / ((1.0 - beta) * std::tgamma(1.0 - beta));
    const double g2 = 1.0 / ((2.0 - beta) * std::tgamma(1.0 - beta));
    std::vector<double> mem(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) {
        double acc = 0;
        for (std::size_t j = 0; j < i; ++j) {
            const std::size_t k = i - j; // s1 = k dt, s0 = (k-1) dt
            const double d1 = p1[k] - p1[k - 1];
            const double d2 = p2[k] - p2[k - 1];
            const double du = u[j + 1] - u[j];
            acc += u[j] * g1 * d1 + du * (g1 * static_cast<double>(k) * d1 - g2 * d2);
        }
        mem[i] = std::pow(dt, 1.0 - beta) * acc;
    }
    std::vector<double> d(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) d[i] = (mem[i] - mem[i - 1]) / dt;
    return d;
}

std::vector<double> distributed_derivative(std::span<const double> u, double dt,
                                           const SubordinationMeasure& mu) {
    mu.validate();
    std::vector<double> total(u.size(), 0.0);
    for (const auto& atom : mu.atoms) {
        const std::vector<double> part = caputo(u, dt, atom.beta);
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += atom.weight * part[i];
    }
    return total;
}

double inverse_subordinator_density(const SubordinationMeasure& mu, double t, double tau) {
    if (!(t > 0)) throw ValidationFailed("inverse subordinator density needs t > 0");
    if (tau < 0) return 0;
    if (!mu.is_half())
        throw ValidationFailed(
            "closed-form density only for mu = delta_{1/2}; use the Monte Carlo overload");
    return std::exp(-tau * tau / (4.0 * t)) / std::sqrt(kPi * t);
}

double sample_mixture_subordinator_at(const SubordinationMeasure& mu, double tau,
                                      RngStream& rng) {
    double d = 0;
    for (std::size_t i = 0; i < mu.atoms.size(); ++i)
        d += mu.component_scale(i) * std::pow(tau, 1.0 / mu.atoms[i].beta) *
             rng.stable_one_sided(mu.atoms[i].beta);
    return d;
}

double inverse_subordinator_density(const SubordinationMeasure& mu, double t, double tau,
                                    const DensityBudget& budget, std::uint64_t seed) {
    if (!(t > 0)) throw ValidationFailed("inverse subordinator density needs t > 0");
    if (mu.is_half()) return inverse_subordinator_density(mu, t, tau);
    if (tau < 0) return 0;
    const double h = std::max(budget.abs_step, budget.rel_step * tau);
    const double lo = std::max(tau - h, 0.0);
    const double hi = tau + h;
    // p(tau) = -d/dtau P(D^mu_tau <= t); central difference with common draws.
    long long in_window = 0;
    RngStream rng(seed, StreamPurpose::tau, 0, 0);
    for (long long i = 0; i < budget.samples; ++i) {
        double d_lo = 0, d_hi = 0;
        for (std::size_t a = 0; a < mu.atoms.size(); ++a) {
            const double s = rng.stable_one_sided(mu.atoms[a].beta);
            const double c = mu.component_scale(a);
            const double inv_beta = 1.0 / mu.atoms[a].beta;
            d_lo += c * std::pow(lo, inv_beta) * s;
            d_hi += c * std::pow(hi, inv_beta) * s;
        }
        // D is nondecreasing in tau along common draws.
        if (d_lo <= t && d_hi > t) ++in_window;
    }
    const double f = static_cast<double>(in_window) / static_cast<double>(budget.samples);
    const double width = hi - lo;
    const double density = f / width;
    const double se = std::sqrt(std::max(f * (1.0 - f), 1e-300) /
                                static_cast<double>(budget.samples)) /
                      width;
    if (se > budget.tol)
        throw InsufficientBudget("density stderr " + std::to_string(se) + " exceeds tolerance " +
                                 std::to_string(budget.tol));
    return density;
}

namespace {

/// Typical E^mu_t scale: the tau where the deterministic skeleton
/// sum_i c_i tau^{1/beta_i} reaches t.
double mixture_scale(const SubordinationMeasure& mu, double t) {
    auto skeleton = [&](double tau) {
        double s = 0;
        for (std::size_t i = 0; i < mu.atoms.size(); ++i)
            s += mu.component_scale(i) * std::pow(tau, 1.0 / mu.atoms[i].beta);
        return s;
    };
    double hi = 1.0;
    while (skeleton(hi) < t && hi < 1e12) hi *= 2;
    double lo = 0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (skeleton(mid) < t ? lo : hi) = mid;
    }
    return hi;
}

}  // namespace

double sample_inverse_subordinator(const SubordinationMeasure& mu, double t, RngStream& rng,
                                   double resolution) {
    mu.validate();
    if (t <= 0) return 0;
    if (mu.is_half()) {
        const double xi = rng.normal();
        return std::fabs(xi) * std::sqrt(2.0 * t);
    }
    double step = resolution > 0 ? resolution : mixture_scale(mu, t) / 512.0;
    // Forward walk with exact stable increments; each component contributes
    // c_i * step^{1/beta_i} * S_i per cell. First-passage bias <= one cell.
    double tau = 0, d = 0;
    long iter = 0;
    while (d <= t) {
        double inc = 0;
        for (std::size_t i = 0; i < mu.atoms.size(); ++i)
            inc += mu.component_scale(i) * std::pow(step, 1.0 / mu.atoms[i].beta) *
                   rng.stable_one_sided(mu.atoms[i].beta);
        d += inc;
        tau += step;
        if (++iter % 4096 == 0) step *= 2; // far tail: coarsen rather than stall
    }
    return std::max(tau - 0.5 * step, 0.0);
}

double tail_mass_half(double t, double radius) {
    return std::erfc(radius / (2.0 * std::sqrt(t)));
}

double truncation_radius(const SubordinationMeasure& mu, double T, double eps,
                         long long mc_budget, std::uint64_t seed) {
    mu.validate();
    if (!(T > 0)) throw ValidationFailed("truncation_radius needs T > 0");
    if (!(eps > 0)) throw ValidationFailed("truncation_radius needs eps > 0");
    if (eps >= 1) return 0;

    if (mu.is_half()) {
        double hi = std::sqrt(T);
        while (tail_mass_half(T, hi) >= eps && hi < 1e9) hi *= 2;
        double lo = 0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (tail_mass_half(T, mid) >= eps ? lo : hi) = mid;
        }
        return hi;
    }

    // Monte Carlo tail P(E^mu_T >= R) = P(D^mu_R <= T) with common draws;
    // the indicator is nonincreasing in R pointwise, so the search is monotone.
    if (eps < 25.0 / static_cast<double>(mc_budget))
        throw InsufficientBudget("tail level " + std::to_string(eps) +
                                 " unresolvable with mc_budget " + std::to_string(mc_budget));
    std::vector<std::vector<double>> draws(mu.atoms.size());
    RngStream rng(seed, StreamPurpose::tau, 1, 0);
    for (auto& v : draws) v.reserve(static_cast<std::size_t>(mc_budget));
    for (long long i = 0; i < mc_budget; ++i)
        for (std::size_t a = 0; a < mu.atoms.size(); ++a)
            draws[a].push_back(rng.stable_one_sided(mu.atoms[a].beta));

    auto tail = [&](double radius) {
        long long count = 0;
        for (long long i = 0; i < mc_budget; ++i) {
            double d = 0;
            for (std::size_t a = 0; a < mu.atoms.size(); ++a)
                d += mu.component_scale(a) * std::pow(radius, 1.0 / mu.atoms[a].beta) *
                     draws[a][static_cast<std::size_t>(i)];
            if (d <= T) ++count;
        }
        const double p = static_cast<double>(count) / static_cast<double>(mc_budget);
        const double se =
            std::sqrt(std::max(p * (1 - p), 1.0 / static_cast<double>(mc_budget)) /
                      static_cast<double>(mc_budget));
        return p + 3.0 * se; // conservative upper confidence bound
    };
    double hi = mixture_scale(mu, T);
    int doublings = 0;
    while (tail(hi) >= eps) {
        hi *= 2;
        if (++doublings > 60)
            throw InsufficientBudget("tail search did not converge; raise mc_budget");
    }
    double lo = hi / 2;
    for (int it = 0; it < 30; ++it) {
        const double mid = 0.5 * (lo + hi);
        (tail(mid) >= eps ? lo : hi) = mid;
    }
    return hi;
}

TimeMixture build_time_mixture(const SubordinationMeasure& mu, double t, const TauSpec& spec,
                               long long mc_samples, std::uint64_t seed) {
    mu.validate();
    TimeMixture mix;
    const bool quad_route = spec.kind == TauSpec::Kind::quadrature ||
                            (spec.kind == TauSpec::Kind::automatic && mu.is_half());
    if (quad_route) {
        if (!mu.is_half())
            throw ValidationFailed(
                "deterministic tau quadrature requires mu = delta_{1/2} (closed-form density)");
        const double radius = truncation_radius(mu, t, spec.tail_eps);
        const GaussLegendre& rule = GaussLegendre::get(spec.nodes);
        double mass = 0;
        for (int q = 0; q < spec.nodes; ++q) {
            const double tau = rule.node_on(q, 0.0, radius);
            const double w = rule.weight_on(q, 0.0, radius) *
                             inverse_subordinator_density(mu, t, tau);
            mix.tau_nodes.push_back(tau);
            mix.tau_weights.push_back(w);
            mass += w;
        }
        if (mass > 1.0 + 1e-8)
            throw ValidationFailed("tau quadrature mass " + std::to_string(mass) + " exceeds 1");
        return mix;
    }
    mix.tau_samples.reserve(static_cast<std::size_t>(mc_samples));
    for (long long j = 0; j < mc_samples; ++j) {
        RngStream rng(seed, StreamPurpose::tau, 0, static_cast<std::uint32_t>(j));
        mix.tau_samples.push_back(sample_inverse_subordinator(mu, t, rng, spec.resolution));
    }
    return mix;
}

namespace {

std::uint64_t derived_seed(std::uint64_t seed, int k) {
    return seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(k + 1);
}

chernoff::ChernoffStep step_for(const model::Problem& problem) {
    if (problem.domain)
        return chernoff::ChernoffStep(problem.coeffs, problem.domain,
                                      chernoff::StepMode::hard_kill);
    return chernoff::ChernoffStep(problem.coeffs, std::nullopt,
                                  chernoff::StepMode::whole_space);
}

}  // namespace

SolutionField subordinated_solution(const model::Problem& problem, int n,
                                    const std::vector<Vec>& points, const feynman::MCSpec& mc,
                                    const TauSpec& tau, int threads) {
    if (!problem.mu) throw ValidationFailed("subordinated_solution needs problem.fractional");
    const SubordinationMeasure& mu = *problem.mu;
    const double t = problem.horizon;
    const chernoff::ChernoffStep step = step_for(problem);

    SolutionField field;
    field.dim = problem.coeffs.dim;
    field.points = points;
    field.n = n;
    field.seed = mc.seed;

    if (t <= 0) {
        field.backend = "exact";
        field.samples = 0;
        for (const Vec& p : points) {
            const bool inside = !problem.domain || problem.domain->contains(p);
            field.values.push_back(inside ? problem.initial.f(p) : 0.0);
            field.std_errors.push_back(0.0);
        }
        return field;
    }

    const bool quad_route = tau.kind == TauSpec::Kind::quadrature ||
                            (tau.kind == TauSpec::Kind::automatic && mu.is_half());
    if (quad_route) {
        const TimeMixture mix = build_time_mixture(mu, t, tau, 0, mc.seed);
        field.backend = "mc,tau-quad";
        field.samples = mc.samples;
        std::vector<double> acc(points.size(), 0.0), var(points.size(), 0.0);
        for (std::size_t q = 0; q < mix.tau_nodes.size(); ++q) {
            feynman::MCSpec node_mc = mc;
            node_mc.seed = derived_seed(mc.seed, static_cast<int>(q));
            const SolutionField inner = feynman::feynman_estimate(
                step, n, mix.tau_nodes[q], problem.initial, points, node_mc, threads);
            for (std::size_t p = 0; p < points.size(); ++p) {
                acc[p] += mix.tau_weights[q] * inner.values[p];
                const double se = mix.tau_weights[q] * inner.std_errors[p];
                var[p] += se * se;
            }
        }
        for (std::size_t p = 0; p < points.size(); ++p) {
            field.values.push_back(acc[p]);
            field.std_errors.push_back(std::sqrt(var[p]));
        }
        return field;
    }

    // MC route: each chain draws its own horizon tau ~ E^mu_t.
    auto horizon = [&mu, t, &mc, &tau](std::size_t point, long long chain) {
        RngStream rng(mc.seed, StreamPurpose::tau, static_cast<std::uint32_t>(point),
                      static_cast<std::uint32_t>(chain));
        return sample_inverse_subordinator(mu, t, rng, tau.resolution);
    };
    SolutionField out =
        feynman::feynman_estimate_mixed_horizon(step, n, horizon, problem.initial, points, mc,
                                                threads);
    out.backend = "mc,tau-mc";
    return out;
}

SolutionField subordinate_semigroup(const chernoff::ChernoffStep& step, const EtaSampler& eta,
                                    int n, double t, const model::BoundedFunction& f0,
                                    const std::vector<Vec>& points, const feynman::MCSpec& mc,
                                    int threads) {
    auto horizon = [&eta, t, &mc](std::size_t point, long long chain) {
        RngStream rng(mc.seed, StreamPurpose::subordinate, static_cast<std::uint32_t>(point),
                      static_cast<std::uint32_t>(chain));
        return eta(t, rng);
    };
    SolutionField out =
        feynman::feynman_estimate_mixed_horizon(step, n, horizon, f0, points, mc, threads);
    out.backend = "mc,subordinate";
    return out;
}

}  // namespace fpk::fractional
