#include "fpk/chernoff.hpp"

#include <algorithm>
#include <cmath>

#include "fpk/quadrature.hpp"

namespace fpk::chernoff {

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Gaussian expectation E[g(Y)], Y ~ N(mean, 2 t A), by Gauss-Legendre on the
/// truncation window; restricted to G in hard mode.
double gauss_expectation_1d(const std::function<double(const Vec&)>& g, double mean, double var2t,
                            double half_width, const model::Domain* hard_domain,
                            const GaussLegendre& rule) {
    double lo = mean - half_width, hi = mean + half_width;
    if (hard_domain) {
        lo = std::max(lo, hard_domain->lo());
        hi = std::min(hi, hard_domain->hi());
        if (!(hi > lo)) return 0;
    }
    const double inv_norm = 1.0 / std::sqrt(2.0 * kPi * var2t);
    double acc = 0;
    const int m = static_cast<int>(rule.nodes.size());
    for (int q = 0; q < m; ++q) {
        const double y = rule.node_on(q, lo, hi);
        const double dev = y - mean;
        acc += rule.weight_on(q, lo, hi) * std::exp(-dev * dev / (2.0 * var2t)) * g(Vec::scalar(y));
    }
    return acc * inv_norm;
}

double gauss_expectation_2d(const std::function<double(const Vec&)>& g, const Vec& mean,
                            const SymMat& cov, double half_width_scale,
                            const model::Domain* hard_domain, const GaussLegendre& rule) {
    const Chol ch = Chol::factor(cov);
    const double norm = 1.0 / (2.0 * kPi * std::sqrt(ch.det()));
    double lo0 = mean[0] - half_width_scale, hi0 = mean[0] + half_width_scale;
    double lo1 = mean[1] - half_width_scale, hi1 = mean[1] + half_width_scale;
    const bool clip_box = hard_domain && hard_domain->kind() == model::DomainKind::box;
    if (clip_box) {
        lo0 = std::max(lo0, hard_domain->lo(0));
        hi0 = std::min(hi0, hard_domain->hi(0));
        lo1 = std::max(lo1, hard_domain->lo(1));
        hi1 = std::min(hi1, hard_domain->hi(1));
        if (!(hi0 > lo0) || !(hi1 > lo1)) return 0;
    }
    const int m = static_cast<int>(rule.nodes.size());
    double acc = 0;
    for (int q0 = 0; q0 < m; ++q0) {
        const double y0 = rule.node_on(q0, lo0, hi0);
        const double w0 = rule.weight_on(q0, lo0, hi0);
        for (int q1 = 0; q1 < m; ++q1) {
            Vec y{y0, rule.node_on(q1, lo1, hi1)};
            if (hard_domain && !clip_box && !hard_domain->contains(y)) continue;
            const Vec dev = y - mean;
            acc += w0 * rule.weight_on(q1, lo1, hi1) *
                   std::exp(-0.5 * ch.inv_quadratic(dev)) * g(y);
        }
    }
    return acc * norm;
}

struct StepEvaluation {
    const ChernoffStep& step;
    double t;
    const QuadratureSpec& quad;
    std::vector<EtaAtom> eta;

    StepEvaluation(const ChernoffStep& s, double time, const QuadratureSpec& q)
        : step(s), t(time), quad(q) {
        if (s.coeffs.jump)
            eta = enumerate_eta_atoms(*s.coeffs.jump, time);
        else
            eta.push_back({Vec::zero(s.coeffs.dim), 1.0});
    }

    double operator()(const std::function<double(const Vec&)>& phi, const Vec& x) const {
        const auto& coeffs = step.coeffs;
        const int d = coeffs.dim;
        if (d > 2) throw UnsupportedQuadDim("deterministic quadrature supports d <= 2");

        const model::Domain* dom = step.domain ? &*step.domain : nullptr;
        if (step.mode == StepMode::hard_kill && !dom->contains(x)) return 0;

        const SymMat a = coeffs.diffusion(x);
        const Vec b = coeffs.drift(x);
        const double c = coeffs.killing(x);
        const double half_width = quad.window * std::sqrt(2.0 * t * coeffs.A0);
        const GaussLegendre& rule = GaussLegendre::get(quad.nodes);
        const model::Domain* hard = step.mode == StepMode::hard_kill ? dom : nullptr;

        const Vec base_mean = x - t * b;
        double acc = 0;
        for (const EtaAtom& za : eta) {
            const Vec mean = base_mean - za.z;
            double part;
            if (d == 1) {
                part = gauss_expectation_1d(phi, mean[0], 2.0 * t * a(0, 0), half_width, hard,
                                            rule);
            } else {
                SymMat cov = a;
                cov *= 2.0 * t;
                part = gauss_expectation_2d(phi, mean, cov, half_width, hard, rule);
            }
            acc += za.w * part;
        }
        double value = std::exp(-t * c) * acc;
        if (step.mode == StepMode::soft_cutoff) value *= model::cutoff(*dom, t, x);
        return value;
    }
};

/// Local Lagrange interpolation of tabulated values on sorted nodes;
/// zero outside the node range.
struct Tabulation {
    std::vector<double> nodes;
    std::vector<double> values;
    int order = 3;

    double operator()(double x) const {
        const auto& xs = nodes;
        if (x < xs.front() || x > xs.back()) return 0;
        const int m = static_cast<int>(xs.size());
        int hi = static_cast<int>(std::lower_bound(xs.begin(), xs.end(), x) - xs.begin());
        int start = std::clamp(hi - (order + 1) / 2, 0, m - order - 1);
        double acc = 0;
        for (int i = start; i <= start + order; ++i) {
            double li = 1;
            for (int j = start; j <= start + order; ++j) {
                if (j == i) continue;
                li *= (x - xs[j]) / (xs[i] - xs[j]);
            }
            acc += li * values[i];
        }
        return acc;
    }

    double with_order(double x, int ord) const {
        Tabulation t{nodes, values, ord};
        return t(x);
    }
};

}  // namespace

double gaussian_kernel(const model::CoefficientSet& coeffs, double t, const Vec& x, const Vec& y) {
    if (!(t > 0)) throw ValidationFailed("gaussian_kernel needs t > 0");
    const SymMat a = coeffs.diffusion(x);
    const Chol ch = Chol::factor(a);
    const double q = ch.inv_quadratic(x - y);
    const double norm = std::pow(4.0 * kPi * t, -0.5 * coeffs.dim) / std::sqrt(ch.det());
    return norm * std::exp(-q / (4.0 * t));
}

std::vector<EtaAtom> enumerate_eta_atoms(const model::JumpComponent& jump, double t,
                                         double tail_tol) {
    const double lt = jump.rate * t;
    // Truncate the Poisson count where the remaining tail is below tail_tol.
    int kmax = 0;
    double cdf = std::exp(-lt);
    double pk = cdf;
    while (1.0 - cdf > tail_tol && kmax < 400) {
        ++kmax;
        pk *= lt / kmax;
        cdf += pk;
    }

    const Vec shift = t * jump.drift_correction;
    std::vector<EtaAtom> out;
    const int dim = jump.atoms.front().y.dim();

    // Convolve the normalized atom law k times. Coinciding sums are merged
    // after every level (an m-atom law has O(k^{m-1}) distinct k-jump sums,
    // not m^k).
    auto merge = [dim](std::vector<EtaAtom>& v) {
        std::sort(v.begin(), v.end(), [dim](const EtaAtom& a, const EtaAtom& b) {
            for (int i = 0; i < dim; ++i)
                if (a.z[i] != b.z[i]) return a.z[i] < b.z[i];
            return false;
        });
        std::vector<EtaAtom> merged;
        merged.reserve(v.size());
        for (const EtaAtom& e : v) {
            bool same = !merged.empty();
            if (same)
                for (int i = 0; i < dim; ++i)
                    same = same && std::fabs(merged.back().z[i] - e.z[i]) <=
                                       1e-12 * (1 + std::fabs(e.z[i]));
            if (same)
                merged.back().w += e.w;
            else
                merged.push_back(e);
        }
        v = std::move(merged);
    };

    std::vector<EtaAtom> conv{{Vec::zero(dim), 1.0}};
    double pois = std::exp(-lt);
    for (int k = 0; k <= kmax; ++k) {
        if (k > 0) {
            pois *= lt / k;
            std::vector<EtaAtom> next;
            next.reserve(conv.size() * jump.atoms.size());
            for (const EtaAtom& e : conv)
                for (const auto& a : jump.atoms)
                    if (e.w > tail_tol * 1e-3) next.push_back({e.z + a.y, e.w * a.p});
            merge(next);
            conv = std::move(next);
            if (conv.size() > 200000)
                throw BudgetExceeded("jump-count expansion too large; reduce rate * t");
        }
        for (const EtaAtom& e : conv) {
            if (pois * e.w > tail_tol * 1e-3 || k == 0)
                out.push_back({e.z - shift, pois * e.w});
        }
    }
    return out;
}

double apply_step_fn(const ChernoffStep& step, double t,
                     const std::function<double(const Vec&)>& phi, const Vec& x,
                     const QuadratureSpec& quad) {
    if (t < 0) throw ValidationFailed("apply_step needs t >= 0");
    if (t == 0) {
        if (step.mode != StepMode::whole_space && !step.domain->contains(x)) return 0;
        return phi(x);
    }
    StepEvaluation eval(step, t, quad);
    if (step.mode == StepMode::soft_cutoff)
        return eval(model::extend(*step.domain, phi), x);
    return eval(phi, x);
}

double apply_step(const ChernoffStep& step, double t, const model::BoundedFunction& phi,
                  const Vec& x, const QuadratureSpec& quad) {
    return apply_step_fn(step, t, phi.f, x, quad);
}

SolutionField chernoff_iterate(const ChernoffStep& step, int n, double t,
                               const model::BoundedFunction& phi, const std::vector<Vec>& grid,
                               const QuadratureSpec& quad) {
    if (step.coeffs.dim != 1)
        throw UnsupportedQuadDim("chernoff_iterate deterministic backend requires d = 1");
    if (n < 1) throw ValidationFailed("chernoff_iterate needs n >= 1");
    if (!(t > 0)) throw ValidationFailed("chernoff_iterate needs t > 0");
    const double s = t / n;

    // Tabulation window.
    double lo, hi;
    if (step.mode == StepMode::whole_space) {
        lo = -phi.support_radius;
        hi = phi.support_radius;
        for (const Vec& g : grid) {
            lo = std::min(lo, g[0]);
            hi = std::max(hi, g[0]);
        }
        const double diff_pad = quad.window * std::sqrt(2.0 * t * step.coeffs.A0);
        double bmax = 0;
        for (int i = 0; i <= 64; ++i) {
            const double xx = lo - diff_pad + (hi - lo + 2 * diff_pad) * i / 64.0;
            bmax = std::max(bmax, std::fabs(step.coeffs.drift(Vec::scalar(xx))[0]));
        }
        const double pad = diff_pad + t * bmax * 1.5;
        lo -= pad;
        hi += pad;
    } else {
        lo = step.domain->lo();
        hi = step.domain->hi();
    }

    const int m = quad.nodes;
    StepEvaluation eval(step, s, quad);
    const double work = static_cast<double>(n) * m * quad.nodes *
                        static_cast<double>(eval.eta.size());
    if (work > quad.budget)
        throw BudgetExceeded("chernoff_iterate work estimate " + std::to_string(work) +
                             " exceeds budget " + std::to_string(quad.budget));

    const GaussLegendre& rule = GaussLegendre::get(m);
    Tabulation tab;
    tab.order = quad.interp_order;
    tab.nodes.resize(static_cast<std::size_t>(m));
    tab.values.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        tab.nodes[i] = rule.node_on(i, lo, hi);
        tab.values[i] = phi.f(Vec::scalar(tab.nodes[i]));
    }

    const bool soft = step.mode == StepMode::soft_cutoff;
    auto level_input = [&](const Tabulation& tb) -> std::function<double(const Vec&)> {
        if (soft) {
            return model::extend(*step.domain,
                                 [&tb](const Vec& y) { return tb(y[0]); });
        }
        return [&tb](const Vec& y) { return tb(y[0]); };
    };

    // Levels 1..n-1 tabulated; the final application is evaluated directly at
    // the requested points. eval() already folds in the soft-mode cutoff.
    std::vector<double> next(static_cast<std::size_t>(m));
    for (int level = 1; level < n; ++level) {
        auto in = level_input(tab);
        for (int i = 0; i < m; ++i) next[i] = eval(in, Vec::scalar(tab.nodes[i]));
        tab.values = next;
    }

    // Interpolation-error estimate: cubic vs 5-point stencil at node midpoints.
    double interp_est = 0;
    if (n > 1) {
        for (int i = 0; i + 1 < m; i += std::max(1, m / 64)) {
            const double mid = 0.5 * (tab.nodes[i] + tab.nodes[i + 1]);
            interp_est = std::max(interp_est,
                                  std::fabs(tab(mid) - tab.with_order(mid, std::min(5, m - 1))));
        }
    }

    auto in = level_input(tab);
    SolutionField field;
    field.dim = 1;
    field.backend = "quad";
    field.n = n;
    field.samples = 0;
    field.seed = 0;
    field.points = grid;
    field.values.reserve(grid.size());
    for (const Vec& g : grid) {
        double v;
        if (n == 1) {
            v = apply_step(step, t, phi, g, quad);
        } else {
            v = eval(in, g);
            if (step.mode != StepMode::whole_space && !step.domain->contains(g)) v = 0;
        }
        field.values.push_back(v);
    }
    field.std_errors.assign(grid.size(), interp_est);
    return field;
}

}  // namespace fpk::chernoff
