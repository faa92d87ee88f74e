#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fpk/model.hpp"
#include "fpk/solution_field.hpp"
#include "fpk/vec.hpp"

namespace fpk::chernoff {

enum class StepMode { whole_space, soft_cutoff, hard_kill };

/// One-step Chernoff operator family F(t) (whole space), the cutoff-damped
/// family F_o(t) = phi_{s(t)} F(t) E (soft_cutoff), or the G-restricted
/// integrals behind the killed Feynman formula (hard_kill).
struct ChernoffStep {
    model::CoefficientSet coeffs;
    std::optional<model::Domain> domain;
    StepMode mode = StepMode::whole_space;

    ChernoffStep(model::CoefficientSet c, std::optional<model::Domain> d = std::nullopt,
                 StepMode m = StepMode::whole_space)
        : coeffs(std::move(c)), domain(std::move(d)), mode(m) {
        if (mode == StepMode::whole_space && domain)
            throw ValidationFailed("whole_space step takes no domain");
        if (mode != StepMode::whole_space && !domain)
            throw ValidationFailed("killed step modes require a domain");
        if (domain && domain->dim() != coeffs.dim)
            throw ValidationFailed("domain and coefficients disagree on dimension");
    }
};

/// Deterministic-quadrature controls. The Gaussian integral is truncated to a
/// window of half-width `window * sqrt(2 t A0)` around the step mean; tail
/// mass outside is < 1e-15 at the default width.
struct QuadratureSpec {
    int nodes = 257;       // Gauss-Legendre nodes per axis, also tabulation grid size
    double window = 8.0;   // half-width in standard deviations
    int interp_order = 3;  // local interpolation order between tabulation nodes
    double budget = 2.5e8; // kernel-evaluation budget for chernoff_iterate
};

/// Gaussian step kernel
///   p_A(t,x,y) = (4 pi t)^{-d/2} det(A(x))^{-1/2}
///                * exp(-A^{-1}(x)(x-y).(x-y) / (4t)).
double gaussian_kernel(const model::CoefficientSet& coeffs, double t, const Vec& x, const Vec& y);

/// One atom of the compound-Poisson convolution semigroup eta_t expanded as a
/// discrete measure (jump-count series truncated below 1e-14 tail mass).
struct EtaAtom {
    Vec z;
    double w;
};
std::vector<EtaAtom> enumerate_eta_atoms(const model::JumpComponent& jump, double t,
                                         double tail_tol = 1e-14);

/// F(t)phi(x) (mode-dependent) by deterministic quadrature, d <= 2.
///
/// t = 0 returns phi(x) exactly (killed modes: 0 outside G). For t > 0 the
/// value is exp(-t C(x)) * E[phi(Y)], Y ~ Normal(x - t B(x) - z, 2 t A(x))
/// mixed over jump draws z ~ eta_t; soft_cutoff multiplies by cutoff(t,x) and
/// integrates the extension of phi, hard_kill integrates over G only.
double apply_step(const ChernoffStep& step, double t, const model::BoundedFunction& phi,
                  const Vec& x, const QuadratureSpec& quad = {});

/// Same, for an arbitrary callable (used by the iterated evaluator).
double apply_step_fn(const ChernoffStep& step, double t,
                     const std::function<double(const Vec&)>& phi, const Vec& x,
                     const QuadratureSpec& quad = {});

/// n-fold composition [F(t/n)]^n phi evaluated at the requested points
/// (deterministic backend, d = 1). Intermediate iterates are tabulated on the
/// Gauss-Legendre grid and re-read through local cubic interpolation; the
/// final application is evaluated directly at the requested points. The
/// reported std_errors hold the interpolation-error estimate.
SolutionField chernoff_iterate(const ChernoffStep& step, int n, double t,
                               const model::BoundedFunction& phi, const std::vector<Vec>& grid,
                               const QuadratureSpec& quad = {});

}  // namespace fpk::chernoff
