#pragma once

#include <functional>
#include <vector>

#include "fpk/model.hpp"
#include "fpk/subordination_measure.hpp"

namespace fpk::oracles {

/// Adaptive Gauss-Kronrod (7,15) integration with interval bisection.
/// Throws ToleranceNotMet when the interval budget runs out.
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol = 1e-10, int max_intervals = 4000);

/// Gaussian initial profile amplitude * exp(-(x-center)^2 / (2 sigma^2)).
struct GaussianParams {
    double amplitude = 1.0;
    double center = 0.0;
    double sigma = 1.0;
};

/// Closed-form solution of u_t = a u_xx with a Gaussian initial condition.
double heat_exact(double a, double t, double x, const GaussianParams& f0);

/// Dirichlet eigenfunction expansion on an interval: truncated series
/// sum_k c_k exp(-a (k pi / L)^2 t) sin(k pi (x - lo) / L) with coefficients
/// from numerical inner products of f0.
class EigenExpansion {
public:
    static EigenExpansion build_interval(double a, double lo, double hi,
                                         const std::function<double(double)>& f0, int modes);

    double value(double t, double x) const;
    /// Bound on the dropped modes at time t > 0.
    double tail_bound(double t) const;
    /// Max deviation |series(0,x) - f0(x)| over a probe grid.
    double reconstruction_error() const { return reconstruction_error_; }
    int modes() const { return static_cast<int>(coefficients_.size()); }

private:
    double a_ = 1;
    double lo_ = 0, hi_ = 1;
    double f0_sup_ = 0;
    double reconstruction_error_ = 0;
    std::vector<double> coefficients_;
};

double dirichlet_exact(const EigenExpansion& expansion, double t, double x);

/// Quadrature of int_0^inf inner(tau) p^mu(t,tau) dtau for mu = delta_{1/2}
/// (closed-form density, truncated where the half-Gaussian tail is
/// negligible against quad_tol).
double subordinated_oracle(const std::function<double(double)>& inner,
                           const fractional::SubordinationMeasure& mu, double t,
                           double quad_tol = 1e-10);

/// Same against a tabulated density on [0, radius].
double subordinated_oracle(const std::function<double(double)>& inner,
                           const std::function<double(double)>& density, double radius,
                           double quad_tol = 1e-10);

/// Solution values tabulated on a uniform space-time grid (d = 1).
struct SpaceTimeField {
    std::vector<double> times;             // t_0 < t_1 < ... uniform
    std::vector<double> xs;                // uniform, spacing = stencil_h
    std::vector<std::vector<double>> values; // values[time][x]
};

struct ResidualReport {
    double max_abs = 0;
    double rms = 0;
    long long count = 0;
};

/// Residual of the governing equation on the tabulated field: the
/// distributed-order time derivative (or a backward time difference for
/// non-fractional problems) minus the finite-difference/quadrature action of
/// the generator.
ResidualReport generator_residual(const model::Problem& problem, const SpaceTimeField& field,
                                  double stencil_h);

}  // namespace fpk::oracles
