#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fpk/errors.hpp"
#include "fpk/rng.hpp"
#include "fpk/subordination_measure.hpp"
#include "fpk/vec.hpp"

namespace fpk::model {

/// One atom of a discrete jump law.
struct JumpAtom {
    Vec y;
    double p;
};

/// Finite-intensity (compound Poisson) jump component of a generator.
///
/// The associated convolution semigroup eta_t is the law of
///   sum_{j<=K} Y_j - t * drift_correction,   K ~ Poisson(rate * t),
/// where drift_correction = integral of y/(1+|y|^2) against the intensity
/// measure. It is a probability measure for every t.
struct JumpComponent {
    double rate = 0;             // jumps per unit time (lambda)
    std::vector<JumpAtom> atoms; // jump law, normalized to total mass 1
    Vec drift_correction;        // compensator term, precomputed

    /// Samples the jump law (not the compound sum).
    Vec sample_jump(RngStream& rng) const;
};

/// Builds a compound-Poisson component; normalizes the atom masses and
/// precomputes the compensator drift.
JumpComponent make_compound_poisson(double rate, std::vector<JumpAtom> atoms);

/// Diffusion / drift / killing coefficient fields with ellipticity bounds.
struct CoefficientSet {
    int dim = 1;
    std::function<SymMat(const Vec&)> diffusion; // A(x), symmetric positive definite
    std::function<Vec(const Vec&)> drift;        // B(x)
    std::function<double(const Vec&)> killing;   // C(x) >= 0
    double a0 = 0;                               // lower ellipticity bound
    double A0 = 0;                               // upper ellipticity bound
    std::optional<JumpComponent> jump;
    std::string name = "custom";
};

/// Spot-check result for the structural coefficient invariants.
struct CoefficientCheck {
    bool passed = true;
    std::string failure; // names the violated invariant and the probe
    double worst_ellipticity_low = 1e300;
    double worst_ellipticity_high = -1e300;
    double worst_asymmetry = 0;
    double worst_killing = 0;
};

/// Randomized probes of C >= 0, symmetry of A, and the ellipticity sandwich
/// a0|z|^2 <= z.A(x)z <= A0|z|^2 inside |x| <= radius.
CoefficientCheck check_coefficients(const CoefficientSet& coeffs, int probes, double radius,
                                    std::uint64_t seed);

enum class DomainKind { interval, box, ball };

/// Bounded domain with closed-form signed distance, the interior shrinkings
/// G_{s(t)} with s(t) = t^gamma, and a reflection rule for the extension
/// operator. The cutoff profile is the quintic smoothstep composed with
/// dist(x, boundary)/s(t): value 1 on G_{s(t)}, 0 outside G, C^2 in x.
class Domain {
public:
    static Domain interval(double lo, double hi, double gamma = 1.5);
    static Domain box(const Vec& lo, const Vec& hi, double gamma = 1.5);
    static Domain ball(const Vec& center, double radius, double gamma = 1.5);

    DomainKind kind() const { return kind_; }
    int dim() const { return dim_; }
    double gamma() const { return gamma_; }

    /// s(t) = t^gamma; s(t)/t -> 0 as t -> 0 since gamma > 1.
    double shrink(double t) const;

    /// Distance to the boundary, positive inside G.
    double signed_dist(const Vec& x) const;
    bool contains(const Vec& x) const { return signed_dist(x) > 0; }

    double inradius() const { return inradius_; }
    double diameter() const;

    /// Width of the exterior band carrying the extension; <= inradius.
    double extension_delta() const { return delta_; }
    void set_extension_delta(double d);

    /// Reflection of an exterior point across the boundary, defined on the
    /// delta-neighborhood of G; interior points map to themselves.
    Vec reflect(const Vec& x) const;

    /// Uniform point of the closure (for probe generation).
    Vec sample_point(RngStream& rng) const;

    double lo(int i = 0) const { return lo_[i]; }
    double hi(int i = 0) const { return hi_[i]; }
    const Vec& center() const { return center_; }
    double radius() const { return radius_; }

private:
    Domain() = default;
    DomainKind kind_ = DomainKind::interval;
    int dim_ = 1;
    Vec lo_, hi_;   // interval / box
    Vec center_;    // ball
    double radius_ = 0;
    double gamma_ = 1.5;
    double inradius_ = 0;
    double delta_ = 0;
};

/// Quintic smoothstep 6u^5 - 15u^4 + 10u^3 clamped to [0,1].
double smoothstep(double u);

/// Cutoff value phi_{s(t)}(x): 1 on G_{s(t)}, 0 outside G, monotone in the
/// boundary distance, continuous in t.
double cutoff(const Domain& domain, double t, const Vec& x);

/// Extension operator: agrees with phi on the closure of G, linear,
/// sup-norm preserving; built by even reflection across the boundary times a
/// taper equal to 1 on the closure (and on the inner half of the exterior
/// band) and supported in the delta-neighborhood.
std::function<double(const Vec&)> extend(const Domain& domain,
                                         std::function<double(const Vec&)> phi);

/// Bounded function with a declared support / decay radius.
struct BoundedFunction {
    std::function<double(const Vec&)> f;
    double support_radius = 10.0;
    std::string name = "f";

    double operator()(const Vec& x) const { return f(x); }
};

/// Full problem definition. No domain means a whole-space Cauchy problem;
/// a subordination measure makes the time derivative distributed-order.
struct Problem {
    CoefficientSet coeffs;
    std::optional<Domain> domain;
    BoundedFunction initial;
    std::optional<fractional::SubordinationMeasure> mu;
    double horizon = 1.0;
};

/// Result of the large-jump / censored-jump domain checks.
struct JumpDomainReport {
    bool passed = true;
    double max_mass = 0;   // worst jump mass landing in the forbidden shell
    Vec worst_probe;       // probe point realizing it
    bool censored_checked = false;
    double max_censored_mass = 0;
    Vec worst_censored_probe;
};

/// Checks that jumps from probe points in G cannot land in the shell
/// U \ closure(G) with U the delta-neighborhood of G (mass below tol);
/// optionally also the censored condition |y| <= dist(x, boundary).
JumpDomainReport check_jump_domain(const CoefficientSet& coeffs, const Domain& domain,
                                   double neighborhood_delta, bool censored = false,
                                   int probes = 256, double tol = 1e-12,
                                   std::uint64_t seed = 12345);

/// Same check, throwing ValidationFailed naming the probe and mass.
JumpDomainReport validate_jump_domain(const CoefficientSet& coeffs, const Domain& domain,
                                      double neighborhood_delta, bool censored = false,
                                      int probes = 256, double tol = 1e-12,
                                      std::uint64_t seed = 12345);

}  // namespace fpk::model
