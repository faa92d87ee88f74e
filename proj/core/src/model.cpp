#include "fpk/model.hpp"

#include <algorithm>
#include <cmath>

namespace fpk::model {

Vec JumpComponent::sample_jump(RngStream& rng) const {
    const double u = rng.uniform();
    double acc = 0;
    for (const auto& a : atoms) {
        acc += a.p;
        if (u <= acc) return a.y;
    }
    return atoms.back().y;
}

JumpComponent make_compound_poisson(double rate, std::vector<JumpAtom> atoms) {
    if (!(rate > 0) || !std::isfinite(rate))
        throw ValidationFailed("jump rate must be finite and positive");
    if (atoms.empty()) throw ValidationFailed("jump law needs at least one atom");
    double mass = 0;
    const int dim = atoms.front().y.dim();
    for (const auto& a : atoms) {
        if (!(a.p > 0)) throw ValidationFailed("jump atom mass must be positive");
        if (a.y.dim() != dim) throw ValidationFailed("jump atoms of mixed dimension");
        if (a.y.norm2() == 0) throw ValidationFailed("jump atom at the origin");
        mass += a.p;
    }
    JumpComponent jc;
    jc.rate = rate;
    jc.atoms = std::move(atoms);
    for (auto& a : jc.atoms) a.p /= mass;
    jc.drift_correction = Vec::zero(dim);
    for (const auto& a : jc.atoms)
        jc.drift_correction += (rate * a.p / (1.0 + a.y.norm2())) * a.y;
    return jc;
}

CoefficientCheck check_coefficients(const CoefficientSet& coeffs, int probes, double radius,
                                    std::uint64_t seed) {
    CoefficientCheck r;
    RngStream rng(seed, StreamPurpose::probe, 0, 0);
    for (int k = 0; k < probes; ++k) {
        Vec x(coeffs.dim), z(coeffs.dim);
        for (int i = 0; i < coeffs.dim; ++i) {
            x[i] = radius * (2.0 * rng.uniform() - 1.0);
            z[i] = rng.normal();
        }
        const double zz = z.norm2();
        if (zz == 0) continue;

        const double c = coeffs.killing(x);
        r.worst_killing = std::min(r.worst_killing, c);
        if (c < 0) {
            r.passed = false;
            r.failure = "killing C(x) negative at x=" + to_string(x);
            return r;
        }

        const SymMat a = coeffs.diffusion(x);
        const double asym = a.asymmetry();
        r.worst_asymmetry = std::max(r.worst_asymmetry, asym);
        if (asym > 1e-12) {
            r.passed = false;
            r.failure = "diffusion matrix asymmetric at x=" + to_string(x);
            return r;
        }
        double q = 0;
        for (int i = 0; i < coeffs.dim; ++i)
            for (int j = 0; j < coeffs.dim; ++j) q += z[i] * a(i, j) * z[j];
        const double ratio = q / zz;
        r.worst_ellipticity_low = std::min(r.worst_ellipticity_low, ratio);
        r.worst_ellipticity_high = std::max(r.worst_ellipticity_high, ratio);
        if (ratio < coeffs.a0 * (1 - 1e-9) || ratio > coeffs.A0 * (1 + 1e-9)) {
            r.passed = false;
            r.failure = "ellipticity bound violated at x=" + to_string(x) +
                        ": z.A(x)z/|z|^2=" + std::to_string(ratio) + " outside [" +
                        std::to_string(coeffs.a0) + "," + std::to_string(coeffs.A0) + "]";
            return r;
        }
    }
    return r;
}

Domain Domain::interval(double lo, double hi, double gamma) {
    if (!(hi > lo)) throw ValidationFailed("interval domain needs hi > lo");
    if (!(gamma > 1)) throw ValidationFailed("shrink exponent gamma must exceed 1");
    Domain d;
    d.kind_ = DomainKind::interval;
    d.dim_ = 1;
    d.lo_ = Vec::scalar(lo);
    d.hi_ = Vec::scalar(hi);
    d.gamma_ = gamma;
    d.inradius_ = 0.5 * (hi - lo);
    d.delta_ = 0.5 * d.inradius_;
    return d;
}

Domain Domain::box(const Vec& lo, const Vec& hi, double gamma) {
    if (lo.dim() != hi.dim()) throw ValidationFailed("box corners of mixed dimension");
    if (!(gamma > 1)) throw ValidationFailed("shrink exponent gamma must exceed 1");
    Domain d;
    d.kind_ = DomainKind::box;
    d.dim_ = lo.dim();
    d.lo_ = lo;
    d.hi_ = hi;
    d.gamma_ = gamma;
    double inr = 1e300;
    for (int i = 0; i < d.dim_; ++i) {
        if (!(hi[i] > lo[i])) throw ValidationFailed("box domain needs hi > lo per axis");
        inr = std::min(inr, 0.5 * (hi[i] - lo[i]));
    }
    d.inradius_ = inr;
    d.delta_ = 0.5 * inr;
    return d;
}

Domain Domain::ball(const Vec& center, double radius, double gamma) {
    if (!(radius > 0)) throw ValidationFailed("ball domain needs positive radius");
    if (!(gamma > 1)) throw ValidationFailed("shrink exponent gamma must exceed 1");
    Domain d;
    d.kind_ = DomainKind::ball;
    d.dim_ = center.dim();
    d.center_ = center;
    d.radius_ = radius;
    d.gamma_ = gamma;
    d.inradius_ = radius;
    d.delta_ = 0.5 * radius;
    return d;
}

double Domain::shrink(double t) const { return std::pow(t, gamma_); }

double Domain::signed_dist(const Vec& x) const {
    switch (kind_) {
        case DomainKind::interval:
            return std::min(x[0] - lo_[0], hi_[0] - x[0]);
        case DomainKind::box: {
            // Inside: min face distance. Outside: -Euclidean distance to the box.
            double inside = 1e300;
            double out2 = 0;
            bool outside = false;
            for (int i = 0; i < dim_; ++i) {
                const double d = std::min(x[i] - lo_[i], hi_[i] - x[i]);
                inside = std::min(inside, d);
                if (d < 0) {
                    outside = true;
                    out2 += d * d;
                }
            }
            return outside ? -std::sqrt(out2) : inside;
        }
        case DomainKind::ball:
            return radius_ - (x - center_).norm();
    }
    return 0;
}

double Domain::diameter() const {
    switch (kind_) {
        case DomainKind::interval:
            return hi_[0] - lo_[0];
        case DomainKind::box: {
            double s = 0;
            for (int i = 0; i < dim_; ++i) s += (hi_[i] - lo_[i]) * (hi_[i] - lo_[i]);
            return std::sqrt(s);
        }
        case DomainKind::ball:
            return 2 * radius_;
    }
    return 0;
}

void Domain::set_extension_delta(double d) {
    if (!(d > 0)) throw ValidationFailed("extension delta must be positive");
    delta_ = std::min(d, inradius_);
}

Vec Domain::reflect(const Vec& x) const {
    if (signed_dist(x) >= 0) return x;
    switch (kind_) {
        case DomainKind::interval: {
            double v = x[0];
            if (v < lo_[0]) v = 2 * lo_[0] - v;
            if (v > hi_[0]) v = 2 * hi_[0] - v;
            return Vec::scalar(std::clamp(v, lo_[0], hi_[0]));
        }
        case DomainKind::box: {
            Vec y = x;
            for (int i = 0; i < dim_; ++i) {
                if (y[i] < lo_[i]) y[i] = 2 * lo_[i] - y[i];
                if (y[i] > hi_[i]) y[i] = 2 * hi_[i] - y[i];
                y[i] = std::clamp(y[i], lo_[i], hi_[i]);
            }
            return y;
        }
        case DomainKind::ball: {
            const Vec r = x - center_;
            const double rho = r.norm();
            if (rho == 0) return center_;
            const double target = std::max(2 * radius_ - rho, 0.0);
            return center_ + (target / rho) * r;
        }
    }
    throw UnsupportedDomain("no reflection rule for this domain kind");
}

Vec Domain::sample_point(RngStream& rng) const {
    switch (kind_) {
        case DomainKind::interval:
            return Vec::scalar(lo_[0] + (hi_[0] - lo_[0]) * rng.uniform());
        case DomainKind::box: {
            Vec y(dim_);
            for (int i = 0; i < dim_; ++i) y[i] = lo_[i] + (hi_[i] - lo_[i]) * rng.uniform();
            return y;
        }
        case DomainKind::ball: {
            // Rejection from the bounding box.
            for (;;) {
                Vec y(dim_);
                for (int i = 0; i < dim_; ++i)
                    y[i] = center_[i] + radius_ * (2 * rng.uniform() - 1);
                if ((y - center_).norm() <= radius_) return y;
            }
        }
    }
    return Vec{};
}

double smoothstep(double u) {
    u = std::clamp(u, 0.0, 1.0);
    return u * u * u * (u * (6.0 * u - 15.0) + 10.0);
}

double cutoff(const Domain& domain, double t, const Vec& x) {
    const double d = domain.signed_dist(x);
    if (d <= 0) return 0;
    const double s = domain.shrink(t);
    if (d >= s) return 1;
    return smoothstep(d / s);
}

std::function<double(const Vec&)> extend(const Domain& domain,
                                         std::function<double(const Vec&)> phi) {
    switch (domain.kind()) {
        case DomainKind::interval:
        case DomainKind::box:
        case DomainKind::ball:
            break;
        default:
            throw UnsupportedDomain("extension not defined for this domain kind");
    }
    const double delta = domain.extension_delta();
    return [domain, phi = std::move(phi), delta](const Vec& x) -> double {
        const double d = domain.signed_dist(x);
        if (d >= 0) return phi(x);
        const double out = -d;
        if (out >= delta) return 0;
        // Flat taper on the inner half of the band, quintic ramp on the outer.
        double taper = 1.0;
        if (out > 0.5 * delta) taper = smoothstep((delta - out) / (0.5 * delta));
        return phi(domain.reflect(x)) * taper;
    };
}

JumpDomainReport check_jump_domain(const CoefficientSet& coeffs, const Domain& domain,
                                   double neighborhood_delta, bool censored, int probes,
                                   double tol, std::uint64_t seed) {
    if (!(neighborhood_delta > 0)) throw ValidationFailed("neighborhood delta must be positive");
    JumpDomainReport rep;
    rep.censored_checked = censored;
    rep.worst_probe = Vec::zero(coeffs.dim);
    rep.worst_censored_probe = Vec::zero(coeffs.dim);
    if (!coeffs.jump) return rep; // N = 0: nothing can land anywhere
    const JumpComponent& jc = *coeffs.jump;

    RngStream rng(seed, StreamPurpose::probe, 1, 0);
    for (int k = 0; k < probes; ++k) {
        Vec x = domain.sample_point(rng);
        if (!domain.contains(x)) continue;
        const double dist_boundary = domain.signed_dist(x);

        // Mass of jumps from x landing in the shell U \ closure(G),
        // U = the delta-neighborhood of G.
        double shell_mass = 0;
        double censored_mass = 0;
        for (const auto& a : jc.atoms) {
            const Vec target = x + a.y;
            const double dt = domain.signed_dist(target);
            if (dt < 0 && -dt < neighborhood_delta) shell_mass += jc.rate * a.p;
            if (a.y.norm() > dist_boundary) censored_mass += jc.rate * a.p;
        }
        if (shell_mass > rep.max_mass) {
            rep.max_mass = shell_mass;
            rep.worst_probe = x;
        }
        if (censored && censored_mass > rep.max_censored_mass) {
            rep.max_censored_mass = censored_mass;
            rep.worst_censored_probe = x;
        }
    }
    rep.passed = rep.max_mass <= tol && (!censored || rep.max_censored_mass <= tol);
    return rep;
}

JumpDomainReport validate_jump_domain(const CoefficientSet& coeffs, const Domain& domain,
                                      double neighborhood_delta, bool censored, int probes,
                                      double tol, std::uint64_t seed) {
    JumpDomainReport rep =
        check_jump_domain(coeffs, domain, neighborhood_delta, censored, probes, tol, seed);
    if (!rep.passed) {
        const bool shell = rep.max_mass > tol;
        throw ValidationFailed(
            "jump-domain condition violated: mass " +
            std::to_string(shell ? rep.max_mass : rep.max_censored_mass) + " at probe " +
            to_string(shell ? rep.worst_probe : rep.worst_censored_probe) +
            (shell ? " (jumps land in the exterior shell)" : " (censored condition)"));
    }
    return rep;
}

}  // namespace fpk::model
