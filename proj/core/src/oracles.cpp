#include "fpk/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "fpk/fractional.hpp"

namespace fpk::oracles {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gauss-Kronrod (7,15) abscissae and weights on [0,1] side of the symmetric rule.
constexpr double kXgk[8] = {0.991455371120812639206854697526329,
                            0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926,
                            0.741531185599394439863864773280788,
                            0.586087235467691130294144838258730,
                            0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245,
                            0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970,
                            0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518,
                            0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550,
                            0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649,
                            0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082,
                           0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975,
                           0.417959183673469387755102040816327};

struct GkResult {
    double value;
    double error;
};

GkResult gk15(const std::function<double(double)>& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double res_g = kWg[3] * fc;
    double res_k = kWgk[7] * fc;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kXgk[j];
        const double fsum = f(center - dx) + f(center + dx);
        res_k += kWgk[j] * fsum;
        if (j % 2 == 1) res_g += kWg[j / 2] * fsum;
    }
    res_g *= half;
    res_k *= half;
    const double diff = std::fabs(res_k - res_g);
    return {res_k, 200.0 * diff * std::sqrt(std::max(diff, 0.0))};
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, int max_intervals) {
    struct Segment {
        double a, b, value, error;
    };
    GkResult whole = gk15(f, a, b);
    std::deque<Segment> segs{{a, b, whole.value, whole.error}};
    double total_err = whole.error;
    int used = 1;
    while (total_err > abs_tol) {
        // Split the worst segment.
        auto worst = std::max_element(segs.begin(), segs.end(),
                                      [](const Segment& l, const Segment& r) {
                                          return l.error < r.error;
                                      });
        if (used >= max_intervals)
            throw ToleranceNotMet("adaptive quadrature: " + std::to_string(total_err) +
                                  " > tolerance " + std::to_string(abs_tol) + " after " +
                                  std::to_string(used) + " intervals");
        const Segment s = *worst;
        segs.erase(worst);
        const double mid = 0.5 * (s.a + s.b);
        const GkResult left = gk15(f, s.a, mid);
        const GkResult right = gk15(f, mid, s.b);
        segs.push_back({s.a, mid, left.value, left.error});
        segs.push_back({mid, s.b, right.value, right.error});
        total_err += left.error + right.error - s.error;
        ++used;
    }
    double sum = 0;
    for (const Segment& s : segs) sum += s.value;
    return sum;
}

double heat_exact(double a, double t, double x, const GaussianParams& f0) {
    // Gaussian convolution: variance sigma^2 grows to sigma^2 + 2 a t.
    const double v = f0.sigma * f0.sigma + 2.0 * a * t;
    const double dx = x - f0.center;
    return f0.amplitude * f0.sigma / std::sqrt(v) * std::exp(-dx * dx / (2.0 * v));
}

EigenExpansion EigenExpansion::build_interval(double a, double lo, double hi,
                                              const std::function<double(double)>& f0,
                                              int modes) {
    if (!(hi > lo)) throw ValidationFailed("eigen expansion needs hi > lo");
    if (!(a > 0)) throw ValidationFailed("eigen expansion needs a > 0");
    if (modes < 1) throw ValidationFailed("eigen expansion needs at least one mode");
    EigenExpansion e;
    e.a_ = a;
    e.lo_ = lo;
    e.hi_ = hi;
    const double length = hi - lo;
    e.coefficients_.resize(static_cast<std::size_t>(modes));
    for (int k = 1; k <= modes; ++k) {
        const double kk = k * kPi / length;
        e.coefficients_[static_cast<std::size_t>(k - 1)] =
            2.0 / length *
            integrate_adaptive([&](double x) { return f0(x) * std::sin(kk * (x - lo)); }, lo, hi,
                               1e-12);
    }
    double sup = 0, rec = 0;
    for (int i = 0; i <= 400; ++i) {
        const double x = lo + length * i / 400.0;
        sup = std::max(sup, std::fabs(f0(x)));
        rec = std::max(rec, std::fabs(e.value(0, x) - f0(x)));
    }
    e.f0_sup_ = sup;
    e.reconstruction_error_ = rec;
    return e;
}

double EigenExpansion::value(double t, double x) const {
    if (x <= lo_ || x >= hi_) return 0;
    const double length = hi_ - lo_;
    double acc = 0;
    for (std::size_t k = 0; k < coefficients_.size(); ++k) {
        const double kk = (k + 1) * kPi / length;
        acc += coefficients_[k] * std::exp(-a_ * kk * kk * t) * std::sin(kk * (x - lo_));
    }
    return acc;
}

double EigenExpansion::tail_bound(double t) const {
    if (!(t > 0)) return 2.0 * f0_sup_ * 1e3; // no decay at t = 0; bound is vacuous
    const double length = hi_ - lo_;
    const int start = modes() + 1;
    double acc = 0;
    for (int k = start; k < start + 200; ++k) {
        const double kk = k * kPi / length;
        acc += std::exp(-a_ * kk * kk * t);
    }
    // Remaining terms decay faster than geometrically; cap with ratio bound.
    const double kk = (start + 200) * kPi / length;
    acc += std::exp(-a_ * kk * kk * t) / std::max(1e-16, 1.0 - std::exp(-a_ * kk * kk * t));
    return 2.0 * f0_sup_ * acc;
}

double dirichlet_exact(const EigenExpansion& expansion, double t, double x) {
    return expansion.value(t, x);
}

double subordinated_oracle(const std::function<double(double)>& inner,
                           const fractional::SubordinationMeasure& mu, double t,
                           double quad_tol) {
    if (!mu.is_half())
        throw ValidationFailed(
            "subordinated_oracle needs mu = delta_{1/2} or a tabulated density");
    if (!(t > 0)) throw ValidationFailed("subordinated_oracle needs t > 0");
    // Truncate where the half-Gaussian tail is negligible against quad_tol.
    const double tail_level = std::max(std::min(quad_tol * 1e-3, 1e-12), 1e-16);
    double radius = std::sqrt(t);
    while (std::erfc(radius / (2.0 * std::sqrt(t))) >= tail_level && radius < 1e6) radius *= 2;
    const double norm = 1.0 / std::sqrt(kPi * t);
    return integrate_adaptive(
        [&](double tau) { return inner(tau) * norm * std::exp(-tau * tau / (4.0 * t)); }, 0.0,
        radius, quad_tol);
}

double subordinated_oracle(const std::function<double(double)>& inner,
                           const std::function<double(double)>& density, double radius,
                           double quad_tol) {
    return integrate_adaptive([&](double tau) { return inner(tau) * density(tau); }, 0.0, radius,
                              quad_tol);
}

ResidualReport generator_residual(const model::Problem& problem, const SpaceTimeField& field,
                                  double stencil_h) {
    if (problem.coeffs.dim != 1)
        throw ValidationFailed("generator_residual supports d = 1 fields");
    const std::size_t nt = field.times.size();
    const std::size_t nx = field.xs.size();
    if (nt < 2 || nx < 5) throw GridTooCoarse("need at least 2 times and 5 space nodes");
    const double dt = field.times[1] - field.times[0];
    for (std::size_t m = 1; m < nt; ++m)
        if (std::fabs(field.times[m] - field.times[m - 1] - dt) > 1e-9 * std::max(dt, 1.0))
            throw BadGrid("time grid not uniform");
    const double hx = field.xs[1] - field.xs[0];
    if (std::fabs(hx - stencil_h) > 1e-9 * stencil_h)
        throw BadGrid("space grid spacing disagrees with stencil_h");
    for (std::size_t i = 1; i < nx; ++i)
        if (std::fabs(field.xs[i] - field.xs[i - 1] - hx) > 1e-9 * hx)
            throw BadGrid("space grid not uniform");

    // Time-derivative side per column.
    std::vector<std::vector<double>> dterm(nt, std::vector<double>(nx, 0.0));
    for (std::size_t i = 0; i < nx; ++i) {
        std::vector<double> series(nt);
        for (std::size_t m = 0; m < nt; ++m) series[m] = field.values[m][i];
        if (problem.mu) {
            const std::vector<double> d = fractional::distributed_derivative(series, dt, *problem.mu);
            for (std::size_t m = 0; m < nt; ++m) dterm[m][i] = d[m];
        } else {
            for (std::size_t m = 1; m < nt; ++m) dterm[m][i] = (series[m] - series[m - 1]) / dt;
        }
    }

    auto interp = [&](std::size_t m, double x) -> double {
        if (x <= field.xs.front() || x >= field.xs.back()) return 0.0;
        const std::size_t i =
            static_cast<std::size_t>((x - field.xs.front()) / hx);
        const std::size_t j = std::min(i, nx - 2);
        const double w = (x - field.xs[j]) / hx;
        return (1 - w) * field.values[m][j] + w * field.values[m][j + 1];
    };

    ResidualReport rep;
    double sum_sq = 0;
    for (std::size_t m = 1; m < nt; ++m) {
        for (std::size_t i = 1; i + 1 < nx; ++i) {
            const Vec x = Vec::scalar(field.xs[i]);
            const double f = field.values[m][i];
            const double fx = (field.values[m][i + 1] - field.values[m][i - 1]) / (2 * hx);
            const double fxx =
                (field.values[m][i + 1] - 2 * f + field.values[m][i - 1]) / (hx * hx);
            double lf = -problem.coeffs.killing(x) * f - problem.coeffs.drift(x)[0] * fx +
                        problem.coeffs.diffusion(x)(0, 0) * fxx;
            if (problem.coeffs.jump) {
                const auto& jc = *problem.coeffs.jump;
                for (const auto& atom : jc.atoms) {
                    const double y = atom.y[0];
                    lf += jc.rate * atom.p *
                          (interp(m, field.xs[i] + y) - f - y * fx / (1 + y * y));
                }
            }
            const double r = dterm[m][i] - lf;
            rep.max_abs = std::max(rep.max_abs, std::fabs(r));
            sum_sq += r * r;
            ++rep.count;
        }
    }
    if (rep.count == 0) throw GridTooCoarse("no interior residual nodes");
    rep.rms = std::sqrt(sum_sq / static_cast<double>(rep.count));
    return rep;
}

}  // namespace fpk::oracles
