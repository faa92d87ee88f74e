#include "fpk/catalog.hpp"

#include <algorithm>
#include <cmath>

#include "fpk/errors.hpp"

namespace fpk::catalog {

namespace {

/// Parses "name(arg1,arg2,...)" into name + numeric args.
struct SpecCall {
    std::string name;
    std::vector<double> args;
};

SpecCall parse_call(const std::string& spec) {
    SpecCall c;
    const auto open = spec.find('(');
    if (open == std::string::npos) {
        c.name = spec;
        return c;
    }
    const auto close = spec.rfind(')');
    if (close == std::string::npos || close < open)
        throw ConfigError("malformed catalog spec '" + spec + "'");
    c.name = spec.substr(0, open);
    std::string args = spec.substr(open + 1, close - open - 1);
    std::size_t pos = 0;
    while (pos < args.size()) {
        auto comma = args.find(',', pos);
        if (comma == std::string::npos) comma = args.size();
        const std::string tok = args.substr(pos, comma - pos);
        if (!tok.empty()) {
            try {
                c.args.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ConfigError("bad numeric argument '" + tok + "' in '" + spec + "'");
            }
        }
        pos = comma + 1;
    }
    return c;
}

double arg_or(const SpecCall& c, std::size_t i, double fallback) {
    return i < c.args.size() ? c.args[i] : fallback;
}

}  // namespace

model::CoefficientSet heat(double a) {
    if (!(a > 0)) throw ValidationFailed("heat catalog entry needs a > 0");
    model::CoefficientSet c;
    c.dim = 1;
    c.diffusion = [a](const Vec&) { return SymMat::scalar1d(a); };
    c.drift = [](const Vec&) { return Vec::scalar(0.0); };
    c.killing = [](const Vec&) { return 0.0; };
    c.a0 = a;
    c.A0 = a;
    c.name = "heat(" + std::to_string(a) + ")";
    return c;
}

model::CoefficientSet ou(double theta, double a) {
    model::CoefficientSet c = heat(a);
    c.drift = [theta](const Vec& x) { return Vec::scalar(theta * x[0]); };
    c.name = "ou(" + std::to_string(theta) + "," + std::to_string(a) + ")";
    return c;
}

model::CoefficientSet variable_a(double a0, double a1) {
    const double lo = a0 - std::fabs(a1);
    const double hi = a0 + std::fabs(a1);
    if (!(lo > 0)) throw ValidationFailed("variable_a needs a0 > |a1| for ellipticity");
    model::CoefficientSet c;
    c.dim = 1;
    c.diffusion = [a0, a1, lo, hi](const Vec& x) {
        return SymMat::scalar1d(std::clamp(a0 + a1 * std::sin(x[0]), lo, hi));
    };
    c.drift = [](const Vec&) { return Vec::scalar(0.0); };
    c.killing = [](const Vec&) { return 0.0; };
    c.a0 = lo;
    c.A0 = hi;
    c.name = "vara(" + std::to_string(a0) + "," + std::to_string(a1) + ")";
    return c;
}

model::CoefficientSet constant_killing(double c0, double a) {
    if (c0 < 0) throw ValidationFailed("killing rate must be nonnegative");
    model::CoefficientSet c = heat(a);
    c.killing = [c0](const Vec&) { return c0; };
    c.name = "killing(" + std::to_string(c0) + "," + std::to_string(a) + ")";
    return c;
}

model::CoefficientSet compound_poisson(double rate, double y1, double p1, double y2, double a) {
    if (!(p1 > 0 && p1 < 1)) throw ValidationFailed("first jump-atom mass must lie in (0,1)");
    model::CoefficientSet c = heat(a);
    c.jump = model::make_compound_poisson(
        rate, {{Vec::scalar(y1), p1}, {Vec::scalar(y2), 1.0 - p1}});
    c.name = "cpoisson(" + std::to_string(rate) + "," + std::to_string(y1) + "," +
             std::to_string(p1) + "," + std::to_string(y2) + ")";
    return c;
}

model::CoefficientSet coefficients_by_name(const std::string& spec) {
    const SpecCall c = parse_call(spec);
    if (c.name == "heat") return heat(arg_or(c, 0, 0.5));
    if (c.name == "ou") return ou(arg_or(c, 0, 1.0), arg_or(c, 1, 0.5));
    if (c.name == "vara" || c.name == "variable-a")
        return variable_a(arg_or(c, 0, 1.0), arg_or(c, 1, 0.25));
    if (c.name == "killing" || c.name == "constant-killing")
        return constant_killing(arg_or(c, 0, 0.3), arg_or(c, 1, 0.5));
    if (c.name == "cpoisson" || c.name == "compound-poisson")
        return compound_poisson(arg_or(c, 0, 1.0), arg_or(c, 1, 0.4), arg_or(c, 2, 0.5),
                                arg_or(c, 3, -0.3), arg_or(c, 4, 0.5));
    throw ConfigError("unknown coefficient catalog entry '" + c.name + "'");
}

model::BoundedFunction gaussian_initial(double amplitude, double center, double sigma) {
    if (!(sigma > 0)) throw ValidationFailed("gaussian initial needs sigma > 0");
    model::BoundedFunction f;
    f.f = [amplitude, center, sigma](const Vec& x) {
        const double d = (x[0] - center) / sigma;
        return amplitude * std::exp(-0.5 * d * d);
    };
    // exp(-0.5 * 9^2) ~ 2.6e-18: numerically zero in double accumulation.
    f.support_radius = std::fabs(center) + 9.0 * sigma;
    f.name = "gaussian(" + std::to_string(amplitude) + "," + std::to_string(center) + "," +
             std::to_string(sigma) + ")";
    return f;
}

model::BoundedFunction sine_mode(int k, double lo, double hi) {
    if (k < 1) throw ValidationFailed("sine mode index must be >= 1");
    const double freq = k * 3.14159265358979323846 / (hi - lo);
    model::BoundedFunction f;
    f.f = [freq, lo, hi](const Vec& x) {
        if (x[0] <= lo || x[0] >= hi) return 0.0;
        return std::sin(freq * (x[0] - lo));
    };
    f.support_radius = std::max(std::fabs(lo), std::fabs(hi));
    f.name = "sin(" + std::to_string(k) + ")";
    return f;
}

model::BoundedFunction bump(double center, double radius, double amplitude) {
    if (!(radius > 0)) throw ValidationFailed("bump needs radius > 0");
    model::BoundedFunction f;
    f.f = [center, radius, amplitude](const Vec& x) {
        const double u = (x[0] - center) / radius;
        if (std::fabs(u) >= 1) return 0.0;
        const double q = 1 - u * u;
        return amplitude * q * q;
    };
    f.support_radius = std::fabs(center) + radius;
    f.name = "bump(" + std::to_string(center) + "," + std::to_string(radius) + ")";
    return f;
}

model::BoundedFunction zero_initial() {
    model::BoundedFunction f;
    f.f = [](const Vec&) { return 0.0; };
    f.support_radius = 1.0;
    f.name = "zero";
    return f;
}

model::BoundedFunction initial_by_name(const std::string& spec) {
    const SpecCall c = parse_call(spec);
    if (c.name == "gaussian")
        return gaussian_initial(arg_or(c, 0, 1.0), arg_or(c, 1, 0.0), arg_or(c, 2, 1.0));
    if (c.name == "sin")
        return sine_mode(static_cast<int>(arg_or(c, 0, 1.0)), arg_or(c, 1, 0.0),
                         arg_or(c, 2, 3.14159265358979323846));
    if (c.name == "bump") return bump(arg_or(c, 0, 0.0), arg_or(c, 1, 1.0), arg_or(c, 2, 1.0));
    if (c.name == "zero") return zero_initial();
    throw ConfigError("unknown initial-condition catalog entry '" + c.name + "'");
}

std::vector<std::string> coefficient_names() {
    return {"heat(a)", "ou(theta,a)", "vara(a0,a1)", "killing(c,a)",
            "cpoisson(rate,y1,p1,y2[,a])"};
}

std::vector<std::string> initial_names() {
    return {"gaussian(amp,center,sigma)", "sin(k[,lo,hi])", "bump(center,radius[,amp])", "zero"};
}

}  // namespace fpk::catalog
