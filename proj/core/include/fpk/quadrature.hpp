#pragma once

#include <vector>

namespace fpk {

/// Gauss-Legendre rule on [-1,1]; nodes ascending.
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    /// Rule of the given order, computed once and cached (thread-safe).
    static const GaussLegendre& get(int n);

    /// Map node k to the interval [a,b]; weight picks up the Jacobian (b-a)/2.
    double node_on(int k, double a, double b) const {
        return 0.5 * (a + b) + 0.5 * (b - a) * nodes[static_cast<std::size_t>(k)];
    }
    double weight_on(int k, double a, double b) const {
        return 0.5 * (b - a) * weights[static_cast<std::size_t>(k)];
    }
};

}  // namespace fpk
