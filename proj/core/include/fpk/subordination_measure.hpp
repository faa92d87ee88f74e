#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fpk/errors.hpp"

namespace fpk::fractional {

/// Finite discrete mixing measure mu = sum_i w_i * delta_{beta_i} on (0,1).
///
/// Drives the distributed-order derivative D^mu and the mixture subordinator
/// whose Bernstein function is f^mu(s) = sum_i w_i s^{beta_i}.
struct SubordinationMeasure {
    struct Atom {
        double beta;
        double weight;
    };
    std::vector<Atom> atoms;

    SubordinationMeasure() = default;
    explicit SubordinationMeasure(std::vector<Atom> as) : atoms(std::move(as)) { validate(); }

    static SubordinationMeasure single(double beta, double weight = 1.0) {
        return SubordinationMeasure({{beta, weight}});
    }
    static SubordinationMeasure half() { return single(0.5, 1.0); }

    void validate() const {
        if (atoms.empty()) throw ValidationFailed("subordination measure has no atoms");
        double total = 0;
        for (const auto& a : atoms) {
            if (!(a.beta > 0.0 && a.beta < 1.0))
                throw ValidationFailed("subordination atom beta=" + std::to_string(a.beta) +
                                       " outside (0,1)");
            if (!(a.weight > 0.0))
                throw ValidationFailed("subordination atom weight=" + std::to_string(a.weight) +
                                       " not positive");
            total += a.weight;
        }
        if (!(total > 0)) throw ValidationFailed("subordination measure has zero total mass");
    }

    /// True when mu is exactly delta_{1/2} with unit weight (closed forms apply).
    bool is_half() const {
        return atoms.size() == 1 && atoms[0].beta == 0.5 && atoms[0].weight == 1.0;
    }

    double total_weight() const {
        double s = 0;
        for (const auto& a : atoms) s += a.weight;
        return s;
    }

    /// Bernstein function f^mu(s) = sum_i w_i s^{beta_i}.
    double bernstein(double s) const {
        double v = 0;
        for (const auto& a : atoms) v += a.weight * std::pow(s, a.beta);
        return v;
    }

    /// Scale of the mixture subordinator component i: D^mu = sum_i c_i D^{beta_i}
    /// with c_i = w_i^{1/beta_i}, chosen so the Bernstein function matches f^mu.
    double component_scale(std::size_t i) const {
        return std::pow(atoms[i].weight, 1.0 / atoms[i].beta);
    }
};

}  // namespace fpk::fractional
