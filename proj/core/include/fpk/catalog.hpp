#pragma once

#include <string>
#include <vector>

#include "fpk/model.hpp"

namespace fpk::catalog {

/// Shipped d = 1 coefficient sets.

/// A = a, B = 0, C = 0.
model::CoefficientSet heat(double a = 0.5);

/// Mean-reverting drift B(x) = theta x toward 0, A = a, C = 0.
model::CoefficientSet ou(double theta = 1.0, double a = 0.5);

/// A(x) = a0 + a1 sin(x), clipped to the declared bounds [a0-|a1|, a0+|a1|].
model::CoefficientSet variable_a(double a0 = 1.0, double a1 = 0.25);

/// Heat with constant killing rate c.
model::CoefficientSet constant_killing(double c = 0.3, double a = 0.5);

/// Heat plus a two-atom compound-Poisson jump component.
model::CoefficientSet compound_poisson(double rate = 1.0, double y1 = 0.4, double p1 = 0.5,
                                       double y2 = -0.3, double a = 0.5);

/// Coefficient set by catalog spec string, e.g. "heat(0.5)" or
/// "cpoisson(1.0,0.4,0.5,-0.3)". Throws ConfigError on unknown names.
model::CoefficientSet coefficients_by_name(const std::string& spec);

/// Shipped initial conditions.
model::BoundedFunction gaussian_initial(double amplitude = 1.0, double center = 0.0,
                                        double sigma = 1.0);
/// sin(k (x - lo)) scaled to vanish at both interval endpoints.
model::BoundedFunction sine_mode(int k, double lo = 0.0,
                                 double hi = 3.14159265358979323846);
/// Quartic bump ((1 - ((x-c)/r)^2)^2 on |x-c| < r, else 0.
model::BoundedFunction bump(double center, double radius, double amplitude = 1.0);
model::BoundedFunction zero_initial();

model::BoundedFunction initial_by_name(const std::string& spec);

/// Names understood by coefficients_by_name / initial_by_name.
std::vector<std::string> coefficient_names();
std::vector<std::string> initial_names();

}  // namespace fpk::catalog
