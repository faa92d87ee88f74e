#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "fpk/vec.hpp"

namespace fpk {

/// Estimated solution values at a set of evaluation points, with standard
/// errors and enough metadata to reproduce the run.
struct SolutionField {
    int dim = 1;
    std::vector<Vec> points;
    std::vector<double> values;
    std::vector<double> std_errors;
    long long n = 0;         // Chernoff iteration count
    long long samples = 0;   // chains per point (0 for deterministic backends)
    std::uint64_t seed = 0;
    std::string backend;     // "mc" or "quad"

    std::size_t size() const { return points.size(); }

    /// CSV with header row, fixed column order
    /// x0,...,x{d-1},value,stderr,n,samples,seed and locale-independent
    /// shortest round-trip number formatting.
    void write_csv(std::ostream& os) const;

    /// The same table as a JSON object (arrays of rows plus metadata).
    std::string to_json() const;
};

/// Locale-independent shortest round-trip formatting of a double.
std::string format_double(double v);

}  // namespace fpk
