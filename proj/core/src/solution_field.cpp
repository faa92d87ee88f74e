#include "fpk/solution_field.hpp"

#include <charconv>

#include "json.hpp"

namespace fpk {

std::string format_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

void SolutionField::write_csv(std::ostream& os) const {
    for (int i = 0; i < dim; ++i) os << "x" << i << ",";
    os << "value,stderr,n,samples,seed\n";
    for (std::size_t r = 0; r < points.size(); ++r) {
        for (int i = 0; i < dim; ++i) os << format_double(points[r][i]) << ",";
        os << format_double(values[r]) << "," << format_double(std_errors[r]) << "," << n << ","
           << samples << "," << seed << "\n";
    }
}

std::string SolutionField::to_json() const {
    nlohmann::json j;
    j["backend"] = backend;
    j["n"] = n;
    j["samples"] = samples;
    j["seed"] = seed;
    j["dim"] = dim;
    auto rows = nlohmann::json::array();
    for (std::size_t r = 0; r < points.size(); ++r) {
        nlohmann::json row;
        auto pt = nlohmann::json::array();
        for (int i = 0; i < dim; ++i) pt.push_back(points[r][i]);
        row["point"] = pt;
        row["value"] = values[r];
        row["stderr"] = std_errors[r];
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j.dump(2);
}

}  // namespace fpk
