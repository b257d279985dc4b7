#pragma once

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nullgeo {

/// The spec document does not match the schema (missing keys, wrong types,
/// inconsistent dimensions, unparsable expressions).
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct GridSpec {
    std::vector<std::pair<double, double>> ranges;
    int points_per_axis = 5;
    std::uint64_t seed = 1;
};

struct Tolerances {
    double algebraic = 1e-8;
    double derivative = 1e-6;
    double curvature = 1e-4;
};

/// Leaves of the screen foliation, realized as level sets of one chart coordinate.
struct LeafSpec {
    int coordinate = 0;
    std::vector<double> values;
};

struct GeometrySpec {
    std::string id;
    std::string description;

    int ambient_dim = 0;
    int index = 0;
    std::vector<std::vector<std::string>> metric;
    std::optional<std::vector<std::vector<std::string>>> complex_structure;

    int chart_dim = 0;
    std::vector<std::string> embedding;
    std::optional<std::vector<std::string>> xi;
    std::vector<std::vector<std::string>> screen;
    bool screen_from_complex_structure = false;

    std::string conformal_f = "0";
    /// Extension f̄ to the ambient chart with f̄|_M = f and N(f̄) = 0, when known.
    std::optional<std::string> conformal_ambient_f;
    /// Empty: zero, or the almost contact form when the screen comes from J̄.
    std::vector<std::string> theta0;

    std::optional<LeafSpec> leaf;

    GridSpec grid;
    Tolerances tolerances;
};

GeometrySpec parse_spec(const nlohmann::json& doc);
nlohmann::json to_json(const GeometrySpec& spec);

/// Hex FNV-1a hash of the canonical JSON dump.
std::string fingerprint(const nlohmann::json& doc);

} // namespace nullgeo
