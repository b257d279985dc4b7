#pragma once

#include "nullgeo/ambient.hpp"
#include "nullgeo/hypersurface.hpp"
#include "nullgeo/spec.hpp"

#include <optional>

namespace nullgeo {

/// A spec turned into live objects.
struct Geometry {
    GeometrySpec spec;
    AmbientManifold ambient;
    LightlikeHypersurface hypersurface;
    ScalarField f;        // conformal factor on M's chart
    TangentField theta0;  // θ_{g0} covector components
    std::vector<ScalarField> theta0_exprs; // empty when θ0 comes from J̄
    /// f̄ on the ambient chart; zero when f is, otherwise only if the spec gives it.
    std::optional<ScalarField> ambient_f;
};

/// Throws SpecError for expressions that do not parse.
Geometry build_geometry(const GeometrySpec& spec);

/// Uniform grid over the spec ranges followed by `extra` seeded random interior points.
std::vector<Vec> sample_points(const GridSpec& grid, int extra);

/// The uniform part only, with `per_axis` points per coordinate.
std::vector<Vec> uniform_grid(const std::vector<std::pair<double, double>>& ranges, int per_axis);

} // namespace nullgeo
