#include "nullgeo/geometry.hpp"
#include "nullgeo/kaehler.hpp"

#include <random>

namespace nullgeo {

namespace {

std::vector<ScalarField> parse_list(const std::vector<std::string>& texts, int dim, const std::string& where)
{
    try {
        return parse_all(texts, dim);
    } catch (const SyntaxError& e) {
        throw SpecError(where + ": " + e.what());
    } catch (const CoordinateRangeError& e) {
        throw SpecError(where + ": " + e.what());
    }
}

std::vector<std::vector<ScalarField>> parse_matrix(const std::vector<std::vector<std::string>>& rows, int dim,
                                                   const std::string& where)
{
    std::vector<std::vector<ScalarField>> out;
    for (const auto& r : rows)
        out.push_back(parse_list(r, dim, where));
    return out;
}

Vec grid_center(const GridSpec& g)
{
    Vec c(static_cast<int>(g.ranges.size()));
    for (std::size_t i = 0; i < g.ranges.size(); ++i)
        c(static_cast<int>(i)) = 0.5 * (g.ranges[i].first + g.ranges[i].second);
    return c;
}

} // namespace

Geometry build_geometry(const GeometrySpec& spec)
{
    const int d = spec.ambient_dim, m = spec.chart_dim;
    std::optional<std::vector<std::vector<ScalarField>>> j;
    if (spec.complex_structure)
        j = parse_matrix(*spec.complex_structure, d, "ambient.complex_structure");
    AmbientManifold amb(parse_matrix(spec.metric, d, "ambient.metric"), spec.index, j);
    Embedding emb(parse_list(spec.embedding, m, "hypersurface.embedding"));
    std::optional<TangentField> xi;
    if (spec.xi)
        xi = TangentField::from_exprs(parse_list(*spec.xi, m, "hypersurface.xi"));

    LightlikeHypersurface base(amb, emb, xi, {});
    std::vector<TangentField> screen;
    if (spec.screen_from_complex_structure) {
        screen = complex_screen(base, grid_center(spec.grid));
    } else {
        for (const auto& w : spec.screen)
            screen.push_back(TangentField::from_exprs(parse_list(w, m, "hypersurface.screen")));
    }
    LightlikeHypersurface hyp = base.with_screen(std::move(screen));

    ScalarField f = parse_list({spec.conformal_f}, m, "conformal.f").front();
    std::vector<ScalarField> theta_exprs;
    TangentField theta0;
    if (!spec.theta0.empty()) {
        theta_exprs = parse_list(spec.theta0, m, "weyl.theta0");
        theta0 = TangentField::from_exprs(theta_exprs);
    } else if (spec.screen_from_complex_structure) {
        theta0 = almost_contact_form(hyp);
    } else {
        theta0 = TangentField::constant(Vec::Zero(m));
    }
    std::optional<ScalarField> ambient_f;
    if (spec.conformal_ambient_f)
        ambient_f = parse_list({*spec.conformal_ambient_f}, spec.ambient_dim, "conformal.ambient_f").front();
    else if (f.is_zero())
        ambient_f = ScalarField::constant(0.0, spec.ambient_dim);
    return Geometry{spec,           std::move(amb),         std::move(hyp),      std::move(f), std::move(theta0),
                    std::move(theta_exprs), std::move(ambient_f)};
}

std::vector<Vec> uniform_grid(const std::vector<std::pair<double, double>>& ranges, int per_axis)
{
    const int m = static_cast<int>(ranges.size());
    std::vector<Vec> pts;
    if (per_axis <= 0)
        return pts;
    std::vector<int> idx(static_cast<std::size_t>(m), 0);
    while (true) {
        Vec p(m);
        for (int i = 0; i < m; ++i) {
            auto [lo, hi] = ranges[static_cast<std::size_t>(i)];
            double t = per_axis == 1 ? 0.5 : static_cast<double>(idx[static_cast<std::size_t>(i)]) / (per_axis - 1);
            p(i) = lo + t * (hi - lo);
        }
        pts.push_back(p);
        int k = 0;
        while (k < m && ++idx[static_cast<std::size_t>(k)] == per_axis)
            idx[static_cast<std::size_t>(k++)] = 0;
        if (k == m)
            break;
    }
    return pts;
}

std::vector<Vec> sample_points(const GridSpec& grid, int extra)
{
    std::vector<Vec> pts = uniform_grid(grid.ranges, grid.points_per_axis);
    std::mt19937_64 rng(grid.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int m = static_cast<int>(grid.ranges.size());
    for (int k = 0; k < extra; ++k) {
        Vec p(m);
        for (int i = 0; i < m; ++i) {
            auto [lo, hi] = grid.ranges[static_cast<std::size_t>(i)];
            // stay a little inside so finite differences do not leave the domain
            p(i) = lo + (0.02 + 0.96 * unit(rng)) * (hi - lo);
        }
        pts.push_back(p);
    }
    return pts;
}

} // namespace nullgeo
