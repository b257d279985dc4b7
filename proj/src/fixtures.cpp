#include "nullgeo/fixtures.hpp"

namespace nullgeo {

using nlohmann::json;

namespace {

json diagonal(const std::vector<std::string>& d)
{
    json m = json::array();
    for (std::size_t i = 0; i < d.size(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < d.size(); ++j)
            row.push_back(i == j ? d[i] : "0");
        m.push_back(row);
    }
    return m;
}

// Coordinate vector field e_k on an m-dimensional chart.
json unit(int m, int k)
{
    json v = json::array();
    for (int i = 0; i < m; ++i)
        v.push_back(i == k ? "1" : "0");
    return v;
}

// Standard complex structure pairing (0,1), (2,3), ...: J e_{2k} = e_{2k+1}.
json standard_j(int d)
{
    json m = json::array();
    for (int a = 0; a < d; ++a) {
        json row = json::array();
        for (int b = 0; b < d; ++b) {
            std::string v = "0";
            if (a % 2 == 1 && b == a - 1)
                v = "1";
            if (a % 2 == 0 && b == a + 1)
                v = "-1";
            row.push_back(v);
        }
        m.push_back(row);
    }
    return m;
}

json grid(std::vector<std::pair<double, double>> ranges, int ppa, int seed)
{
    json r = json::array();
    for (auto [lo, hi] : ranges)
        r.push_back({lo, hi});
    return {{"ranges", r}, {"points_per_axis", ppa}, {"seed", seed}};
}

json minkowski(int d)
{
    std::vector<std::string> diag(static_cast<std::size_t>(d), "1");
    diag[0] = "-1";
    return {{"dim", d}, {"index", 1}, {"metric", diagonal(diag)}};
}

json null_hyperplane()
{
    return {{"id", "null_hyperplane"},
            {"description", "null hyperplane x0 = x1 in flat R^4_1 with coordinate screen"},
            {"ambient", minkowski(4)},
            {"hypersurface",
             {{"chart_dim", 3},
              {"embedding", {"x0", "x0", "x1", "x2"}},
              {"xi", {"1", "0", "0"}},
              {"screen", {unit(3, 1), unit(3, 2)}}}},
            {"conformal", {{"f", "0"}}},
            {"weyl", {{"theta0", {"0", "0", "0"}}}},
            {"foliation", {{"leaf_coordinate", 0}, {"leaf_values", {0.0, 0.4}}}},
            {"grid", grid({{-1, 1}, {-1, 1}, {-1, 1}}, 5, 1)}};
}

json null_hyperplane_conformal()
{
    json s = null_hyperplane();
    s["id"] = "null_hyperplane_conformal";
    s["description"] = "null hyperplane with horizontal conformal factor f(v,w) and non-closed theta0";
    s["conformal"] = {{"f", "0.2*x1^2+0.1*x1*x2-0.15*x2^2"}, {"ambient_f", "0.2*x2^2+0.1*x2*x3-0.15*x3^2"}};
    s["weyl"] = {{"theta0", {"0", "1+0.2*x2", "0.3*sin(x1)"}}};
    s.erase("foliation");
    return s;
}

json light_cone()
{
    return {{"id", "light_cone"},
            {"description", "future light cone x0 = |(x1,x2,x3)| in flat R^4_1"},
            {"ambient", minkowski(4)},
            {"hypersurface",
             {{"chart_dim", 3},
              {"embedding", {"sqrt(x0^2+x1^2+x2^2)", "x0", "x1", "x2"}},
              {"xi", {"x0", "x1", "x2"}},
              {"screen", {{"-x1", "x0", "0"}, {"-x0*x2", "-x1*x2", "x0^2+x1^2"}}}}},
            {"grid", grid({{0.5, 1.5}, {0.5, 1.5}, {0.5, 1.5}}, 5, 2)}};
}

json spacelike()
{
    return {{"id", "spacelike"},
            {"description", "spacelike hyperplane x0 = 0 in flat R^4_1 (not lightlike)"},
            {"ambient", minkowski(4)},
            {"hypersurface",
             {{"chart_dim", 3}, {"embedding", {"0", "x0", "x1", "x2"}}, {"screen", {unit(3, 1), unit(3, 2)}}}},
            {"grid", grid({{-1, 1}, {-1, 1}, {-1, 1}}, 3, 3)}};
}

// Radial-coordinate leaves u = s + L r^2 / 2 of the null hyperplane: the
// coordinate screen in the chart (s, r, t) is tilted and totally umbilical,
// and theta0 = d log(2 / (1 + r^2)) makes every leaf a round sphere in the
// Weyl sense.
json umbilic_foliation()
{
    const std::string u = "x0+0.25*x1^2";
    return {{"id", "umbilic_foliation"},
            {"description", "null hyperplane in R^4_1, polar chart with tilted umbilical screen, spherical theta0"},
            {"ambient", minkowski(4)},
            {"hypersurface",
             {{"chart_dim", 3},
              {"embedding", {u, u, "x1*cos(x2)", "x1*sin(x2)"}},
              {"xi", {"1", "0", "0"}},
              {"screen", {unit(3, 1), unit(3, 2)}}}},
            {"conformal", {{"f", "0"}}},
            {"weyl", {{"theta0", {"0", "-2*x1/(1+x1^2)", "0"}}}},
            {"foliation", {{"leaf_coordinate", 0}, {"leaf_values", {0.0, 0.3}}}},
            {"grid", grid({{-0.5, 0.5}, {0.5, 1.5}, {0.0, 1.0}}, 5, 4)}};
}

json umbilic_foliation_6d()
{
    const std::string r2 = "(x1^2+x2^2+x3^2+x4^2)";
    const std::string u = "x0+0.25*" + r2;
    json theta = {"0"};
    for (int i = 1; i <= 4; ++i)
        theta.push_back("-2*x" + std::to_string(i) + "/(1+" + r2 + ")");
    json screen = json::array();
    for (int i = 1; i <= 4; ++i)
        screen.push_back(unit(5, i));
    return {{"id", "umbilic_foliation_6d"},
            {"description", "null hyperplane in R^6_1 with tilted umbilical screen, spherical theta0"},
            {"ambient", minkowski(6)},
            {"hypersurface",
             {{"chart_dim", 5},
              {"embedding", {u, u, "x1", "x2", "x3", "x4"}},
              {"xi", {"1", "0", "0", "0", "0"}},
              {"screen", screen}}},
            {"conformal", {{"f", "0"}}},
            {"weyl", {{"theta0", theta}}},
            {"foliation", {{"leaf_coordinate", 0}, {"leaf_values", {0.0}}}},
            {"grid", grid({{-0.5, 0.5}, {-0.6, 0.6}, {-0.6, 0.6}, {-0.6, 0.6}, {-0.6, 0.6}}, 3, 5)}};
}

// R^4_2 with the null hyperplane x2 = x0; xi = e^psi d/da.
json kaehler_flat(const std::string& id, const std::string& description, const std::string& exp_psi)
{
    return {{"id", id},
            {"description", description},
            {"ambient",
             {{"dim", 4}, {"index", 2}, {"metric", diagonal({"-1", "-1", "1", "1"})}, {"complex_structure", standard_j(4)}}},
            {"hypersurface",
             {{"chart_dim", 3},
              {"embedding", {"x0", "x1", "x0", "x2"}},
              {"xi", {exp_psi, "0", "0"}},
              {"screen_from_complex_structure", true}}},
            {"conformal", {{"f", "0"}}},
            {"grid", grid({{-1, 1}, {-1, 1}, {-1, 1}}, 5, 6)}};
}

json kaehler_6d()
{
    return {{"id", "kaehler_6d"},
            {"description", "null hyperplane x2 = x0 in flat R^6_2 (D0 rank 2)"},
            {"ambient",
             {{"dim", 6},
              {"index", 2},
              {"metric", diagonal({"-1", "-1", "1", "1", "1", "1"})},
              {"complex_structure", standard_j(6)}}},
            {"hypersurface",
             {{"chart_dim", 5},
              {"embedding", {"x0", "x1", "x0", "x2", "x3", "x4"}},
              {"xi", {"exp(0.2*x1*x3)", "0", "0", "0", "0"}},
              {"screen_from_complex_structure", true}}},
            {"conformal", {{"f", "0"}}},
            {"grid", grid({{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}, 3, 7)}};
}

json null_wave()
{
    json amb = {{"dim", 4},
                {"index", 1},
                {"metric",
                 {{"0", "-1", "0", "0"}, {"-1", "0", "0", "0"}, {"0", "0", "1+x0*x3", "0"}, {"0", "0", "0", "1+x0*x2"}}}};
    return {{"id", "null_wave"},
            {"description", "u = 0 in -2 du dv + (1 + u y) dx^2 + (1 + u x) dy^2, curved ambient, non-umbilical screen"},
            {"ambient", amb},
            {"hypersurface",
             {{"chart_dim", 3},
              {"embedding", {"0", "x0", "x1", "x2"}},
              {"xi", {"1", "0", "0"}},
              {"screen", {unit(3, 1), unit(3, 2)}}}},
            {"conformal", {{"f", "0.1*x1*x2"}, {"ambient_f", "0.1*x2*x3"}}},
            {"weyl", {{"theta0", {"0", "0.2", "0.1*x1"}}}},
            {"grid", grid({{-1, 1}, {-1, 1}, {-1, 1}}, 5, 3)}};
}

std::vector<FixtureInfo> make_registry()
{
    const std::vector<std::string> all = {"hypersurface", "degcalc", "weyl", "foliation"};
    const std::vector<std::string> kaehler = {"hypersurface", "degcalc", "weyl", "kaehler"};
    return {
        {"null_hyperplane", "R^4_1, totally geodesic", all, "", null_hyperplane()},
        {"null_hyperplane_conformal", "EW candidate with horizontal f, theta0", {"hypersurface", "degcalc", "weyl"},
         "", null_hyperplane_conformal()},
        {"null_wave", "curved R^4_1, totally geodesic", {"hypersurface", "degcalc", "weyl"}, "", null_wave()},
        {"light_cone", "R^4_1 light cone", {"hypersurface"}, "negative: not totally geodesic", light_cone()},
        {"umbilic_foliation", "R^4_1, umbilical screen, spherical leaves", all, "", umbilic_foliation()},
        {"umbilic_foliation_6d", "R^6_1, umbilical screen, spherical leaves", all, "", umbilic_foliation_6d()},
        {"kaehler_flat", "R^4_2, phi = 0", kaehler, "", kaehler_flat("kaehler_flat", "null hyperplane in flat R^4_2, phi = 0", "1")},
        {"kaehler_flat_proportional", "R^4_2, phi proportional to theta0", kaehler, "",
         kaehler_flat("kaehler_flat_proportional", "null hyperplane in flat R^4_2, phi = c theta0",
                      "1/(1-0.2*(x1-x2))")},
        {"kaehler_flat_generic", "R^4_2, phi not proportional to theta0", kaehler, "",
         kaehler_flat("kaehler_flat_generic", "null hyperplane in flat R^4_2, generic phi", "exp(0.3*x1^2)")},
        {"kaehler_6d", "R^6_2, D0 rank 2", kaehler, "", kaehler_6d()},
        {"spacelike", "R^4_1 spacelike slice", {"hypersurface"}, "negative: not lightlike (exit 3)", spacelike()},
    };
}

} // namespace

const std::vector<FixtureInfo>& builtin_fixtures()
{
    static const std::vector<FixtureInfo> registry = make_registry();
    return registry;
}

const FixtureInfo* find_fixture(std::string_view id)
{
    for (const auto& f : builtin_fixtures())
        if (f.id == id)
            return &f;
    return nullptr;
}

} // namespace nullgeo
