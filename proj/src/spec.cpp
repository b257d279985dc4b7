#include "nullgeo/spec.hpp"

#include <cstdio>

namespace nullgeo {

using nlohmann::json;

namespace {

const json& need(const json& obj, const char* key, const std::string& where)
{
    if (!obj.is_object() || !obj.contains(key))
        throw SpecError(where + ": missing key \"" + key + "\"");
    return obj.at(key);
}

std::string expr(const json& v, const std::string& where)
{
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_number()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
        return buf;
    }
    throw SpecError(where + ": expected an expression string");
}

std::vector<std::string> expr_list(const json& v, const std::string& where, std::size_t expected)
{
    if (!v.is_array())
        throw SpecError(where + ": expected an array of expressions");
    if (v.size() != expected)
        throw SpecError(where + ": expected " + std::to_string(expected) + " entries, got " +
                        std::to_string(v.size()));
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out.push_back(expr(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<std::vector<std::string>> expr_matrix(const json& v, const std::string& where, std::size_t rows,
                                                  std::size_t cols)
{
    if (!v.is_array() || v.size() != rows)
        throw SpecError(where + ": expected " + std::to_string(rows) + " rows");
    std::vector<std::vector<std::string>> out;
    for (std::size_t i = 0; i < rows; ++i)
        out.push_back(expr_list(v[i], where + "[" + std::to_string(i) + "]", cols));
    return out;
}

int positive_int(const json& v, const std::string& where)
{
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw SpecError(where + ": expected a non-negative integer");
    return v.get<int>();
}

double number(const json& v, const std::string& where)
{
    if (!v.is_number())
        throw SpecError(where + ": expected a number");
    return v.get<double>();
}

} // namespace

GeometrySpec parse_spec(const json& doc)
{
    if (!doc.is_object())
        throw SpecError("spec: top level must be an object");
    GeometrySpec s;
    s.id = doc.value("id", std::string("unnamed"));
    s.description = doc.value("description", std::string());

    const json& amb = need(doc, "ambient", "spec");
    s.ambient_dim = positive_int(need(amb, "dim", "ambient"), "ambient.dim");
    s.index = positive_int(need(amb, "index", "ambient"), "ambient.index");
    if (s.ambient_dim < 3)
        throw SpecError("ambient.dim must be at least 3");
    if (s.index > s.ambient_dim)
        throw SpecError("ambient.index exceeds ambient.dim");
    auto d = static_cast<std::size_t>(s.ambient_dim);
    s.metric = expr_matrix(need(amb, "metric", "ambient"), "ambient.metric", d, d);
    if (amb.contains("complex_structure"))
        s.complex_structure = expr_matrix(amb.at("complex_structure"), "ambient.complex_structure", d, d);

    const json& hyp = need(doc, "hypersurface", "spec");
    s.chart_dim = positive_int(need(hyp, "chart_dim", "hypersurface"), "hypersurface.chart_dim");
    if (s.chart_dim != s.ambient_dim - 1)
        throw SpecError("hypersurface.chart_dim must equal ambient.dim - 1");
    auto m = static_cast<std::size_t>(s.chart_dim);
    s.embedding = expr_list(need(hyp, "embedding", "hypersurface"), "hypersurface.embedding", d);
    if (hyp.contains("xi"))
        s.xi = expr_list(hyp.at("xi"), "hypersurface.xi", m);
    s.screen_from_complex_structure = hyp.value("screen_from_complex_structure", false);
    if (s.screen_from_complex_structure) {
        if (!s.complex_structure)
            throw SpecError("screen_from_complex_structure requires ambient.complex_structure");
        if (!s.xi)
            throw SpecError("screen_from_complex_structure requires hypersurface.xi");
    } else {
        s.screen = expr_matrix(need(hyp, "screen", "hypersurface"), "hypersurface.screen", m - 1, m);
    }

    if (doc.contains("conformal")) {
        const json& conf = doc.at("conformal");
        s.conformal_f = expr(need(conf, "f", "conformal"), "conformal.f");
        if (conf.contains("ambient_f"))
            s.conformal_ambient_f = expr(conf.at("ambient_f"), "conformal.ambient_f");
    }
    if (doc.contains("weyl"))
        s.theta0 = expr_list(need(doc.at("weyl"), "theta0", "weyl"), "weyl.theta0", m);

    if (doc.contains("foliation")) {
        const json& fol = doc.at("foliation");
        LeafSpec leaf;
        leaf.coordinate = positive_int(need(fol, "leaf_coordinate", "foliation"), "foliation.leaf_coordinate");
        if (leaf.coordinate >= s.chart_dim)
            throw SpecError("foliation.leaf_coordinate out of range");
        const json& vals = need(fol, "leaf_values", "foliation");
        if (!vals.is_array() || vals.empty())
            throw SpecError("foliation.leaf_values: expected a non-empty array");
        for (const auto& v : vals)
            leaf.values.push_back(number(v, "foliation.leaf_values"));
        s.leaf = leaf;
    }

    const json& grid = need(doc, "grid", "spec");
    const json& ranges = need(grid, "ranges", "grid");
    if (!ranges.is_array() || ranges.size() != m)
        throw SpecError("grid.ranges: expected one [lo, hi] pair per chart coordinate");
    for (const auto& r : ranges) {
        if (!r.is_array() || r.size() != 2)
            throw SpecError("grid.ranges: expected [lo, hi]");
        double lo = number(r[0], "grid.ranges"), hi = number(r[1], "grid.ranges");
        if (!(lo <= hi))
            throw SpecError("grid.ranges: lo must not exceed hi");
        s.grid.ranges.emplace_back(lo, hi);
    }
    if (grid.contains("points_per_axis"))
        s.grid.points_per_axis = positive_int(grid.at("points_per_axis"), "grid.points_per_axis");
    if (grid.contains("seed"))
        s.grid.seed = grid.at("seed").get<std::uint64_t>();

    if (doc.contains("tolerances")) {
        const json& t = doc.at("tolerances");
        if (t.contains("algebraic"))
            s.tolerances.algebraic = number(t.at("algebraic"), "tolerances.algebraic");
        if (t.contains("derivative"))
            s.tolerances.derivative = number(t.at("derivative"), "tolerances.derivative");
        if (t.contains("curvature"))
            s.tolerances.curvature = number(t.at("curvature"), "tolerances.curvature");
    }
    return s;
}

json to_json(const GeometrySpec& s)
{
    json doc;
    doc["id"] = s.id;
    doc["description"] = s.description;
    doc["ambient"] = {{"dim", s.ambient_dim}, {"index", s.index}, {"metric", s.metric}};
    if (s.complex_structure)
        doc["ambient"]["complex_structure"] = *s.complex_structure;
    json hyp = {{"chart_dim", s.chart_dim}, {"embedding", s.embedding}};
    if (s.xi)
        hyp["xi"] = *s.xi;
    if (s.screen_from_complex_structure)
        hyp["screen_from_complex_structure"] = true;
    else
        hyp["screen"] = s.screen;
    doc["hypersurface"] = hyp;
    doc["conformal"] = {{"f", s.conformal_f}};
    if (s.conformal_ambient_f)
        doc["conformal"]["ambient_f"] = *s.conformal_ambient_f;
    if (!s.theta0.empty())
        doc["weyl"] = {{"theta0", s.theta0}};
    if (s.leaf)
        doc["foliation"] = {{"leaf_coordinate", s.leaf->coordinate}, {"leaf_values", s.leaf->values}};
    json ranges = json::array();
    for (const auto& [lo, hi] : s.grid.ranges)
        ranges.push_back({lo, hi});
    doc["grid"] = {{"ranges", ranges}, {"points_per_axis", s.grid.points_per_axis}, {"seed", s.grid.seed}};
    doc["tolerances"] = {{"algebraic", s.tolerances.algebraic},
                         {"derivative", s.tolerances.derivative},
                         {"curvature", s.tolerances.curvature}};
    return doc;
}

std::string fingerprint(const json& doc)
{
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : doc.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace nullgeo
