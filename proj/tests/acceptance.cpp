// Acceptance run: one line per criterion AC1..AC8.
//
// A criterion is PASS when every check holds, KNOWN-FAIL when the only failing
// checks are listed in `documented` (closed forms whose printed version
// disagrees with its oracle), and FAIL otherwise. The exit
// status is 0 unless some criterion has an undocumented failure.
//
// usage: acceptance [path/to/nullgeo [fixtures dir]]

#include "nullgeo/fixtures.hpp"
#include "nullgeo/geometry.hpp"
#include "nullgeo/report.hpp"

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

using namespace nullgeo;
using nlohmann::json;

namespace {

struct Check {
    std::string what;
    bool ok;
    std::string detail;
};

// Failing (identity, fixture) pairs where the printed closed form disagrees with its oracle.
const std::set<std::string> documented = {
    "eq40@null_hyperplane_conformal", "eq40@null_wave",          "eq40@umbilic_foliation",
    "eq40@umbilic_foliation_6d",      "eq40@kaehler_flat",       "eq40@kaehler_flat_proportional",
    "eq40@kaehler_flat_generic",      "eq40@kaehler_6d",         "eq42@null_hyperplane_conformal",
    "eq42@null_wave",                 "eq42@kaehler_flat_generic", "eq42@kaehler_6d",
    "eq73@umbilic_foliation",         "eq73@umbilic_foliation_6d",
};

std::map<std::pair<std::string, std::string>, VerificationReport> cache;

const VerificationReport& report(const std::string& fixture, const std::string& suite)
{
    auto key = std::make_pair(fixture, suite);
    auto it = cache.find(key);
    if (it != cache.end())
        return it->second;
    const FixtureInfo* f = find_fixture(fixture);
    if (!f)
        throw std::runtime_error("unknown fixture " + fixture);
    RunOptions opt;
    opt.suite = suite;
    opt.points = 100;
    return cache.emplace(key, run_verification(parse_spec(f->spec), f->spec, opt)).first->second;
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

// Identity `id` has samples, is not skipped and max residual <= bound.
Check bound_check(const std::string& fixture, const std::string& suite, const std::string& id, double bound,
                  std::size_t min_samples = 1)
{
    const IdentityEntry* e = report(fixture, suite).find(id);
    std::string what = id + "@" + fixture;
    if (!e)
        return {what, false, "missing"};
    if (e->verdict == Verdict::Skipped)
        return {what, false, "skipped: " + e->skipped_reason.value_or("")};
    bool ok = e->max_residual <= bound && e->samples >= min_samples;
    return {what, ok, "max " + fmt(e->max_residual) + " n " + std::to_string(e->samples)};
}

struct Criterion {
    std::string id;
    std::string title;
    std::function<std::vector<Check>()> run;
};

int run_cli(const std::string& cli, const std::string& args)
{
    std::string cmd = "\"" + cli + "\" " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::vector<std::string> weyl_fixtures = {
    "null_hyperplane",  "null_hyperplane_conformal", "null_wave",          "umbilic_foliation",
    "umbilic_foliation_6d", "kaehler_flat",          "kaehler_flat_proportional", "kaehler_flat_generic",
    "kaehler_6d"};
const std::vector<std::string> kaehler_fixtures = {"kaehler_flat", "kaehler_flat_proportional",
                                                    "kaehler_flat_generic", "kaehler_6d"};

std::vector<Check> ac1()
{
    std::vector<Check> out;
    for (const std::string fx : {"null_hyperplane", "null_hyperplane_conformal"}) {
        for (const char* id : {"eq1", "eq2", "eq17", "eq18", "eq19"})
            out.push_back(bound_check(fx, "hypersurface", id, 1e-8, 225));
        out.push_back(bound_check(fx, "degcalc", "eq33", 1e-8, 225));
        out.push_back(bound_check(fx, "weyl", "eq37", 1e-8, 225));
    }
    // The null hyperplane fixtures carry no complex structure; the almost
    // contact identities run on the Kaehler fixtures.
    for (const auto& fx : kaehler_fixtures)
        for (const char* id : {"eq78", "eq79", "eq80", "eq81", "eq82"})
            out.push_back(bound_check(fx, "kaehler", id, 1e-8, 225));
    return out;
}

std::vector<Check> ac2()
{
    std::vector<Check> out;
    for (const auto& fx : weyl_fixtures) {
        out.push_back(bound_check(fx, "hypersurface", "eq20", 1e-6));
        out.push_back(bound_check(fx, "weyl", "eq26", 1e-6));
        out.push_back(bound_check(fx, "weyl", "eq27", 1e-6));
    }
    out.push_back(bound_check("light_cone", "hypersurface", "eq20", 1e-6));
    for (const auto& fx : kaehler_fixtures)
        for (const char* id : {"techn_i", "techn_ii", "techn_iii", "techn_iv", "coro1"})
            out.push_back(bound_check(fx, "kaehler", id, 1e-6));
    for (const std::string fx : {"null_hyperplane", "umbilic_foliation", "umbilic_foliation_6d"})
        out.push_back(bound_check(fx, "foliation", "eq64", 1e-6));
    return out;
}

std::vector<Check> ac3()
{
    std::vector<Check> out;
    for (const auto& fx : weyl_fixtures) {
        out.push_back(bound_check(fx, "weyl", "eq40", 1e-4, 200));
        out.push_back(bound_check(fx, "weyl", "eq44", 1e-4, 200));
        out.push_back(bound_check(fx, "weyl", "eq42", 1e-4, 200));
    }
    return out;
}

std::vector<Check> ac4()
{
    std::vector<Check> out;
    for (const auto& fx : weyl_fixtures)
        out.push_back(bound_check(fx, "weyl", "conformal_invariance", 1e-4, 3));
    return out;
}

std::vector<Check> ac5()
{
    std::vector<Check> out;
    for (const std::string fx : {"umbilic_foliation", "umbilic_foliation_6d"}) {
        out.push_back(bound_check(fx, "weyl", "eq43", 1e-4));
        out.push_back(bound_check(fx, "foliation", "eq50", 1e-6));
        out.push_back(bound_check(fx, "foliation", "eq65", 1e-3));
        out.push_back(bound_check(fx, "foliation", "thm3a", 1e-4));
        for (const char* id : {"eq61", "eq63", "eq70", "eq73"})
            out.push_back(bound_check(fx, "foliation", id, 1e-4));
    }
    return out;
}

std::vector<Check> ac6()
{
    std::vector<Check> out;
    const std::vector<std::pair<std::string, bool>> expect = {
        {"kaehler_flat", true}, {"kaehler_flat_proportional", true}, {"kaehler_flat_generic", false}};
    for (const auto& [fx, closed] : expect) {
        const IdentityEntry* e = report(fx, "kaehler").find("thm4");
        if (!e || e->verdict == Verdict::Skipped) {
            out.push_back({"thm4@" + fx, false, "skipped"});
            continue;
        }
        bool got = e->details.value("closed", !closed);
        out.push_back({"closed@" + fx, got == closed, std::string(got ? "closed" : "not closed")});
        out.push_back({"dual@" + fx, e->max_residual <= 1e-5, "max " + fmt(e->max_residual)});
    }
    return out;
}

std::vector<Check> ac7(const std::string& cli, const std::string& fixtures_dir)
{
    std::vector<Check> out;
    if (!cli.empty()) {
        int code = run_cli(cli, "verify --spec \"" + fixtures_dir + "/spacelike.json\"");
        out.push_back({"exit@spacelike", code == 3, "exit " + std::to_string(code)});
    } else {
        bool threw = false;
        try {
            report("spacelike", "all");
        } catch (const NotLightlikeError&) {
            threw = true;
        }
        out.push_back({"reject@spacelike", threw, threw ? "NotLightlikeError" : "accepted"});
    }
    const FixtureInfo* f = find_fixture("light_cone");
    GeometrySpec spec = parse_spec(f->spec);
    Geometry geo = build_geometry(spec);
    auto tg = check_totally_geodesic(geo.hypersurface, sample_points(spec.grid, 100), spec.tolerances.algebraic);
    out.push_back({"B@light_cone", !tg.totally_geodesic && tg.max_B > 1e-2, "max |B| " + fmt(tg.max_B)});
    return out;
}

// Expression strings of a spec with the dimension of the chart they live on.
void collect_fields(const json& spec, std::vector<ScalarField>& chart, std::vector<ScalarField>& ambient)
{
    const int n_amb = spec["ambient"]["dim"].get<int>();
    const int n_chart = spec["hypersurface"]["chart_dim"].get<int>();
    std::function<void(const json&, int, std::vector<ScalarField>&)> walk = [&](const json& j, int d,
                                                                               std::vector<ScalarField>& out) {
        if (j.is_string())
            out.push_back(ScalarField::parse(j.get<std::string>(), d));
        else if (j.is_array())
            for (const auto& x : j)
                walk(x, d, out);
    };
    walk(spec["ambient"]["metric"], n_amb, ambient);
    if (spec["ambient"].contains("complex_structure"))
        walk(spec["ambient"]["complex_structure"], n_amb, ambient);
    const json& h = spec["hypersurface"];
    for (const char* k : {"embedding", "xi", "screen"})
        if (h.contains(k))
            walk(h[k], n_chart, chart);
    if (spec.contains("conformal")) {
        if (spec["conformal"].contains("f"))
            walk(spec["conformal"]["f"], n_chart, chart);
        if (spec["conformal"].contains("ambient_f"))
            walk(spec["conformal"]["ambient_f"], n_amb, ambient);
    }
    if (spec.contains("weyl") && spec["weyl"].contains("theta0"))
        walk(spec["weyl"]["theta0"], n_chart, chart);
}

double partial_mismatch(const std::vector<ScalarField>& fields, const std::vector<Vec>& points)
{
    double worst = 0.0;
    for (const ScalarField& f : fields)
        for (int i = 0; i < f.dim(); ++i) {
            ScalarField d = f.exact_partial(i);
            for (const Vec& p : points) {
                double e = d.eval(as_span(p)), fd = f.fd_partial(i, as_span(p));
                worst = std::max(worst, std::abs(e - fd) / std::max(1.0, std::abs(e)));
            }
        }
    return worst;
}

std::vector<Check> ac8()
{
    std::vector<Check> out;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (const auto& f : builtin_fixtures()) {
        GeometrySpec spec = parse_spec(f.spec);
        Geometry geo = build_geometry(spec);
        std::vector<Vec> chart_pts = sample_points(spec.grid, 10), amb_pts;
        for (const Vec& u : chart_pts)
            amb_pts.push_back(geo.hypersurface.embedding().point(u));

        std::vector<ScalarField> chart_fields, amb_fields;
        collect_fields(f.spec, chart_fields, amb_fields);
        double pm = std::max(partial_mismatch(chart_fields, chart_pts), partial_mismatch(amb_fields, amb_pts));
        out.push_back({"partials@" + f.id, pm <= 1e-6, "rel " + fmt(pm)});

        const AmbientManifold& amb = geo.ambient;
        double metricity = 0.0, bianchi = 0.0;
        const int m = amb.dim();
        for (const Vec& x : amb_pts) {
            metricity = std::max(metricity, amb.metricity_residual(x));
            for (int t = 0; t < 3; ++t) {
                Vec X(m), Y(m), Z(m);
                for (int a = 0; a < m; ++a) {
                    X(a) = U(rng);
                    Y(a) = U(rng);
                    Z(a) = U(rng);
                }
                Vec r1 = amb.riemann(x, X, Y, Z), r2 = amb.riemann(x, Y, Z, X), r3 = amb.riemann(x, Z, X, Y);
                double scale = std::max({1.0, r1.norm(), r2.norm(), r3.norm()});
                bianchi = std::max(bianchi, (r1 + r2 + r3).norm() / scale);
            }
        }
        out.push_back({"metricity@" + f.id, metricity <= 1e-6, fmt(metricity)});
        out.push_back({"bianchi@" + f.id, bianchi <= 1e-6, fmt(bianchi)});
    }
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    std::string cli = argc > 1 ? argv[1] : "";
    std::string fixtures_dir = argc > 2 ? argv[2] : "fixtures";

    const std::vector<Criterion> criteria = {
        {"AC1", "algebraic layer <= 1e-8 on >= 225 points", ac1},
        {"AC2", "first-derivative layer <= 1e-6 scale", ac2},
        {"AC3", "curvature closed forms vs commutator and traces <= 1e-4, >= 200 samples", ac3},
        {"AC4", "Ric^D conformal invariance <= 1e-4", ac4},
        {"AC5", "Einstein-Weyl transfer to the leaves", ac5},
        {"AC6", "closedness biconditional on three Kaehler specs", ac6},
        {"AC7", "negative controls", [&] { return ac7(cli, fixtures_dir); }},
        {"AC8", "oracle independence", ac8},
    };

    bool undocumented = false;
    for (const Criterion& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<Check> checks;
        std::string error;
        try {
            checks = c.run();
        } catch (const std::exception& e) {
            error = e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        std::vector<const Check*> known, unknown;
        for (const Check& k : checks)
            if (!k.ok)
                (documented.count(k.what) ? known : unknown).push_back(&k);
        const char* status = !error.empty() || !unknown.empty() ? "FAIL" : !known.empty() ? "KNOWN-FAIL" : "PASS";
        if (!error.empty() || !unknown.empty())
            undocumented = true;

        std::printf("%-4s %-10s %zu checks, %.1f s  %s\n", c.id.c_str(), status, checks.size(), secs,
                    c.title.c_str());
        if (!error.empty())
            std::printf("       error: %s\n", error.c_str());
        for (const Check* k : unknown)
            std::printf("       fail: %s (%s)\n", k->what.c_str(), k->detail.c_str());
        for (const Check* k : known)
            std::printf("       known: %s (%s)\n", k->what.c_str(), k->detail.c_str());
        if (secs > 60.0)
            std::printf("       note: over the 60 s budget\n");
    }
    return undocumented ? 1 : 0;
}
