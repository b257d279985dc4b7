// nullgeo: run identity suites on a GeometrySpec and report residuals.

#include "nullgeo/fixtures.hpp"
#include "nullgeo/report.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;

enum Exit { ok = 0, identity_failed = 1, spec_error = 2, geometry_error = 3, numerical_error = 4 };

// A path to a JSON file, or the id of a built-in fixture.
json load_spec(const std::string& where)
{
    std::ifstream in(where);
    if (!in) {
        if (const auto* f = nullgeo::find_fixture(where))
            return f->spec;
        throw nullgeo::SpecError("cannot open spec file '" + where + "'");
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw nullgeo::SpecError(std::string("spec is not valid JSON: ") + e.what());
    }
}

std::string join(const std::vector<std::string>& v, const char* sep)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? sep : "") + v[i];
    return out;
}

int list_fixtures(const std::string& write_dir)
{
    const auto& all = nullgeo::builtin_fixtures();
    std::size_t w = 0;
    for (const auto& f : all)
        w = std::max(w, f.id.size());
    for (const auto& f : all) {
        std::cout << std::left << std::setw(static_cast<int>(w) + 2) << f.id << f.description
                  << "  [" << join(f.suites, ",") << "]";
        if (!f.note.empty())
            std::cout << "  " << f.note;
        std::cout << "\n";
    }
    if (!write_dir.empty()) {
        std::filesystem::create_directories(write_dir);
        for (const auto& f : all) {
            std::ofstream out(std::filesystem::path(write_dir) / (f.id + ".json"));
            out << f.spec.dump(2) << "\n";
        }
    }
    return ok;
}

int verify(const std::string& spec_path, const nullgeo::RunOptions& opt, const std::string& report_path)
{
    json doc = load_spec(spec_path);
    nullgeo::GeometrySpec spec = nullgeo::parse_spec(doc);
    nullgeo::VerificationReport r = nullgeo::run_verification(spec, doc, opt);
    std::cout << nullgeo::to_text(r);
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out)
            throw nullgeo::SpecError("cannot write report '" + report_path + "'");
        out << nullgeo::to_json(r).dump(2) << "\n";
    }
    return r.all_passed() ? ok : identity_failed;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Numerical verification of lightlike hypersurface identities"};
    app.require_subcommand(1);

    std::string spec_path, report_path, suite = "all", write_dir;
    nullgeo::RunOptions opt;
    std::uint64_t seed = 0;
    double tol_curvature = 0.0;

    auto* v = app.add_subcommand("verify", "run identity suites on a spec");
    v->add_option("--spec", spec_path, "GeometrySpec JSON file or built-in fixture id")->required();
    std::vector<std::string> choices = {"all"};
    for (const auto& s : nullgeo::suite_names())
        choices.push_back(s);
    v->add_option("--suite", suite, "suite to run")->check(CLI::IsMember(choices));
    v->add_option("--points", opt.points, "extra seeded random points")->check(CLI::NonNegativeNumber);
    auto* seed_opt = v->add_option("--seed", seed, "overrides the grid seed");
    auto* tol_opt = v->add_option("--tol-curvature", tol_curvature, "overrides the curvature tolerance")
                        ->check(CLI::PositiveNumber);
    v->add_option("--report", report_path, "write the JSON report here");
    v->add_option("--threads", opt.threads, "worker threads (0: hardware count)");

    auto* fx = app.add_subcommand("fixtures", "list the built-in specs");
    fx->add_option("--write", write_dir, "also write every fixture as <dir>/<id>.json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? ok : spec_error;
    }

    if (*fx)
        return list_fixtures(write_dir);

    opt.suite = suite;
    if (*seed_opt)
        opt.seed = seed;
    if (*tol_opt)
        opt.tol_curvature = tol_curvature;
    try {
        return verify(spec_path, opt, report_path);
    } catch (const nullgeo::SpecError& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return spec_error;
    } catch (const json::exception& e) {
        std::cerr << "spec error: " << e.what() << "\n";
        return spec_error;
    } catch (const nullgeo::GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return geometry_error;
    } catch (const nullgeo::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return numerical_error;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return numerical_error;
    }
}
