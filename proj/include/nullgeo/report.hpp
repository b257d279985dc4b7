#pragma once

#include "nullgeo/geometry.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nullgeo {

inline constexpr const char* tool_version = "0.1.0";

enum class Verdict { Pass, Fail, Skipped };

std::string to_string(Verdict v);

struct IdentityEntry {
    std::string id;
    std::string suite;
    std::string description;
    Verdict verdict = Verdict::Skipped;
    double max_residual = 0.0;
    double mean_residual = 0.0;
    std::size_t samples = 0;
    double tolerance = 0.0;
    std::optional<std::string> skipped_reason;
    std::optional<std::string> note;
    nlohmann::json details = nlohmann::json::object();
};

struct VerificationReport {
    std::string spec_id;
    std::string fingerprint;
    std::vector<std::string> suites;
    std::size_t chart_points = 0;
    int random_points = 0;
    std::uint64_t seed = 0;
    Tolerances tolerances;
    double elapsed_seconds = 0.0;
    std::vector<IdentityEntry> entries;

    bool all_passed() const;
    const IdentityEntry* find(const std::string& id) const;
};

struct RunOptions {
    /// "all" or one suite name.
    std::string suite = "all";
    /// Extra seeded random points on top of the uniform grid.
    int points = 100;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol_curvature;
    /// Worker threads for the per-point loop; 0 picks the hardware count.
    unsigned threads = 0;
};

const std::vector<std::string>& suite_names();

/// Every identity id in report order, with its suite.
std::vector<std::pair<std::string, std::string>> identity_registry();

/// SHA-256 of the canonical JSON dump of the spec.
std::string spec_fingerprint(const nlohmann::json& spec);

/// Runs the selected suites. Throws SpecError, GeometryError or NumericalError
/// before or during evaluation.
VerificationReport run_verification(const GeometrySpec& spec, const nlohmann::json& spec_json, const RunOptions& opt);

nlohmann::json to_json(const VerificationReport& r);
std::string to_text(const VerificationReport& r);

} // namespace nullgeo
