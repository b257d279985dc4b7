#pragma once

#include "nullgeo/spec.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace nullgeo {

struct FixtureInfo {
    std::string id;
    std::string description;
    std::vector<std::string> suites;
    std::string note; // e.g. "negative: not totally geodesic"
    nlohmann::json spec;
};

const std::vector<FixtureInfo>& builtin_fixtures();

/// nullptr if unknown.
const FixtureInfo* find_fixture(std::string_view id);

} // namespace nullgeo
