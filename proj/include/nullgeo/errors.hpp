#pragma once

#include <stdexcept>
#include <string>

namespace nullgeo {

/// Input data violates a geometric precondition (not lightlike, degenerate screen, ...).
class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Induced metric does not have rank n at a point.
class NotLightlikeError : public GeometryError {
public:
    using GeometryError::GeometryError;
};

/// A solver or iteration failed on data that passed validation.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace nullgeo
