#pragma once

#include "nullgeo/hypersurface.hpp"

#include <functional>

namespace nullgeo {

/// A degenerate metric on M's chart together with its normalization and a
/// torsion-free connection used to differentiate fields.
struct DegenerateMetric {
    std::function<Mat(const Vec&)> g;
    std::function<Vec(const Vec&)> eta;
    std::function<Vec(const Vec&)> xi;
    std::function<Christoffel(const Vec&)> connection;
};

/// The induced data (g0, η, ξ, ∇) of a hypersurface.
DegenerateMetric induced_structure(const LightlikeHypersurface& hyp);

/// ♭/♯ at one point.
struct PseudoInverseKit {
    Mat g;
    Mat g_tilde;   // g + η ⊗ η
    Mat g_bracket; // g^[αβ] = g̃⁻¹
    Vec eta;
    Vec xi;
};

PseudoInverseKit make_kit(const Mat& g, const Vec& eta, const Vec& xi);
PseudoInverseKit make_kit(const DegenerateMetric& m, const Vec& u);

/// X♭ = g(X, ·) + η(X) η
Vec flat(const PseudoInverseKit& kit, const Vec& X);
/// Inverse of flat.
Vec sharp(const PseudoInverseKit& kit, const Vec& omega);
/// |ω(X) - g(ω♯, X) - ω(ξ) η(X)|
double sharp_identity_residual(const PseudoInverseKit& kit, const Vec& omega, const Vec& X);

/// g^[αβ] f_α ∂_β for the differential df.
Vec grad(const PseudoInverseKit& kit, const Vec& df);
/// grad f as a field for an expression f.
TangentField grad_field(const DegenerateMetric& m, const ScalarField& f);

/// Σ g^[αβ] g̃(∇_{X_α} X, X_β) in the frame given by the columns of `frame`.
double div(const DegenerateMetric& m, const TangentField& X, const Vec& u, const Mat& frame);
/// Same in the quasi-orthonormal frame {ξ, W_i}.
double div(const DegenerateMetric& m, const TangentField& X, const Vec& u, const LightlikeHypersurface& hyp);

double laplacian(const DegenerateMetric& m, const ScalarField& f, const Vec& u, const Mat& frame);

} // namespace nullgeo
