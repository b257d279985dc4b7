#pragma once

#include "nullgeo/expr.hpp"
#include "nullgeo/linalg.hpp"

#include <optional>
#include <vector>

namespace nullgeo {

/// A metric ḡ in a single chart, given by expression components. Also used
/// for the leaves of a screen foliation, where the metric is Riemannian.
///
/// Curvature follows R(X,Y) = D_[X,Y] - [D_X, D_Y], the negative of the
/// usual textbook convention; with it, Ric(X,Y) = tr(Z -> R(X,Z)Y) is
/// positive on round spheres.
class AmbientManifold {
public:
    AmbientManifold(std::vector<std::vector<ScalarField>> metric, int index,
                    std::optional<std::vector<std::vector<ScalarField>>> complex_structure = {});

    int dim() const noexcept { return dim_; }
    int index() const noexcept { return index_; }
    bool has_complex_structure() const noexcept { return has_j_; }

    Mat metric(const Vec& x) const;
    /// Exact first partials: result[c](a, b) = ∂_c ḡ_ab.
    std::vector<Mat> metric_partials(const Vec& x) const;

    Christoffel christoffel(const Vec& x) const;
    /// Exact partials of the Christoffel symbols: result[e] = ∂_e Γ.
    std::vector<Christoffel> christoffel_partials(const Vec& x) const;

    Vec riemann(const Vec& x, const Vec& X, const Vec& Y, const Vec& Z) const;
    Mat ricci(const Vec& x) const;
    double scalar_curvature(const Vec& x) const;

    /// max_{abc} |∂_c ḡ_ab - Γ^e_ca ḡ_eb - Γ^e_cb ḡ_ae|
    double metricity_residual(const Vec& x) const;

    /// (J̄X)^a = J(a, b) X^b
    Mat complex_structure(const Vec& x) const;
    /// ((∇̄_X J̄) Y)
    Vec complex_structure_derivative(const Vec& x, const Vec& X, const Vec& Y) const;

    /// Symmetry, nondegeneracy and signature at x. Throws NumericalError on failure.
    void validate_at(const Vec& x) const;

    const ScalarField& component(int a, int b) const { return g_[idx(a, b)]; }

private:
    std::size_t idx(int a, int b) const { return static_cast<std::size_t>(a * dim_ + b); }

    int dim_;
    int index_;
    bool has_j_ = false;
    std::vector<ScalarField> g_;   // dim*dim
    std::vector<ScalarField> dg_;  // [c][a][b]
    std::vector<ScalarField> ddg_; // [d][c][a][b]
    std::vector<ScalarField> j_;   // dim*dim
    std::vector<ScalarField> dj_;  // [c][a][b]
};

} // namespace nullgeo
